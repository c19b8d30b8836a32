"""Planar kernel for the canonical triangle chart.

Every triangle is drawn in its own chart with local vertex 0 at (0,0),
vertex 1 at (1,0) and vertex 2 at (1/2, sqrt(3)/2).  Points inside a
chart are plain (x, y) pairs of run scalars; all decisions go through
the Scalars context so the same code runs in float and exact mode.
"""

from __future__ import annotations

from .numbers import Scalars


def corners(ctx: Scalars):
    """Chart positions of the three local vertices."""
    h = ctx.half * ctx.sqrt3
    return ((ctx.zero, ctx.zero), (ctx.one, ctx.zero), (ctx.half, h))


def xy_of_bary(ctx: Scalars, b):
    b0, b1, b2 = b
    x = b1 + b2 * ctx.half
    y = b2 * ctx.half * ctx.sqrt3
    return (x, y)


def bary_of_xy(ctx: Scalars, x, y):
    # y = b2 * sqrt(3)/2  =>  b2 = y * 2/sqrt(3) = y * 2 sqrt(3)/3
    b2 = y * (ctx.frac(2, 3) * ctx.sqrt3)
    b1 = x - b2 * ctx.half
    b0 = ctx.one - b1 - b2
    return (b0, b1, b2)


def bary_velocity(ctx: Scalars, dx, dy):
    """Barycentric rate of change along a chart direction (sums to 0)."""
    db2 = dy * (ctx.frac(2, 3) * ctx.sqrt3)
    db1 = dx - db2 * ctx.half
    db0 = -db1 - db2
    return (db0, db1, db2)


def cross(ax, ay, bx, by):
    return ax * by - ay * bx

def dot(ax, ay, bx, by):
    return ax * bx + ay * by


def rotate(ctx: Scalars, k30: int, x, y):
    """Rotate (x, y) by k30 * 30 degrees counterclockwise."""
    c, s = ctx.cos_sin_deg(30 * (k30 % 12))
    return (c * x - s * y, s * x + c * y)


class Isometry:
    """Orientation-preserving rigid motion: rotation by k*30 deg then translate.

    Closed under composition; the rotation index keeps the exact mode exact.
    """

    __slots__ = ("ctx", "k", "tx", "ty")

    def __init__(self, ctx: Scalars, k: int, tx, ty):
        self.ctx = ctx
        self.k = k % 12
        self.tx = tx
        self.ty = ty

    @classmethod
    def identity(cls, ctx: Scalars):
        return cls(ctx, 0, ctx.zero, ctx.zero)

    def apply(self, x, y):
        rx, ry = rotate(self.ctx, self.k, x, y)
        return (rx + self.tx, ry + self.ty)

    def apply_vec(self, x, y):
        return rotate(self.ctx, self.k, x, y)

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other: (self o other)(p) = self(other(p))."""
        tx, ty = self.apply(other.tx, other.ty)
        return Isometry(self.ctx, self.k + other.k, tx, ty)

    def inverse(self) -> "Isometry":
        ctx = self.ctx
        rx, ry = rotate(ctx, -self.k, -self.tx, -self.ty)
        return Isometry(ctx, -self.k, rx, ry)

    def __repr__(self):
        return f"Isometry(k={self.k}, t=({self.tx}, {self.ty}))"


def segment_intersection(ctx: Scalars, a0, a1, b0, b1):
    """Proper or touching intersection of two closed segments.

    Returns a list of (x, y) points: one point for a transversal or
    touching intersection, both overlap endpoints for collinear overlap.
    """
    ax, ay = a0
    bx, by = a1
    cx, cy = b0
    dx, dy = b1
    ux, uy = bx - ax, by - ay
    vx, vy = dx - cx, dy - cy
    wx, wy = cx - ax, cy - ay
    den = cross(ux, uy, vx, vy)
    if ctx.sign(den) != 0:
        t = cross(wx, wy, vx, vy) / den
        s = cross(wx, wy, ux, uy) / den
        z, o = ctx.zero, ctx.one
        if ctx.le(z, t) and ctx.le(t, o) and ctx.le(z, s) and ctx.le(s, o):
            return [(ax + ux * t, ay + uy * t)]
        return []
    # Parallel: either disjoint or collinear.
    if ctx.sign(cross(wx, wy, ux, uy)) != 0:
        return []
    uu = dot(ux, uy, ux, uy)
    if ctx.sign(uu) == 0:
        # a is a single point
        if on_segment(ctx, (ax, ay), b0, b1):
            return [(ax, ay)]
        return []
    t0 = dot(wx, wy, ux, uy) / uu
    t1 = t0 + dot(vx, vy, ux, uy) / uu
    lo, hi = (t0, t1) if ctx.le(t0, t1) else (t1, t0)
    lo = lo if ctx.lt(ctx.zero, lo) else ctx.zero
    hi = hi if ctx.lt(hi, ctx.one) else ctx.one
    if ctx.lt(hi, lo):
        return []
    pts = [(ax + ux * lo, ay + uy * lo)]
    if ctx.lt(lo, hi):
        pts.append((ax + ux * hi, ay + uy * hi))
    return pts


def on_segment(ctx: Scalars, p, s0, s1):
    """Closed-segment membership test with the context's tolerance."""
    px, py = p
    ax, ay = s0
    bx, by = s1
    ux, uy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    if ctx.sign(cross(ux, uy, wx, wy)) != 0:
        return False
    t = dot(wx, wy, ux, uy)
    uu = dot(ux, uy, ux, uy)
    return ctx.le(ctx.zero, t) and ctx.le(t, uu)
