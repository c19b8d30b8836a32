"""Far-field machinery behind the parallelism certificates.

Three sound ways a traced line can be certified to never meet the
reference line without tracing forever:

* closure: the traced line is a closed geodesic missing the target;
* ring escape: the trace crossed an audited convex ring outward, and
  the target lies strictly inside that ring (a Gauss-Bonnet argument
  shows the trace can never re-enter);
* flat-complement analysis: outside an audited ring the surface is flat
  with a pure translation holonomy, so straight tails can be compared
  in a developed plane, with a single cut ray keeping the bookkeeping
  single valued.

The same machinery resolves crossings that lie far beyond any sensible
arc budget (nearly parallel directions) in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import chart
from .chart import Isometry, cross
from .numbers import Scalars
from .surface import SurfacePoint, Triangulation, IncompleteRing


# -- ring audits -------------------------------------------------------------


@dataclass(frozen=True)
class RingAudit:
    ring: int
    surface_hash: str
    passed: bool
    outward_angles: tuple  # (vertex, degrees) per ring vertex

    @property
    def audit_id(self) -> str:
        return f"ring{self.ring}@{self.surface_hash}"


def ring_inner_count(surf: Triangulation, v: int, k: int) -> int:
    """Incident triangles of a ring-k vertex lying on the inner side."""
    return sum(1 for t, _ in surf.fan_ccw(v)
               if all(surf.ring_of[w] <= k for w in surf.tris[t]))


def audit_ring_convexity(surf: Triangulation, ring: int) -> RingAudit:
    """Pass iff every ring vertex shows at least 180 degrees on the
    outward side, so an outward crossing can never be undone."""
    if ring < 1 or ring >= len(surf.rings):
        raise IncompleteRing(f"ring {ring} does not exist")
    cyc = surf.rings[ring]
    angles = []
    ok = True
    for v in cyc:
        if v in surf.frontier:
            raise IncompleteRing(f"ring {ring} vertex {v} is on the frontier")
        inner = ring_inner_count(surf, v, ring)
        outward = 60 * (surf.degree[v] - inner)
        angles.append((v, outward))
        if outward < 180:
            ok = False
    return RingAudit(ring, surf.content_hash(), ok, tuple(angles))


class RingMonitor:
    """Detects ring crossings along a trace and their direction."""

    def __init__(self, surf: Triangulation):
        self.surf = surf
        self.edge_ring = {}
        for k in range(1, len(surf.rings)):
            cyc = surf.rings[k]
            n = len(cyc)
            for i in range(n):
                self.edge_ring[frozenset((cyc[i], cyc[(i + 1) % n]))] = k

    def crossing(self, tri_from: int, edge: int):
        """(ring, outward?) when the crossed edge lies on a ring cycle."""
        surf = self.surf
        u, v = surf.edge_vertices(tri_from, edge)
        k = self.edge_ring.get(frozenset((u, v)))
        if k is None:
            return None
        third = next(w for w in surf.tris[tri_from] if w not in (u, v))
        outward = surf.ring_of[third] <= k
        return k, outward

    def vertex_passage(self, v: int, tri_in: int, tri_out: int):
        """(ring, outward?) when a vertex crossing steps over a ring cycle."""
        surf = self.surf
        k = surf.ring_of.get(v)
        if k is None or k < 1 or k >= len(surf.rings) or v not in set(surf.rings[k]):
            return None
        rin = max(surf.ring_of[w] for w in surf.tris[tri_in])
        rout = max(surf.ring_of[w] for w in surf.tris[tri_out])
        if rin <= k and rout > k:
            return k, True
        if rin > k and rout <= k:
            return k, False
        return None


def max_ring_of_path(surf: Triangulation, segments) -> int:
    return max((max(surf.ring_of[v] for v in surf.tris[s.tri])
                for s in segments), default=0)


# -- certificates -------------------------------------------------------------


@dataclass(frozen=True)
class ClosureCertificate:
    period: float

    kind = "closure"


@dataclass(frozen=True)
class RingEscapeCertificate:
    rings_crossed: tuple  # strictly increasing ring indices
    escape_ring: int
    audit_id: str

    kind = "ring_escape"


@dataclass(frozen=True)
class FlatSeparationCertificate:
    """Both straight tails compared against both target tails in the
    developed flat complement; every admissible copy misses."""

    detail: str

    kind = "flat_separation"


# -- silo band ---------------------------------------------------------------


@dataclass
class BandExit:
    kind: str        # "top", "bottom", "top_vertex", "bottom_vertex", "closed"
    ray: object = None        # surface ray at the exit (kind top/bottom)
    vertex: int = None
    tri_in: int = None
    dir_in: tuple = None
    arc: float = 0.0
    point: SurfacePoint = None


class BandFrame:
    """Developed coordinates for one flat cylinder row of the silo.

    The row between ring `top` and ring `top+1` unrolls to the strip
    0 <= y <= h with x periodic of period = ring length; y = h on the
    top cycle.
    """

    def __init__(self, surf: Triangulation, ctx: Scalars, top: int):
        self.surf = surf
        self.ctx = ctx
        self.top = top
        cyc_top = surf.rings[top]
        cyc_bot = surf.rings[top + 1]
        if len(cyc_top) != len(cyc_bot):
            raise ValueError("band rows must have equal cycle lengths")
        self.period = len(cyc_top)
        self.h = ctx.half * ctx.sqrt3
        band = set()
        for t in range(surf.n_triangles()):
            rs = {surf.ring_of[v] for v in surf.tris[t]}
            if rs <= {top, top + 1} and len(rs) == 2:
                band.add(t)
        self.tris = band
        self.frames = {}
        # Anchor: the top cycle's first edge runs along y = h, +x direction.
        a, b = cyc_top[0], cyc_top[1]
        t0 = self._directed_tri(a, b)
        e0 = self._edge_of(t0, a, b)
        cs = chart.corners(ctx)
        # Wanted: corner e0 of t0 at (0, h), corner e0+1 at (1, h), band below.
        # The band triangle under the top edge contains the directed edge
        # (b, a); build its frame instead.
        t0 = self._directed_tri(b, a)
        e0 = self._edge_of(t0, b, a)
        px, py = cs[e0]
        qx, qy = cs[(e0 + 1) % 3]
        # map p -> (1, h), q -> (0, h): rotation aligning (q - p) to (-1, 0)
        k = self._rot_to(ctx, qx - px, qy - py, ctx.of(-1), ctx.zero)
        rx, ry = chart.rotate(ctx, k, px, py)
        base = Isometry(ctx, k, ctx.one - rx, self.h - ry)
        self.frames[t0] = base
        stack = [t0]
        while stack:
            t = stack.pop()
            for e in range(3):
                nbr = surf.adj.get((t, e))
                if not nbr or nbr[0] not in band or nbr[0] in self.frames:
                    continue
                iso = surf.transfer(ctx, t, e)
                cand = self.frames[t].compose(iso.inverse())
                t2 = nbr[0]
                # Refuse wrap-around re-placements (the cycle closes).
                self.frames[t2] = cand
                stack.append(t2)
        self.top_edges = self._cycle_edges(cyc_top)
        self.bot_edges = self._cycle_edges(cyc_bot)

    def _cycle_edges(self, cyc):
        out = []
        for i in range(len(cyc)):
            out.append((cyc[i], cyc[(i + 1) % len(cyc)]))
        return out

    def _directed_tri(self, u, v):
        surf = self.surf
        for t in range(surf.n_triangles()):
            tv = surf.tris[t]
            for e in range(3):
                if tv[e] == u and tv[(e + 1) % 3] == v:
                    return t
        raise ValueError(f"directed edge ({u},{v}) missing")

    def _edge_of(self, t, u, v):
        tv = self.surf.tris[t]
        for e in range(3):
            if tv[e] == u and tv[(e + 1) % 3] == v:
                return e
        raise ValueError

    @staticmethod
    def _rot_to(ctx, ax, ay, bx, by):
        for k in range(12):
            rx, ry = chart.rotate(ctx, k, ax, ay)
            if ctx.is_zero(rx - bx) and ctx.is_zero(ry - by):
                return k
        raise ValueError("directions not 30-degree related")

    def coords(self, tri: int, xy):
        return self.frames[tri].apply(*xy)

    def x_mod(self, x):
        """Reduce a strip x-coordinate into [0, period)."""
        ctx = self.ctx
        p = self.period
        if not ctx.exact:
            return x % p
        n = math.floor(float(x) / p)
        # exact adjustment around the float guess
        while x - n * p >= p:
            n += 1
        while x - n * p < 0:
            n -= 1
        return x - ctx.of(n * p)

    def locate_top(self, x):
        """Surface point on the top cycle at strip coordinate x."""
        return self._locate(self.top_edges, x, True)

    def locate_bottom(self, x):
        return self._locate(self.bot_edges, x, False)

    def _locate(self, edges, x, is_top):
        ctx = self.ctx
        x = self.x_mod(x)
        i = min(int(float(x)), self.period - 1)
        # top cycle runs toward +x from vertex 0; adjust for rounding
        while i > 0 and ctx.lt(x, ctx.of(i)):
            i -= 1
        while i < self.period - 1 and not ctx.lt(x, ctx.of(i + 1)):
            i += 1
        u, v = edges[i]
        t = x - ctx.of(i)
        return (u, v), t

    def transit(self, surf, ctx, tri: int, xy, d):
        """Fast-forward a straight run through the band.

        Returns a BandExit describing where and how the ray leaves.
        Directions are taken in the band strip frame.
        """
        fx, fy = self.coords(tri, xy)
        dxv, dyv = self.frames[tri].apply_vec(*d)
        sy = ctx.sign(dyv)
        if sy == 0:
            return BandExit("closed", arc=float(self.period))
        if sy > 0:
            ty = self.h - fy
            target_top = True
        else:
            ty = fy
            target_top = False
        steps = ty / abs(dyv) if not ctx.exact else ty / (dyv if sy > 0 else -dyv)
        x_hit = fx + dxv * steps
        seg_len = math.hypot(float(dxv), float(dyv)) * float(steps)
        (u, v), tpar = (self.locate_top(x_hit) if target_top
                        else self.locate_bottom(x_hit))
        near0 = ctx.is_zero(tpar)
        near1 = ctx.is_zero(tpar - ctx.one)
        if near0 or near1:
            vert = u if near0 else v
            return BandExit("top_vertex" if target_top else "bottom_vertex",
                            vertex=vert, arc=seg_len,
                            dir_in=(dxv, dyv))
        return BandExit("top" if target_top else "bottom",
                        arc=seg_len,
                        point=None,
                        ray=((u, v), tpar, (dxv, dyv)))


# -- flat complement ----------------------------------------------------------


@dataclass
class TailData:
    """A straight escaped tail (or tail piece) in developed coordinates."""

    base: tuple      # developed base point
    dir: tuple       # developed direction (not necessarily unit)
    arc0: float      # arc length along the line when the piece starts
    speed: float     # |dir| as float, converts parameters to arc length
    kcut: int = 0    # signed cut crossings accumulated by the access chain
    limit: float = None  # parameter bound for a split-off leading piece


class FlatComplement:
    """Developed view of the flat region outside an audited convex ring.

    Valid when the generation rule makes every vertex outside `ring`
    degree 6 and the total defect inside is zero, so the outside
    holonomy is a pure translation b.  A cut ray keeps developments
    single valued; crossing it shifts the developed picture by b.
    """

    def __init__(self, surf: Triangulation, ctx: Scalars, ring: int,
                 anchor_tri: int):
        if surf.rule is None or not surf.rule.flat_outside(0):
            raise ValueError("flat complement needs an all-degree-6 exterior rule")
        self.surf = surf
        self.ctx = ctx
        self.ring = ring
        self.anchor = anchor_tri
        inside = sum(360 - 60 * surf.degree[v] for v in surf.degree
                     if v not in surf.frontier and surf.ring_of[v] <= ring
                     and surf.degree[v] != 6)
        if inside != 0:
            raise ValueError("flat complement needs zero enclosed defect")
        self.outside = {t for t in range(surf.n_triangles())
                        if max(surf.ring_of[v] for v in surf.tris[t]) > ring}
        if anchor_tri not in self.outside:
            raise ValueError("anchor triangle must lie outside the ring")
        self.frames = {}
        self._bfs_queue = []
        self._bfs_qi = 0
        self.cut = None       # (base, dir) developed cut ray, or None
        self.cut_edges = frozenset()
        self.delta = (ctx.zero, ctx.zero)
        self.b = (ctx.zero, ctx.zero)

    # Frames are developed lazily along explicit corridors so the cut
    # can block them; see corridor_frame.

    def set_cut_edges(self, cut_edges):
        if self.frames:
            raise ValueError("cut must be set before any development")
        self.cut_edges = frozenset(cut_edges)

    def set_cut_geometry(self, cut_base, cut_dir):
        self.cut = (cut_base, cut_dir)

    def set_holonomy(self, b):
        self.b = b

    def corridor_frame(self, target_tri: int) -> Isometry:
        """Placement of a triangle's chart in the developed plane.

        All frames come from one persistent BFS forest rooted at the
        anchor that never steps across the cut or into the inside, so
        every placement is single valued over the cut complement.
        """
        got = self.frames.get(target_tri)
        if got is not None:
            return got
        surf, ctx = self.surf, self.ctx
        if target_tri not in self.outside:
            raise ValueError(f"triangle {target_tri} is not outside ring {self.ring}")
        if not self.frames:
            self.frames[self.anchor] = Isometry.identity(ctx)
            self._bfs_queue = [self.anchor]
            self._bfs_qi = 0
        while self._bfs_qi < len(self._bfs_queue):
            t = self._bfs_queue[self._bfs_qi]
            self._bfs_qi += 1
            for e in range(3):
                nbr = surf.adj.get((t, e))
                if not nbr:
                    continue
                t2 = nbr[0]
                if t2 in self.frames or t2 not in self.outside:
                    continue
                if frozenset(surf.edge_vertices(t, e)) in self.cut_edges:
                    continue
                iso = surf.transfer(ctx, t, e)
                self.frames[t2] = self.frames[t].compose(iso.inverse())
                self._bfs_queue.append(t2)
            if target_tri in self.frames:
                return self.frames[target_tri]
        if target_tri not in self.frames:
            raise ValueError(f"no corridor reaches triangle {target_tri}")
        return self.frames[target_tri]

    def compute_holonomy(self):
        """Translation discrepancy of a full BFS over the outside region.

        Developing every outside triangle without the cut produces one
        inconsistent non-tree adjacency per winding; its discrepancy is
        the holonomy translation.
        """
        surf, ctx = self.surf, self.ctx
        frames = {self.anchor: Isometry.identity(ctx)}
        order = [self.anchor]
        qi = 0
        best = None
        while qi < len(order):
            t = order[qi]
            qi += 1
            for e in range(3):
                nbr = surf.adj.get((t, e))
                if not nbr or nbr[0] not in self.outside:
                    continue
                t2 = nbr[0]
                iso = surf.transfer(ctx, t, e)
                cand = frames[t].compose(iso.inverse())
                if t2 not in frames:
                    frames[t2] = cand
                    order.append(t2)
                    continue
                have = frames[t2]
                dk = (cand.k - have.k) % 12
                dx = cand.tx - have.tx
                dy = cand.ty - have.ty
                if dk != 0:
                    raise ValueError("outside holonomy has a rotation part")
                if not (ctx.is_zero(dx) and ctx.is_zero(dy)):
                    mag = float(dx) ** 2 + float(dy) ** 2
                    if best is None or mag > best[0]:
                        best = (mag, (dx, dy))
        if best is None:
            return (ctx.zero, ctx.zero)
        return best[1]

    def calibrate_cut(self):
        """Fix the pairing between cut-crossing signs and the holonomy shift.

        A chain that steps straight across the cut develops points with an
        offset relative to the cut-avoiding corridor development; the offset
        per crossing of geometric sign +1 is stored as `delta`.
        """
        surf, ctx = self.surf, self.ctx
        if self.cut is None:
            self.delta = (ctx.zero, ctx.zero)
            return
        for edge_key in self.cut_edges:
            hit = None
            for t in self.outside:
                tv = surf.tris[t]
                for e in range(3):
                    if frozenset(surf.edge_vertices(t, e)) == edge_key:
                        nbr = surf.adj.get((t, e))
                        if nbr and nbr[0] in self.outside:
                            hit = (t, e, nbr[0])
                            break
                if hit:
                    break
            if not hit:
                continue
            t, e, t2 = hit
            try:
                f1 = self.corridor_frame(t)
                f2 = self.corridor_frame(t2)
            except ValueError:
                continue
            iso = surf.transfer(ctx, t, e)
            direct = f1.compose(iso.inverse())
            if (f2.k - direct.k) % 12 != 0:
                raise ValueError("cut calibration found a rotation")
            # Chain development of t2 via the straight step = direct; its
            # corridor development = f2; a crossing adds direct - f2.
            dx = direct.tx - f2.tx
            dy = direct.ty - f2.ty
            c1 = _centroid(ctx, f1)
            c2 = _centroid(ctx, direct)
            s = _side_sign(self.cut, float(c2[0]) - float(c1[0]),
                           float(c2[1]) - float(c1[1]))
            if s == 0:
                continue
            self.delta = (dx, dy) if s > 0 else (-dx, -dy)
            return
        raise ValueError("no calibratable cut edge found")

    def cut_images(self):
        """Developed images of the cut's two banks."""
        base, d = self.cut
        dx, dy = self.delta
        other = ((base[0] + dx, base[1] + dy), d)
        return (base, d), other


def _centroid(ctx, frame):
    cs = chart.corners(ctx)
    xs = [frame.apply(*c) for c in cs]
    x = (xs[0][0] + xs[1][0] + xs[2][0]) / ctx.of(3)
    y = (xs[0][1] + xs[1][1] + xs[2][1]) / ctx.of(3)
    return (x, y)


def _side_sign(cut, vx, vy):
    (bx, by), (dx, dy) = cut
    return 0 if (c := float(dx) * vy - float(dy) * vx) == 0 else (1 if c > 0 else -1)


def split_tail_at_cut(ctx, tail: TailData, fc: "FlatComplement"):
    """Split an escaped tail at its (at most one) cut crossing.

    The tail's own development continues straight through the crossing;
    only the cut-class bookkeeping changes, so the genuine-meeting test
    can shift by the right number of holonomy offsets.
    """
    if fc.cut is None:
        return [tail]
    images = fc.cut_images()
    best = None
    for base, d in images:
        hit = ray_ray_intersection(ctx, tail.base, tail.dir, base, d)
        if hit is None:
            continue
        t, s = hit
        if t <= 1e-9 or s < -1e-9:
            continue
        if best is None or t < best[0]:
            best = (t, s)
    if best is None:
        return [tail]
    t_cross = best[0]
    s = _side_sign(fc.cut, float(tail.dir[0]), float(tail.dir[1]))
    if s == 0:
        return [tail]
    bx = float(tail.base[0]) + float(tail.dir[0]) * t_cross
    by = float(tail.base[1]) + float(tail.dir[1]) * t_cross
    piece1 = TailData(tail.base, tail.dir, tail.arc0, tail.speed,
                      kcut=tail.kcut, limit=t_cross)
    piece2 = TailData((bx, by), (float(tail.dir[0]), float(tail.dir[1])),
                      tail.arc0 + t_cross * tail.speed, tail.speed,
                      kcut=tail.kcut + s)
    return [piece1, piece2]


def ray_ray_intersection(ctx, p, u, q, v):
    """Parameters (t, s) where p + t u meets q + s v, or None if parallel."""
    den = cross(u[0], u[1], v[0], v[1])
    if abs(float(den)) < 1e-14:
        return None
    wx = q[0] - p[0]
    wy = q[1] - p[1]
    t = float(cross(wx, wy, v[0], v[1])) / float(den)
    s = float(cross(wx, wy, u[0], u[1])) / float(den)
    return t, s


def tails_meet(ctx, a: TailData, b: TailData, holonomy):
    """First genuine meeting of two developed tail pieces, as arc lengths.

    The pieces' developed frames differ by (a.kcut - b.kcut) holonomy
    shifts; parallel pieces meet only if exactly collinear.
    """
    bx, by = holonomy
    shift = float(a.kcut - b.kcut)
    qx = float(b.base[0]) + shift * float(bx)
    qy = float(b.base[1]) + shift * float(by)
    px, py = float(a.base[0]), float(a.base[1])
    ux, uy = float(a.dir[0]), float(a.dir[1])
    vx, vy = float(b.dir[0]), float(b.dir[1])
    den = ux * vy - uy * vx
    wx, wy = qx - px, qy - py
    if abs(den) < 1e-14:
        off = ux * wy - uy * wx
        norm = math.hypot(ux, uy) or 1.0
        if abs(off / norm) > 1e-9:
            return None
        if ux * vx + uy * vy > 0:
            # Same direction, collinear: overlap from the later base on.
            t = max(0.0, (wx * ux + wy * uy) / (ux * ux + uy * uy))
            s = 0.0 if t > 0 else - (wx * vx + wy * vy) / (vx * vx + vy * vy)
            if s < 0:
                s = 0.0
            return (a.arc0 + t * a.speed, b.arc0 + s * b.speed)
        # Opposite directions: they meet if the bases face each other.
        t = (wx * ux + wy * uy) / (ux * ux + uy * uy)
        if t >= 0:
            return (a.arc0 + t * a.speed, b.arc0)
        return None
    t = (wx * vy - wy * vx) / den
    s = (wx * uy - wy * ux) / den
    if t < -1e-9 or s < -1e-9:
        return None
    if a.limit is not None and t > a.limit + 1e-9:
        return None
    if b.limit is not None and s > b.limit + 1e-9:
        return None
    return (a.arc0 + max(t, 0.0) * a.speed, b.arc0 + max(s, 0.0) * b.speed)
