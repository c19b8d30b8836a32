"""Scalar kernel shared by every geometric routine.

Two number modes, fixed per run:

* float mode: ordinary doubles, all equality decisions made against a
  configurable tolerance ``eps`` (edge-length units).
* exact mode: elements of Q(sqrt 3), kept as a pair of Fractions.  This
  field is closed under the chart transfer isometries and under rotation
  by any multiple of 30 degrees, so the whole engine can run exactly.
"""

from __future__ import annotations

import math
from fractions import Fraction

SQRT3 = math.sqrt(3.0)


class Q3:
    """Exact scalar a + b*sqrt(3) with rational a, b."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = a if isinstance(a, Fraction) else Fraction(a)
        self.b = b if isinstance(b, Fraction) else Fraction(b)

    def __repr__(self):
        return f"Q3({self.a}, {self.b})"

    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Q3(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Q3(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Q3(o.a - self.a, o.b - self.b)

    def __mul__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Q3(self.a * o.a + 3 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        d = o.a * o.a - 3 * o.b * o.b
        if d == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 3)")
        na = (self.a * o.a - 3 * self.b * o.b) / d
        nb = (self.b * o.a - self.a * o.b) / d
        return Q3(na, nb)

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o.__truediv__(self)

    def __neg__(self):
        return Q3(-self.a, -self.b)

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Q3(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(3)."""
        a, b = self.a, self.b
        if a == 0 and b == 0:
            return 0
        if a >= 0 and b >= 0:
            return 1
        if a <= 0 and b <= 0:
            return -1
        # Mixed signs: compare a^2 with 3 b^2.
        d = a * a - 3 * b * b
        if a > 0:  # b < 0
            return 1 if d > 0 else (-1 if d < 0 else 0)
        # a < 0, b > 0
        return -1 if d > 0 else (1 if d < 0 else 0)

    def __eq__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __lt__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __le__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() <= 0

    def __gt__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() > 0

    def __ge__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() >= 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __float__(self):
        return float(self.a) + float(self.b) * SQRT3

    def is_rational(self) -> bool:
        return self.b == 0


def _coerce(x):
    if isinstance(x, Q3):
        return x
    if isinstance(x, (int, Fraction)):
        return Q3(x)
    return None


def _frac_sqrt(x: Fraction):
    """Exact square root of a nonnegative rational, or None."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def q3_sqrt(x: Q3):
    """Exact square root of x in Q(sqrt 3), or None when not representable.

    Solves (u + v sqrt 3)^2 = a + b sqrt 3, i.e. u^2 + 3 v^2 = a, 2uv = b.
    """
    if x.sign() < 0:
        return None
    a, b = x.a, x.b
    if b == 0:
        u = _frac_sqrt(a)
        if u is not None:
            return Q3(u, 0)
        v = _frac_sqrt(a / 3)
        if v is not None:
            return Q3(0, v)
        return None
    disc = _frac_sqrt(a * a - 3 * b * b)
    if disc is None:
        return None
    for u2 in ((a + disc) / 2, (a - disc) / 2):
        u = _frac_sqrt(u2)
        if u is not None and u != 0:
            v = b / (2 * u)
            if u * u + 3 * v * v == a:
                r = Q3(u, v)
                return r if r.sign() >= 0 else -r
    return None


# cos/sin of 30 k degrees, exact, index k mod 12.
_HALF = Fraction(1, 2)
_COS30 = [
    Q3(1), Q3(0, _HALF), Q3(_HALF), Q3(0), Q3(-_HALF), Q3(0, -_HALF),
    Q3(-1), Q3(0, -_HALF), Q3(-_HALF), Q3(0), Q3(_HALF), Q3(0, _HALF),
]
_SIN30 = [
    Q3(0), Q3(_HALF), Q3(0, _HALF), Q3(1), Q3(0, _HALF), Q3(_HALF),
    Q3(0), Q3(-_HALF), Q3(0, -_HALF), Q3(-1), Q3(0, -_HALF), Q3(-_HALF),
]


class Scalars:
    """Number-mode context: constructors, constants and comparisons.

    All geometric code funnels its equality and sign decisions through
    this object so that a single run is uniformly tolerant (float mode)
    or uniformly exact (exact mode).
    """

    def __init__(self, mode: str = "float", eps: float = 1e-9):
        if mode not in ("float", "exact"):
            raise ValueError(f"unknown number mode {mode!r}")
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.mode = mode
        self.eps = eps
        self.exact = mode == "exact"
        if self.exact:
            self.zero = Q3(0)
            self.one = Q3(1)
            self.half = Q3(_HALF)
            self.sqrt3 = Q3(0, 1)
        else:
            self.zero = 0.0
            self.one = 1.0
            self.half = 0.5
            self.sqrt3 = SQRT3

    def __repr__(self):
        return f"Scalars(mode={self.mode!r}, eps={self.eps!r})"

    def of(self, x):
        """Convert an int, Fraction, float or Q3 into a run scalar."""
        if self.exact:
            if isinstance(x, Q3):
                return x
            if isinstance(x, (int, Fraction)):
                return Q3(x)
            if isinstance(x, float):
                if x != int(x):
                    raise TypeError(f"non-integral float {x} not exact; pass a Fraction")
                return Q3(int(x))
            raise TypeError(f"cannot make exact scalar from {type(x).__name__}")
        if isinstance(x, Q3):
            return float(x)
        return float(x)

    def frac(self, num: int, den: int = 1):
        if self.exact:
            return Q3(Fraction(num, den))
        return num / den

    def to_float(self, x) -> float:
        return float(x)

    def sign(self, x) -> int:
        """Sign with tolerance snap in float mode, exact otherwise."""
        if self.exact:
            return x.sign() if isinstance(x, Q3) else (0 if x == 0 else (1 if x > 0 else -1))
        if abs(x) <= self.eps:
            return 0
        return 1 if x > 0 else -1

    def is_zero(self, x) -> bool:
        return self.sign(x) == 0

    def eq(self, x, y) -> bool:
        return self.sign(x - y) == 0

    def lt(self, x, y) -> bool:
        return self.sign(x - y) < 0

    def le(self, x, y) -> bool:
        return self.sign(x - y) <= 0

    def cos_sin_deg(self, deg: int):
        """Exact (cos, sin) of an angle that is a multiple of 30 degrees."""
        if deg % 30 != 0:
            raise ValueError(f"{deg} is not a multiple of 30")
        k = (deg // 30) % 12
        if self.exact:
            return _COS30[k], _SIN30[k]
        return float(_COS30[k]), float(_SIN30[k])

    def direction(self, theta_deg: float):
        """Unit direction vector for an angle in degrees.

        Exact mode accepts only multiples of 30 degrees (other exact
        directions must be supplied as vectors).
        """
        if self.exact:
            k = round(theta_deg)
            if abs(theta_deg - k) > 1e-12 or k % 30 != 0:
                raise ValueError(
                    f"exact mode needs a 30-degree multiple, got {theta_deg}")
            return self.cos_sin_deg(int(k))
        r = math.radians(theta_deg)
        return math.cos(r), math.sin(r)

    def try_unit(self, dx, dy):
        """Normalize (dx, dy) when the norm is exactly representable.

        Returns (ux, uy, was_normalized).  Float mode always normalizes;
        exact mode keeps the vector unnormalized when |d| leaves Q(sqrt 3).
        """
        if not self.exact:
            n = math.hypot(dx, dy)
            if n == 0.0:
                raise ZeroDivisionError("null direction")
            return dx / n, dy / n, True
        n2 = dx * dx + dy * dy
        if n2.sign() == 0:
            raise ZeroDivisionError("null direction")
        r = q3_sqrt(n2)
        if r is None:
            return dx, dy, False
        return dx / r, dy / r, True
