"""Sound floating-point interval arithmetic with directed (outward) rounding.

Endpoints are binary64 floats.  Every arithmetic operation computes each
endpoint in round-to-nearest and then nudges it one ulp outward unless the
endpoint is provably exact, so results always enclose the exact real image
set without touching the process-global rounding mode.  Exactness of an
endpoint operation is decided with integer significand arithmetic, which has
no edge cases near subnormals or overflow.

Intervals are immutable and all functions here are pure, so values can be
shared freely across threads.
"""

from __future__ import annotations

import math

INF = math.inf
MAX_FLOAT = math.ldexp(2.0 - 2.0 ** -52, 1023)
_TWO53 = 9007199254740992.0  # 2**53
_nextafter = math.nextafter


class IntervalDomainError(ValueError):
    """Operand outside an operation's domain (division by an interval
    containing zero, square root of a negative interval).  Distinct from
    Bottom propagation: callers decide whether to abort or degrade."""


class MidpointUndefined(ValueError):
    """mid() of an interval with an infinite bound."""


class Interval:
    """Closed interval [lo, hi] of reals with float64 bounds.

    ``lo <= hi`` always holds and bounds are never NaN; the empty interval
    is the distinguished BOTTOM singleton, never an inverted pair.
    Instances are treated as immutable: nothing in this package mutates one
    after construction, which keeps sharing across threads safe.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: float):
        if not lo <= hi:  # also rejects NaN bounds
            raise ValueError(f"invalid interval bounds [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @property
    def is_bottom(self) -> bool:
        return self.lo > self.hi

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def width(self) -> float:
        if self.lo > self.hi:
            return 0.0
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __eq__(self, other) -> bool:
        if isinstance(other, Interval):
            return self.lo == other.lo and self.hi == other.hi
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        if self.lo > self.hi:
            return "Interval.BOTTOM"
        return f"[{self.lo!r}, {self.hi!r}]"


# The unique empty interval; bypasses __init__ validation on purpose.
BOTTOM: Interval = object.__new__(Interval)
object.__setattr__(BOTTOM, "lo", INF)
object.__setattr__(BOTTOM, "hi", -INF)

TOP = Interval(-INF, INF)
ZERO = Interval(0.0, 0.0)
ONE = Interval(1.0, 1.0)


def point(x: float) -> Interval:
    return Interval(x, x)


def next_up(x: float) -> float:
    if math.isinf(x) or x != x:
        return x
    return math.nextafter(x, INF)


def next_down(x: float) -> float:
    if math.isinf(x) or x != x:
        return x
    return math.nextafter(x, -INF)


def _int_frexp(x: float) -> tuple[int, int]:
    """Exact decomposition x = m * 2**e with integer m."""
    fm, fe = math.frexp(x)
    return int(fm * _TWO53), fe - 53


_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitting constant


def _mul_exact(x: float, y: float, p: float) -> bool:
    """Whether the finite nonzero product x*y equals p exactly."""
    ax = abs(x)
    ay = abs(y)
    # Dekker's two-product computes the error term exactly away from the
    # overflow/subnormal edges; integer significands handle the rest
    if 1e-291 < abs(p) and ax < 1e291 and ay < 1e291:
        cx = _SPLIT * x
        xh = cx - (cx - x)
        xl = x - xh
        cy = _SPLIT * y
        yh = cy - (cy - y)
        yl = y - yh
        return ((xh * yh - p) + xh * yl + xl * yh) + xl * yl == 0.0
    mx, ex = _int_frexp(x)
    my, ey = _int_frexp(y)
    mp, ep = _int_frexp(p)
    m = mx * my
    e = ex + ey
    if e >= ep:
        return (m << (e - ep)) == mp
    return m == (mp << (ep - e))


def _sum_rounded(a: float, b: float) -> tuple[float, bool]:
    """Round-to-nearest sum and whether it is exact."""
    s = a + b
    if s != s:  # inf + -inf
        return s, False
    if math.isinf(a) or math.isinf(b):
        return s, True
    if math.isinf(s):  # finite operands overflowed
        return s, False
    bv = s - a
    return s, ((a - (s - bv)) + (b - bv)) == 0.0


_MIN_NORMAL = 2.2250738585072014e-308


def _prod_rounded(x: float, y: float) -> tuple[float, bool]:
    p = x * y
    if p != p:  # 0 * inf
        return p, False
    if math.isinf(x) or math.isinf(y):
        return p, True
    if x == 0.0 or y == 0.0:
        return p, True
    if math.isinf(p) or p == 0.0:  # overflow or underflow to zero
        return p, False
    # power-of-two factors only shift the exponent; exact unless subnormal
    if abs(p) >= _MIN_NORMAL:
        if math.frexp(x)[0] in (0.5, -0.5) or math.frexp(y)[0] in (0.5, -0.5):
            return p, True
    if p / y != x:  # an exact product divides back exactly; cheap disproof
        return p, False
    return p, _mul_exact(x, y, p)


def _quot_rounded(x: float, y: float) -> tuple[float, bool]:
    q = x / y
    if q != q:  # inf / inf
        return q, False
    if math.isinf(x) or math.isinf(y):
        return q, True
    if x == 0.0:
        return q, True
    if math.isinf(q) or q == 0.0:
        return q, False
    if q * y != x:  # an exact quotient multiplies back exactly
        return q, False
    # x / y is exact iff q * y == x exactly
    mq, eq = _int_frexp(q)
    my, ey = _int_frexp(y)
    mx, ex = _int_frexp(x)
    m = mq * my
    e = eq + ey
    if e >= ex:
        return q, (m << (e - ex)) == mx
    return q, m == (mx << (ex - e))


def _root_rounded(x: float) -> tuple[float, bool]:
    r = math.sqrt(x)
    if math.isinf(r) or r == 0.0:
        return r, True  # sqrt(inf), sqrt(0) exact
    if r * r != x:  # an exact root squares back exactly
        return r, False
    mr, er = _int_frexp(r)
    mx, ex = _int_frexp(x)
    m = mr * mr
    e = er + er
    if e >= ex:
        return r, (m << (e - ex)) == mx
    return r, m == (mx << (ex - e))


def _down(value: float, exact: bool) -> float:
    if value != value:
        return -INF
    if exact:
        return value
    if value == INF:
        return MAX_FLOAT
    if value == -INF:
        return -INF
    return math.nextafter(value, -INF)


def _up(value: float, exact: bool) -> float:
    if value != value:
        return INF
    if exact:
        return value
    if value == -INF:
        return -MAX_FLOAT
    if value == INF:
        return INF
    return math.nextafter(value, INF)


def _down_in(value: float, exact: bool) -> float:
    """Inward (upward) rounding of a lower bound, for under-approximation."""
    if value != value:
        return INF  # forces emptiness
    if exact or math.isinf(value):
        return value
    return math.nextafter(value, INF)


def _up_in(value: float, exact: bool) -> float:
    if value != value:
        return -INF
    if exact or math.isinf(value):
        return value
    return math.nextafter(value, -INF)


def _mk(lo: float, hi: float) -> Interval:
    if lo <= hi:
        return Interval(lo, hi)
    return BOTTOM


def _add_outward(alo: float, ahi: float, blo: float, bhi: float) -> Interval:
    # inlined TwoSum-based outward rounding; this is the hottest kernel
    s = alo + blo
    if s != s:
        lo = -INF
    elif s == -INF:
        lo = -INF
    elif s == INF:
        lo = INF if (alo == INF or blo == INF) else MAX_FLOAT
    else:
        bv = s - alo
        lo = s if ((alo - (s - bv)) + (blo - bv)) == 0.0 else _nextafter(s, -INF)
    s = ahi + bhi
    if s != s:
        hi = INF
    elif s == INF:
        hi = INF
    elif s == -INF:
        hi = -INF if (ahi == -INF or bhi == -INF) else -MAX_FLOAT
    else:
        bv = s - ahi
        hi = s if ((ahi - (s - bv)) + (bhi - bv)) == 0.0 else _nextafter(s, INF)
    return Interval(lo, hi)


def add(a: Interval, b: Interval, *, inward: bool = False) -> Interval:
    if a.lo > a.hi or b.lo > b.hi:
        return BOTTOM
    if inward:
        lv, le = _sum_rounded(a.lo, b.lo)
        hv, he = _sum_rounded(a.hi, b.hi)
        return _mk(_down_in(lv, le), _up_in(hv, he))
    return _add_outward(a.lo, a.hi, b.lo, b.hi)


def sub(a: Interval, b: Interval, *, inward: bool = False) -> Interval:
    if a.lo > a.hi or b.lo > b.hi:
        return BOTTOM
    if inward:
        lv, le = _sum_rounded(a.lo, -b.hi)
        hv, he = _sum_rounded(a.hi, -b.lo)
        return _mk(_down_in(lv, le), _up_in(hv, he))
    return _add_outward(a.lo, a.hi, -b.hi, -b.lo)


def neg(a: Interval) -> Interval:
    if a.is_bottom:
        return BOTTOM
    return Interval(-a.hi, -a.lo)


def _mul_corners(a: Interval, b: Interval) -> tuple[tuple[float, float], tuple[float, float]]:
    """Endpoint pairs whose products bound a*b, by sign classification."""
    if a.lo >= 0.0:
        if b.lo >= 0.0:
            return ((a.lo, b.lo),), ((a.hi, b.hi),)
        if b.hi <= 0.0:
            return ((a.hi, b.lo),), ((a.lo, b.hi),)
        return ((a.hi, b.lo),), ((a.hi, b.hi),)
    if a.hi <= 0.0:
        if b.lo >= 0.0:
            return ((a.lo, b.hi),), ((a.hi, b.lo),)
        if b.hi <= 0.0:
            return ((a.hi, b.hi),), ((a.lo, b.lo),)
        return ((a.lo, b.hi),), ((a.lo, b.lo),)
    if b.lo >= 0.0:
        return ((a.lo, b.hi),), ((a.hi, b.hi),)
    if b.hi <= 0.0:
        return ((a.hi, b.lo),), ((a.lo, b.lo),)
    return ((a.lo, b.hi), (a.hi, b.lo)), ((a.lo, b.lo), (a.hi, b.hi))


def mul(a: Interval, b: Interval, *, inward: bool = False) -> Interval:
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    # a concrete 0 * inf is possible: NaN, so the result is unconstrained
    if (a.lo <= 0.0 <= a.hi and (math.isinf(b.lo) or math.isinf(b.hi))) or (
        b.lo <= 0.0 <= b.hi and (math.isinf(a.lo) or math.isinf(a.hi))
    ):
        return BOTTOM if inward else TOP
    lo_pairs, hi_pairs = _mul_corners(a, b)
    lo = INF
    hi = -INF
    for x, y in lo_pairs:
        p, e = _prod_rounded(x, y)
        if p != p:  # 0 * inf corner: a NaN is concretely possible
            return BOTTOM if inward else TOP
        d = _down_in(p, e) if inward else _down(p, e)
        if d < lo:
            lo = d
    for x, y in hi_pairs:
        p, e = _prod_rounded(x, y)
        if p != p:
            return BOTTOM if inward else TOP
        u = _up_in(p, e) if inward else _up(p, e)
        if u > hi:
            hi = u
    if inward:
        return _mk(lo, hi)
    return Interval(lo, hi)


def div(a: Interval, b: Interval) -> Interval:
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    if b.lo <= 0.0 <= b.hi:
        raise IntervalDomainError(f"division by interval containing zero: {b}")
    # inf / inf is concretely possible: NaN, so the result is unconstrained
    if (a.lo == -INF or a.hi == INF) and (b.lo == -INF or b.hi == INF):
        return TOP
    if b.lo > 0.0:
        lo_pair = (a.lo, b.lo if a.lo < 0.0 else b.hi)
        hi_pair = (a.hi, b.lo if a.hi > 0.0 else b.hi)
    else:
        lo_pair = (a.hi, b.hi if a.hi > 0.0 else b.lo)
        hi_pair = (a.lo, b.hi if a.lo < 0.0 else b.lo)
    q, e = _quot_rounded(*lo_pair)
    lo = _down(q, e)
    q, e = _quot_rounded(*hi_pair)
    hi = _up(q, e)
    return Interval(lo, hi)


def sqrt(a: Interval) -> Interval:
    if a.is_bottom:
        return BOTTOM
    if a.lo < 0.0:
        raise IntervalDomainError(f"square root of interval below zero: {a}")
    lv, le = _root_rounded(a.lo)
    hv, he = _root_rounded(a.hi)
    return Interval(max(_down(lv, le), 0.0), _up(hv, he))


def join(a: Interval, b: Interval) -> Interval:
    """Least upper bound: the convex hull."""
    if a.is_bottom:
        return b
    if b.is_bottom:
        return a
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi))


def meet(a: Interval, b: Interval) -> Interval:
    """Greatest lower bound: the intersection, BOTTOM when disjoint."""
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    lo = max(a.lo, b.lo)
    hi = min(a.hi, b.hi)
    return _mk(lo, hi)


def leq(a: Interval, b: Interval) -> bool:
    """Containment order: a included in b."""
    if a.is_bottom:
        return True
    if b.is_bottom:
        return False
    return b.lo <= a.lo and a.hi <= b.hi


def lt(a: Interval, b: Interval) -> bool:
    """Strict containment."""
    return leq(a, b) and a != b


def widen(prev: Interval, nxt: Interval, thresholds: tuple[float, ...]) -> Interval:
    """Threshold widening: unstable bounds jump to the next threshold.

    ``thresholds`` must be sorted ascending and end in -inf/+inf so chains
    are finite.  Stable bounds are kept unchanged.
    """
    if prev.is_bottom:
        return nxt
    if nxt.is_bottom:
        return prev
    lo = prev.lo
    if nxt.lo < prev.lo:
        lo = -INF
        for t in reversed(thresholds):
            if t <= nxt.lo:
                lo = t
                break
    hi = prev.hi
    if nxt.hi > prev.hi:
        hi = INF
        for t in thresholds:
            if t >= nxt.hi:
                hi = t
                break
    return Interval(lo, hi)


def mid(a: Interval) -> float:
    """Center ``lo + 0.5 * (hi - lo)``, always inside the interval.

    Raises MidpointUndefined for infinite bounds; use mid_or_fallback when
    a total function is needed.
    """
    if a.is_bottom:
        raise MidpointUndefined("midpoint of empty interval")
    if math.isinf(a.lo) or math.isinf(a.hi):
        raise MidpointUndefined(f"midpoint of unbounded interval {a}")
    m = a.lo + 0.5 * (a.hi - a.lo)
    if m < a.lo:
        return a.lo
    if m > a.hi:
        return a.hi
    return m


def mid_or_fallback(a: Interval) -> float:
    """mid() extended to unbounded intervals: 0 when the interval contains
    zero, otherwise the finite bound."""
    try:
        return mid(a)
    except MidpointUndefined:
        if a.is_bottom:
            raise
        if a.lo <= 0.0 <= a.hi:
            return 0.0
        if not math.isinf(a.lo):
            return a.lo
        if not math.isinf(a.hi):
            return a.hi
        return 0.0


def magnitude(a: Interval) -> tuple[float, float]:
    """(min, max) of |x| over the interval."""
    if a.lo <= 0.0 <= a.hi:
        lo = 0.0
    else:
        lo = min(abs(a.lo), abs(a.hi))
    return lo, max(abs(a.lo), abs(a.hi))
