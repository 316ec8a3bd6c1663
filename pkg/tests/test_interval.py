import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fpslopes import interval as ivl
from fpslopes.interval import (
    BOTTOM,
    TOP,
    Interval,
    IntervalDomainError,
    MidpointUndefined,
    point,
)

INF = math.inf

finite_floats = st.floats(
    allow_nan=False, allow_infinity=False, min_value=-1e150, max_value=1e150
)


@st.composite
def intervals(draw, allow_infinite=True):
    lo = draw(finite_floats)
    hi = draw(finite_floats)
    lo, hi = min(lo, hi), max(lo, hi)
    if allow_infinite:
        which = draw(st.integers(0, 9))
        if which == 0:
            lo = -INF
        elif which == 1:
            hi = INF
    return Interval(lo, hi)


def exact(x: float) -> Fraction:
    return Fraction(x)


# --- construction and basic shape -------------------------------------------


def test_invalid_bounds_rejected():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    with pytest.raises(ValueError):
        Interval(math.nan, 1.0)


def test_bottom_is_unique_empty():
    assert BOTTOM.is_bottom
    assert not Interval(1.0, 1.0).is_bottom
    assert ivl.meet(Interval(0.0, 1.0), Interval(2.0, 3.0)) is BOTTOM


# --- arithmetic --------------------------------------------------------------


def test_sub_self_shows_dependency_problem():
    a = Interval(1.0, 2.0)
    assert ivl.sub(a, a) == Interval(-1.0, 1.0)


def test_add_zero_is_identity():
    z = Interval(0.0, 0.0)
    for lo, hi in [(0.5, 1.5), (-3.25, 7.0), (1e-300, 2e-300)]:
        assert ivl.add(z, Interval(lo, hi)) == Interval(lo, hi)


def test_mul_endpoint_products():
    # brute-force oracle: min/max over the four exact endpoint products
    a = Interval(-1.0, 2.0)
    b = Interval(3.0, 4.0)
    prods = [exact(x) * exact(y) for x in (a.lo, a.hi) for y in (b.lo, b.hi)]
    assert min(prods) == -4 and max(prods) == 8
    assert ivl.mul(a, b) == Interval(-4.0, 8.0)


def test_bottom_propagates():
    a = Interval(1.0, 2.0)
    for op in (ivl.add, ivl.sub, ivl.mul):
        assert op(a, BOTTOM).is_bottom
        assert op(BOTTOM, a).is_bottom
    assert ivl.div(BOTTOM, a).is_bottom
    assert ivl.sqrt(BOTTOM).is_bottom


def test_div_by_zero_interval_is_domain_error():
    with pytest.raises(IntervalDomainError):
        ivl.div(Interval(1.0, 2.0), Interval(-1.0, 1.0))
    with pytest.raises(IntervalDomainError):
        ivl.div(Interval(1.0, 2.0), Interval(0.0, 0.0))


def test_sqrt_negative_is_domain_error():
    with pytest.raises(IntervalDomainError):
        ivl.sqrt(Interval(-1.0, 4.0))


@given(intervals(), intervals(), st.floats(0, 1), st.floats(0, 1))
def test_add_sub_mul_soundness(a, b, tx, ty):
    """Exact rational arithmetic on member points stays inside the result."""
    def pick(iv, t):
        if math.isinf(iv.lo) or math.isinf(iv.hi):
            return iv.lo if not math.isinf(iv.lo) else iv.hi
        return iv.lo + t * (iv.hi - iv.lo)

    x = pick(a, tx)
    y = pick(b, ty)
    if math.isinf(x) or math.isinf(y):
        return
    if not (a.lo <= x <= a.hi and b.lo <= y <= b.hi):
        return
    xq, yq = exact(x), exact(y)

    def inside(r, val):
        assert math.isinf(r.lo) or exact(r.lo) <= val
        assert math.isinf(r.hi) or val <= exact(r.hi)

    inside(ivl.add(a, b), xq + yq)
    inside(ivl.sub(a, b), xq - yq)
    inside(ivl.mul(a, b), xq * yq)


@given(intervals(allow_infinite=False), intervals(allow_infinite=False), st.floats(0, 1), st.floats(0, 1))
def test_div_sqrt_soundness(a, b, tx, ty):
    x = a.lo + tx * (a.hi - a.lo)
    y = b.lo + ty * (b.hi - b.lo)
    if not (b.lo > 0 or b.hi < 0):
        return
    r = ivl.div(a, b)
    got = exact(x) / exact(y)
    assert exact(r.lo) <= got <= exact(r.hi)
    if a.lo >= 0:
        rs = ivl.sqrt(a)
        # compare by squaring to stay in rationals
        assert exact(rs.lo) ** 2 <= exact(x)
        assert exact(x) <= exact(rs.hi) ** 2 or math.isinf(rs.hi)


def test_outward_rounding_is_tight_for_exact_ops():
    # exactly representable results are not widened
    assert ivl.add(point(0.25), point(0.5)) == point(0.75)
    assert ivl.mul(point(3.0), point(4.0)) == point(12.0)
    assert ivl.div(point(1.0), point(4.0)) == point(0.25)
    assert ivl.sqrt(point(4.0)) == point(2.0)
    # and inexact ones are widened by exactly one ulp per bound
    r = ivl.add(point(0.1), point(0.2))
    s = 0.1 + 0.2
    assert r == Interval(math.nextafter(s, -INF), math.nextafter(s, INF))


# --- lattice -----------------------------------------------------------------


def test_meet_disjoint_is_bottom():
    assert ivl.meet(Interval(0.0, 1.0), Interval(2.0, 3.0)).is_bottom


def test_join_is_hull():
    assert ivl.join(Interval(0.0, 1.0), Interval(2.0, 3.0)) == Interval(0.0, 3.0)


def test_leq_is_containment():
    assert ivl.leq(Interval(1.0, 2.0), Interval(0.0, 3.0))
    assert not ivl.leq(Interval(0.0, 3.0), Interval(1.0, 2.0))
    assert ivl.leq(BOTTOM, Interval(0.0, 0.0))


@given(intervals(), intervals(), intervals())
def test_lattice_laws(a, b, c):
    join, meet, leq = ivl.join, ivl.meet, ivl.leq
    assert join(a, b) == join(b, a)
    assert meet(a, b) == meet(b, a)
    assert join(join(a, b), c) == join(a, join(b, c))
    assert meet(meet(a, b), c) == meet(a, meet(b, c))
    assert join(a, meet(a, b)) == a
    assert meet(a, join(a, b)) == a
    # join is the least upper bound
    assert leq(a, join(a, b)) and leq(b, join(a, b))
    if leq(a, c) and leq(b, c):
        assert leq(join(a, b), c)
    # partial order
    assert leq(a, a)
    if leq(a, b) and leq(b, a):
        assert a == b
    if leq(a, b) and leq(b, c):
        assert leq(a, c)


# --- widening ----------------------------------------------------------------

THRESHOLDS = (-INF, -4.0, -1.0, 0.0, 1.0, 4.0, 64.0, INF)


def test_widen_stable_unchanged():
    a = Interval(0.0, 1.0)
    assert ivl.widen(a, a, THRESHOLDS) == a
    assert ivl.widen(a, Interval(0.25, 0.75), THRESHOLDS) == a


def test_widen_jumps_to_thresholds():
    # derived by enumerating the threshold list
    assert ivl.widen(Interval(0.0, 1.0), Interval(0.0, 2.0), THRESHOLDS) == Interval(0.0, 4.0)
    assert ivl.widen(Interval(0.0, 1.0), Interval(-1.0, 1.0), THRESHOLDS) == Interval(-1.0, 1.0)
    assert ivl.widen(Interval(0.0, 1.0), Interval(-2.5, 100.0), THRESHOLDS) == Interval(-4.0, INF)
    assert ivl.widen(BOTTOM, Interval(0.0, 2.0), THRESHOLDS) == Interval(0.0, 2.0)


def test_widening_chains_are_finite():
    rng = random.Random(11)
    bound = 2 * len(THRESHOLDS) + 2
    for _ in range(300):
        acc = Interval(rng.uniform(-5, 5), rng.uniform(5, 10))
        steps = 0
        while True:
            nxt = Interval(rng.uniform(-1e6, 0), rng.uniform(0, 1e6))
            w = ivl.widen(acc, ivl.join(acc, nxt), THRESHOLDS)
            steps += 1
            if w == acc:
                break
            acc = w
            assert steps <= bound, "widening chain exceeded its bound"


# --- midpoint ----------------------------------------------------------------


def test_mid_examples():
    assert ivl.mid(Interval(-1.0, 0.5)) == -0.25
    assert ivl.mid(Interval(-0.5, 0.5)) == 0.0
    assert ivl.mid(point(3.7)) == 3.7


def test_mid_undefined_for_unbounded():
    with pytest.raises(MidpointUndefined):
        ivl.mid(Interval(0.0, INF))
    with pytest.raises(MidpointUndefined):
        ivl.mid(BOTTOM)


def test_mid_fallback_rules():
    assert ivl.mid_or_fallback(Interval(-1.0, INF)) == 0.0
    assert ivl.mid_or_fallback(Interval(2.0, INF)) == 2.0
    assert ivl.mid_or_fallback(Interval(-INF, -3.0)) == -3.0
    assert ivl.mid_or_fallback(TOP) == 0.0


@given(intervals(allow_infinite=False))
def test_mid_containment(a):
    m = ivl.mid(a)
    assert a.lo <= m <= a.hi


def test_magnitude():
    assert ivl.magnitude(Interval(-2.0, 3.0)) == (0.0, 3.0)
    assert ivl.magnitude(Interval(1.0, 3.0)) == (1.0, 3.0)
    assert ivl.magnitude(Interval(-4.0, -2.0)) == (2.0, 4.0)
