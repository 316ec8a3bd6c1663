import math
import struct
import sys
from fractions import Fraction

from fpslopes import interval as ivl
from fpslopes.profiles import (
    DOUBLE,
    DOUBLE_ROUNDING,
    EXTENDED,
    PROFILES,
    SINGLE,
    get_profile,
    next_down_binary32,
    next_up_binary32,
    round_binary32,
)

INF = math.inf


def test_single_constants():
    assert SINGLE.p == 24 and SINGLE.e_min == -126
    assert SINGLE.u == 2.0 ** -24
    assert SINGLE.sigma == 2.0 ** -149
    assert SINGLE.Sigma == (2.0 - 2.0 ** -23) * 2.0 ** 127
    assert SINGLE.Sigma == float(struct.unpack("<f", struct.pack("<I", 0x7F7FFFFF))[0])


def test_double_constants():
    assert DOUBLE.u == 2.0 ** -53
    assert DOUBLE.sigma == 5e-324
    assert DOUBLE.Sigma == sys.float_info.max


def test_extended_constants():
    assert EXTENDED.p == 64
    assert EXTENDED.u == 2.0 ** -64
    # sigma = 2**-16446 is far below binary64; the stored float rounds up
    assert (EXTENDED.sigma_mant, EXTENDED.sigma_exp) == (1, -16446)
    assert EXTENDED.sigma == 5e-324
    assert math.isinf(EXTENDED.Sigma)
    assert EXTENDED.overflow_cap == sys.float_info.max


def test_double_rounding_constants():
    p = DOUBLE_ROUNDING
    assert p.u == math.ldexp(float(2 ** 11 + 2), -64)
    assert (p.sigma_mant, p.sigma_exp) == (2 ** 11 + 1, -1086)
    # exact sigma is between 0 and the smallest binary64; stored rounded up
    assert p.sigma == 5e-324
    assert Fraction(p.sigma) >= Fraction(2 ** 11 + 1) / Fraction(2) ** 1086
    assert p.Sigma == sys.float_info.max


def test_flush_thresholds_are_floor_of_half_sigma():
    # single: sigma/2 is representable
    assert SINGLE.flush_le == 2.0 ** -150
    assert SINGLE.flush_lt == ivl.next_down(2.0 ** -150)
    # double: sigma/2 = 2**-1075 is not; the largest float below it is 0
    assert DOUBLE.flush_le == 0.0
    assert DOUBLE.flush_lt == 0.0
    assert EXTENDED.flush_le == 0.0


def test_absolute_band_covers_half_sigma():
    for prof in PROFILES.values():
        band = prof.absolute_band
        half = Fraction(prof.sigma_mant) / (
            Fraction(2) ** -(prof.sigma_exp if prof.sigma_exp is not None else prof.e_min - prof.p + 1)
        )
        half = half / 2
        assert Fraction(band.hi) >= half
        assert Fraction(band.lo) <= -half
        assert band.lo == -band.hi


def test_inflation_is_outward():
    for prof in PROFILES.values():
        infl = prof.inflation
        u = Fraction(prof.u)
        assert Fraction(infl.lo) <= 1 - u
        assert Fraction(infl.hi) >= 1 + u


def test_round_binary32_basics():
    assert round_binary32(0.1) == struct.unpack("<f", struct.pack("<f", 0.1))[0]
    assert round_binary32(1e39) == INF
    assert round_binary32(-1e39) == -INF
    assert round_binary32(2.0 ** -150) == 0.0  # tie to even at half the min subnormal
    assert round_binary32(1.5 * 2.0 ** -150) == 2.0 ** -149
    assert round_binary32(SINGLE.Sigma) == SINGLE.Sigma


def test_binary32_grid_stepping():
    tiny = 2.0 ** -149
    assert next_up_binary32(0.0) == tiny
    assert next_down_binary32(0.0) == -tiny
    assert next_up_binary32(tiny) == 2.0 * tiny
    assert next_down_binary32(tiny) == 0.0
    assert next_up_binary32(1.0) == 1.0 + 2.0 ** -23
    assert next_down_binary32(1.0) == 1.0 - 2.0 ** -24
    assert next_up_binary32(SINGLE.Sigma) == INF
    assert next_down_binary32(INF) == SINGLE.Sigma


def test_widening_thresholds_shape():
    for prof in PROFILES.values():
        ts = prof.widening_thresholds
        assert ts == tuple(sorted(ts))
        assert ts[0] == -INF and ts[-1] == INF
        assert 0.0 in ts and 1.0 in ts and -1.0 in ts
        assert prof.sigma in ts


def test_get_profile():
    assert get_profile("single") is SINGLE
    try:
        get_profile("half")
    except KeyError as e:
        assert "half" in str(e)
    else:
        raise AssertionError("expected KeyError")


def test_round_value_follows_grid():
    assert SINGLE.round_value(0.7) == round_binary32(0.7)
    assert DOUBLE.round_value(0.7) == 0.7
    assert EXTENDED.round_value(0.7) == 0.7
