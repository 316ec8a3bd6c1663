"""Precision profiles: the constants that select which floating-point
semantics the abstract domain models.

A profile carries the significand width p and minimum exponent e_min of the
modelled format plus the derived quantities used by the domain:

* ``u``      relative rounding error unit, 2**(1-p)/2
* ``sigma``  smallest positive subnormal, 2**(e_min - p + 1)
* ``Sigma``  largest finite value, (2 - 2**(1-p)) * 2**e_max

The ``extended`` profile models 80-bit x87 registers and the
``double_rounding`` profile models extended-precision computation stored
back to binary64, with the published constants u = (2**11+2)*2**-64 and
sigma = (2**11+1)*2**-1086.

sigma and Sigma may not be binary64-representable (extended precision's
sigma underflows, its Sigma overflows).  All threshold comparisons in the
domain are phrased against pre-rounded binary64 stand-ins chosen in the
sound direction, stored here as ``flush_le`` / ``flush_lt`` / ``overflow_cap``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from functools import cached_property

from . import interval as ivl
from .interval import Interval

INF = math.inf

_F32_OVERFLOW = math.ldexp(2.0 - 2.0 ** -24, 127)  # nearest rounds to inf beyond this
_F32_MAX = math.ldexp(2.0 - 2.0 ** -23, 127)
_F32_TINY = math.ldexp(1.0, -149)


def round_binary32(x: float) -> float:
    """Correctly rounded (nearest, ties to even) binary32 value of x."""
    if x != x:
        return x
    if abs(x) >= _F32_OVERFLOW:
        return math.copysign(INF, x)
    return struct.unpack("<f", struct.pack("<f", x))[0]


def _f32_bits(x: float) -> int:
    return struct.unpack("<I", struct.pack("<f", x))[0]


def _f32_from_bits(b: int) -> float:
    return struct.unpack("<f", struct.pack("<I", b))[0]


def next_up_binary32(x: float) -> float:
    """Next binary32 value toward +inf; x must be a binary32 value."""
    if x != x or x == INF:
        return x
    if x == 0.0:
        return _F32_TINY
    b = _f32_bits(x)
    b = b - 1 if b >> 31 else b + 1
    return _f32_from_bits(b)


def next_down_binary32(x: float) -> float:
    if x != x or x == -INF:
        return x
    if x == 0.0:
        return -_F32_TINY
    b = _f32_bits(x)
    b = b + 1 if b >> 31 else b - 1
    return _f32_from_bits(b)


@dataclass(frozen=True)
class PrecisionProfile:
    name: str
    p: int
    e_min: int
    # binary grid the format's values live on, when binary64 can host it
    grid: str | None = None  # "binary32" | "binary64" | None
    u_override: float | None = None
    sigma_mant: int = 1  # sigma = sigma_mant * 2**sigma_exp
    sigma_exp: int | None = None

    @cached_property
    def e_max(self) -> int:
        return -self.e_min + 1

    @cached_property
    def u(self) -> float:
        if self.u_override is not None:
            return self.u_override
        return math.ldexp(1.0, -self.p)

    @cached_property
    def sigma(self) -> float:
        """Smallest positive subnormal, rounded up if not representable."""
        exp = self.sigma_exp if self.sigma_exp is not None else self.e_min - self.p + 1
        exact = math.ldexp(float(self.sigma_mant), exp)
        if exact > 0.0:
            return exact
        return 5e-324  # underflowed; round up to keep the abstract band sound

    @cached_property
    def Sigma(self) -> float:
        try:
            v = (2.0 - math.ldexp(1.0, 1 - self.p)) * math.ldexp(1.0, self.e_max - 1) * 2.0
        except OverflowError:
            return INF
        if math.isinf(v):
            return INF
        return v

    # --- pre-rounded comparison thresholds -------------------------------
    # flush_le: largest float64 <= sigma/2 (for "<= sigma/2" tests on floats)
    # flush_lt: largest float64 <  sigma/2 (for "< sigma/2" tests)
    # overflow_cap: largest float64 <= Sigma (x > Sigma  <=>  x > overflow_cap)

    @cached_property
    def _sigma_half_exact(self) -> tuple[int, int]:
        exp = self.sigma_exp if self.sigma_exp is not None else self.e_min - self.p + 1
        return self.sigma_mant, exp - 1

    @cached_property
    def flush_le(self) -> float:
        m, e = self._sigma_half_exact
        v = math.ldexp(float(m), e)
        if v == 0.0:
            return 0.0
        if self._ldexp_exact(m, e):
            return v
        # nearest rounding may have gone up; step down until <= exact value
        while not self._le_exact(v, m, e):
            v = ivl.next_down(v)
        return v

    @cached_property
    def flush_lt(self) -> float:
        m, e = self._sigma_half_exact
        v = self.flush_le
        if v == 0.0:
            return 0.0
        if self._ldexp_exact(m, e) and v == math.ldexp(float(m), e):
            return ivl.next_down(v)
        return v

    @cached_property
    def overflow_cap(self) -> float:
        v = self.Sigma
        if math.isinf(v):
            return ivl.MAX_FLOAT
        return v

    @staticmethod
    def _ldexp_exact(m: int, e: int) -> bool:
        v = math.ldexp(float(m), e)
        if v == 0.0 or math.isinf(v):
            return False
        mi, ei = ivl._int_frexp(v)
        if ei >= e:
            return (mi << (ei - e)) == m
        return mi == (m << (e - ei))

    @staticmethod
    def _le_exact(v: float, m: int, e: int) -> bool:
        """v <= m * 2**e with v a float64."""
        mi, ei = ivl._int_frexp(v)
        if ei >= e:
            return (mi << (ei - e)) <= m
        return mi <= (m << (e - ei))

    # --- format operations ------------------------------------------------

    def round_value(self, x: float) -> float:
        """Round a binary64 value onto the profile's grid (identity when the
        grid is at least as fine as binary64)."""
        if self.grid == "binary32":
            return round_binary32(x)
        return x

    def grid_next_up(self, x: float) -> float | None:
        if self.grid == "binary32":
            return next_up_binary32(round_binary32(x))
        if self.grid == "binary64":
            return ivl.next_up(x)
        return None

    def grid_next_down(self, x: float) -> float | None:
        if self.grid == "binary32":
            return next_down_binary32(round_binary32(x))
        if self.grid == "binary64":
            return ivl.next_down(x)
        return None

    @cached_property
    def inflation(self) -> Interval:
        """The relative error factor 1 + [-u, u], outward rounded."""
        u = self.u
        lv, le = ivl._sum_rounded(1.0, -u)
        hv, he = ivl._sum_rounded(1.0, u)
        return Interval(ivl._down(lv, le), ivl._up(hv, he))

    @cached_property
    def absolute_band(self) -> Interval:
        """The absolute error band [-sigma/2, sigma/2], outward rounded."""
        m, e = self._sigma_half_exact
        v = math.ldexp(float(m), e)
        if v == 0.0:
            v = 5e-324
        elif not self._ldexp_exact(m, e):
            while self._le_exact(v, m, e):
                v = ivl.next_up(v)
        return Interval(-v, v)

    @cached_property
    def widening_thresholds(self) -> tuple[float, ...]:
        """Default threshold ladder: 0, the format's significant magnitudes
        (sigma, 2**e_min, 1, powers 2**4k, Sigma) mirrored negatively, with
        infinities capping both ends."""
        mags = {self.sigma, math.ldexp(1.0, max(self.e_min, -1074)), 1.0}
        k = 4
        while k <= min(self.e_max, 1023):
            mags.add(math.ldexp(1.0, k))
            k += 4
        if not math.isinf(self.Sigma):
            mags.add(self.Sigma)
        ts = {0.0, INF, -INF}
        for v in mags:
            if v > 0.0 and not math.isinf(v):
                ts.add(v)
                ts.add(-v)
        return tuple(sorted(ts))


SINGLE = PrecisionProfile("single", p=24, e_min=-126, grid="binary32")
DOUBLE = PrecisionProfile("double", p=53, e_min=-1022, grid="binary64")
# sigma pinned to the published 2**-16446 rather than the 2**(e_min-p+1) formula
EXTENDED = PrecisionProfile("extended", p=64, e_min=-16382, grid=None, sigma_exp=-16446)
DOUBLE_ROUNDING = PrecisionProfile(
    "double-rounding",
    p=53,
    e_min=-1022,
    grid="binary64",
    u_override=math.ldexp(float(2 ** 11 + 2), -64),
    sigma_mant=2 ** 11 + 1,
    sigma_exp=-1086,
)

PROFILES: dict[str, PrecisionProfile] = {
    p.name: p for p in (SINGLE, DOUBLE, EXTENDED, DOUBLE_ROUNDING)
}


def get_profile(name: str) -> PrecisionProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise KeyError(
            f"unknown precision profile {name!r}; expected one of {sorted(PROFILES)}"
        ) from None
