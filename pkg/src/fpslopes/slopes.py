"""The floating-point slopes abstract domain.

An abstract value is a pair (m, s): a small interval ``m`` enclosing the
function value at the expansion point under nearest rounding, plus a slope
vector ``s`` with one interval per independent variable.  The value
concretizes to ``m + s . (V - center(V))`` where V are the current intervals
of the independent variables.

The arithmetic mirrors floating-point behavior: every operation inflates
both components by the relative error factor 1 + [-u, u] (products,
quotients and roots also add the absolute error band [-sigma/2, sigma/2]),
additions first reduce operands that would be absorbed, and every result is
normalized for flush-to-zero and overflow. With ``rounding_model=False``
the same machinery computes plain real-arithmetic interval slopes, which
serve as a comparison baseline.

All values are immutable; the independent-variable registry is the one
piece of mutable state (it grows when a test refinement introduces a fresh
variable) and must stay confined to a single analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import interval as ivl
from .diagnostics import Diagnostic
from .interval import Interval, BOTTOM, TOP, ZERO, ONE, point
from .profiles import PrecisionProfile

INF = math.inf

POS_INF_IV = Interval(INF, INF)
NEG_INF_IV = Interval(-INF, -INF)


@dataclass(frozen=True)
class SlopeValue:
    """Abstract value: center enclosure ``m`` and slope vector ``s``."""

    m: Interval
    s: tuple[Interval, ...]

    def __repr__(self) -> str:
        return f"SlopeValue({self.m!r}, {list(self.s)!r})"


@dataclass
class RegistryEntry:
    name: str
    values: Interval  # current interval of the independent variable
    center: float  # expansion point, frozen at registration
    kind: str  # "input" | "state" | "refined"
    origin: tuple[str, int | None] | None = None  # (variable, instant) for refinements


class IndRegistry:
    """Ordered registry of independent variables.

    Indices are stable: the registry only grows.  Each entry freezes its
    expansion point (the interval midpoint) at registration time; slopes of
    previously built values stay valid because live values are padded with
    zero slope coordinates when the registry grows.
    """

    def __init__(self) -> None:
        self.entries: list[RegistryEntry] = []
        self._by_name: dict[str, int] = {}

    def register(
        self,
        name: str,
        values: Interval,
        kind: str = "input",
        origin: tuple[str, int | None] | None = None,
    ) -> int:
        if name in self._by_name:
            raise ValueError(f"independent variable {name!r} already registered")
        center = ivl.mid_or_fallback(values)
        self.entries.append(RegistryEntry(name, values, center, kind, origin))
        idx = len(self.entries) - 1
        self._by_name[name] = idx
        return idx

    def size(self) -> int:
        return len(self.entries)

    def index_of(self, name: str) -> int:
        return self._by_name[name]

    def values(self, i: int) -> Interval:
        return self.entries[i].values

    def center(self, i: int) -> float:
        return self.entries[i].center


def _down_prod(a: float, b: float) -> float:
    v, e = ivl._prod_rounded(a, b)
    return ivl._down(v, e)


def _up_prod(a: float, b: float) -> float:
    v, e = ivl._prod_rounded(a, b)
    return ivl._up(v, e)


class SlopeContext:
    """Arithmetic, lattice and conversion operations over slope values.

    Bundles the registry, the precision profile and the diagnostics sink.
    ``rounding_model=False`` turns off every floating-point adaptation
    (error inflation, absorption, flush/overflow normalization) and yields
    the classical real-arithmetic slope expansion.
    """

    def __init__(
        self,
        reg: IndRegistry,
        prof: PrecisionProfile,
        *,
        rounding_model: bool = True,
        dual_slope_forms: bool = True,
        thresholds: tuple[float, ...] | None = None,
        diagnostics: list[Diagnostic] | None = None,
    ) -> None:
        self.reg = reg
        self.prof = prof
        self.rounding_model = rounding_model
        self.dual_slope_forms = dual_slope_forms
        self.thresholds = thresholds if thresholds is not None else prof.widening_thresholds
        self.diagnostics: list[Diagnostic] = diagnostics if diagnostics is not None else []
        self.allow_registry_growth = True
        self._infl = prof.inflation
        self._band = prof.absolute_band
        self._fresh = 0

    # -- helpers -----------------------------------------------------------

    def pad(self, v: SlopeValue) -> SlopeValue:
        """Extend the slope vector with zeros to the current registry size."""
        n = self.reg.size()
        if len(v.s) == n:
            return v
        if len(v.s) > n:
            raise ValueError("slope vector longer than registry")
        return SlopeValue(v.m, v.s + (ZERO,) * (n - len(v.s)))

    def zero_slopes(self) -> tuple[Interval, ...]:
        return (ZERO,) * self.reg.size()

    def constant(self, c: float) -> SlopeValue:
        v = self.prof.round_value(c) if self.rounding_model else float(c)
        return SlopeValue(point(v), self.zero_slopes())

    def top_value(self) -> SlopeValue:
        return SlopeValue(TOP, (TOP,) * self.reg.size())

    def pos_overflow(self) -> SlopeValue:
        return SlopeValue(POS_INF_IV, (POS_INF_IV,) * self.reg.size())

    def neg_overflow(self) -> SlopeValue:
        return SlopeValue(NEG_INF_IV, (NEG_INF_IV,) * self.reg.size())

    # -- conversions -------------------------------------------------------

    def range_of(self, v: SlopeValue) -> Interval:
        """Interval of every value the abstract value can take: the outward
        rounded dot product m + s . (V - center)."""
        # registry entries never change once registered and padding adds only
        # zero coordinates, so one cached range per (value, registry) is safe
        memo = v.__dict__.get("_range_memo")
        if memo is not None and memo[0] is self.reg:
            return memo[1]
        orig = v
        v = self.pad(v)
        if v.m == POS_INF_IV or v.m == NEG_INF_IV:
            return v.m  # the overflow elements stay point infinities
        acc = v.m
        for i, s in enumerate(v.s):
            if s.lo == 0.0 and s.hi == 0.0:
                continue
            vals = self.reg.values(i)
            d = ivl.sub(vals, point(self.reg.center(i)))
            acc = ivl.add(acc, ivl.mul(s, d))
        object.__setattr__(orig, "_range_memo", (self.reg, acc))
        return acc

    def inject(self, x: Interval, ell: int) -> SlopeValue:
        """Seed the ell-th independent variable: point center, unit slope."""
        m = ivl.mid_or_fallback(x)
        s = [ZERO] * self.reg.size()
        s[ell] = ONE
        return SlopeValue(point(m), tuple(s))

    # -- floating-point behavior -------------------------------------------

    def normalize(self, v: SlopeValue) -> SlopeValue:
        """Detect generated zeros and overflows.

        Total rules replace the value when its whole range rounds to zero
        (inside [-sigma/2, sigma/2]) or overflows (beyond Sigma); partial
        rules join the affected component with 0 or the infinity when only
        part of the range does.
        """
        if not self.rounding_model:
            return v
        p = self.prof
        rng = self.range_of(v)
        n = len(v.s)
        fle, flt_, cap = p.flush_le, p.flush_lt, p.overflow_cap
        if rng.lo >= -fle and rng.hi <= fle:
            return SlopeValue(ZERO, (ZERO,) * n)
        if rng.lo > cap:
            return SlopeValue(POS_INF_IV, (POS_INF_IV,) * n)
        if rng.hi < -cap:
            return SlopeValue(NEG_INF_IV, (NEG_INF_IV,) * n)
        m, s = v.m, v.s
        changed = False
        if rng.lo <= flt_ and rng.hi >= -flt_:  # range meets ]-sigma/2, sigma/2[
            if m.hi <= flt_ and m.lo >= -flt_:
                m = ZERO
            else:
                m = ivl.join(ZERO, m)
            s = tuple(ivl.join(ZERO, x) for x in s)
            changed = True
        if rng.hi > cap:  # range meets ]Sigma, +inf]
            m = POS_INF_IV if m.lo > cap else ivl.join(POS_INF_IV, m)
            s = tuple(ivl.join(POS_INF_IV, x) for x in s)
            changed = True
        if rng.lo < -cap:
            m = NEG_INF_IV if m.hi < -cap else ivl.join(NEG_INF_IV, m)
            s = tuple(ivl.join(NEG_INF_IV, x) for x in s)
            changed = True
        return SlopeValue(m, s) if changed else v

    def absorb(self, g: SlopeValue, h: SlopeValue) -> SlopeValue:
        """Reduce g by the absorption an addition with h would cause.

        When every value of g is below half an ulp of every value of h the
        addition returns h's rounding unchanged, so g's contribution is
        zeroed entirely.  When only part of g's range can be absorbed its
        components are joined with zero instead.  Thresholds are rounded in
        the sound direction: the total rule under-fires, the partial rule
        over-fires.
        """
        if not self.rounding_model:
            return g
        u = self.prof.u
        g_lo, g_hi = ivl.magnitude(self.range_of(g))
        h_lo, h_hi = ivl.magnitude(self.range_of(h))
        # guaranteed absorption: |x| < u/2 * |y| for all pairs
        if g_hi < _down_prod(0.5, _down_prod(u, h_lo)):
            return SlopeValue(ZERO, (ZERO,) * len(g.s))
        if g_lo <= _up_prod(u, h_hi):
            m_lo, _ = ivl.magnitude(g.m)
            m = ivl.join(ZERO, g.m) if m_lo <= _up_prod(u, h_hi) else g.m
            return SlopeValue(m, tuple(ivl.join(ZERO, x) for x in g.s))
        return g

    # -- arithmetic ---------------------------------------------------------

    def _inflate(self, v: Interval) -> Interval:
        return ivl.mul(v, self._infl)

    def _linear(self, g: SlopeValue, h: SlopeValue, op) -> SlopeValue:
        g = self.pad(g)
        h = self.pad(h)
        if self.rounding_model:
            gr = self.absorb(g, h)
            hr = self.absorb(h, g)
            m = self._inflate(op(gr.m, hr.m))
            s = tuple(self._inflate(op(a, b)) for a, b in zip(gr.s, hr.s))
            return self.normalize(SlopeValue(m, s))
        m = op(g.m, h.m)
        return SlopeValue(m, tuple(op(a, b) for a, b in zip(g.s, h.s)))

    def add(self, g: SlopeValue, h: SlopeValue) -> SlopeValue:
        return self._linear(g, h, ivl.add)

    def sub(self, g: SlopeValue, h: SlopeValue) -> SlopeValue:
        return self._linear(g, h, ivl.sub)

    def _pick(self, first: SlopeValue, second: SlopeValue) -> SlopeValue:
        """Keep the form with the narrower range; ties keep the first."""
        if self.range_of(second).width() < self.range_of(first).width():
            return second
        return first

    def mul(self, g: SlopeValue, h: SlopeValue) -> SlopeValue:
        g = self.pad(g)
        h = self.pad(h)
        m = ivl.mul(g.m, h.m)
        if self.rounding_model:
            m = ivl.add(self._inflate(m), self._band)
        rng_h = self.range_of(h)
        s1 = tuple(
            ivl.add(ivl.mul(a, rng_h), ivl.mul(g.m, b)) for a, b in zip(g.s, h.s)
        )
        if self.rounding_model:
            s1 = tuple(self._inflate(x) for x in s1)
        out = SlopeValue(m, s1)
        if self.dual_slope_forms:
            rng_g = self.range_of(g)
            s2 = tuple(
                ivl.add(ivl.mul(b, rng_g), ivl.mul(h.m, a)) for a, b in zip(g.s, h.s)
            )
            if self.rounding_model:
                s2 = tuple(self._inflate(x) for x in s2)
            out = self._pick(out, SlopeValue(m, s2))
        return self.normalize(out) if self.rounding_model else out

    def div(self, g: SlopeValue, h: SlopeValue, where: str | None = None) -> SlopeValue:
        g = self.pad(g)
        h = self.pad(h)
        rng_h = self.range_of(h)
        if rng_h.lo <= 0.0 <= rng_h.hi or h.m.lo <= 0.0 <= h.m.hi:
            self.diagnostics.append(
                Diagnostic(
                    "possible-division-by-zero",
                    f"divisor range {rng_h} may contain zero",
                    where=where,
                )
            )
            return self.top_value()
        q = ivl.div(g.m, h.m)
        m = ivl.add(self._inflate(q), self._band) if self.rounding_model else q
        s1 = tuple(
            ivl.div(ivl.sub(a, ivl.mul(b, q)), rng_h) for a, b in zip(g.s, h.s)
        )
        if self.rounding_model:
            s1 = tuple(self._inflate(x) for x in s1)
        out = SlopeValue(m, s1)
        if self.dual_slope_forms:
            q2 = ivl.div(self.range_of(g), rng_h)
            s2 = tuple(
                ivl.div(ivl.sub(a, ivl.mul(b, q2)), h.m) for a, b in zip(g.s, h.s)
            )
            if self.rounding_model:
                s2 = tuple(self._inflate(x) for x in s2)
            out = self._pick(out, SlopeValue(m, s2))
        return self.normalize(out) if self.rounding_model else out

    def sqrt(self, g: SlopeValue, where: str | None = None) -> SlopeValue:
        g = self.pad(g)
        rng_g = self.range_of(g)
        if g.m.lo <= 0.0 or rng_g.lo <= 0.0:
            self.diagnostics.append(
                Diagnostic(
                    "possible-invalid-operand",
                    f"square root of range {rng_g} not strictly positive",
                    where=where,
                )
            )
            return self.top_value()
        r = ivl.sqrt(g.m)
        m = ivl.add(self._inflate(r), self._band) if self.rounding_model else r
        denom = ivl.add(r, ivl.sqrt(rng_g))
        s = tuple(ivl.div(x, denom) for x in g.s)
        if self.rounding_model:
            s = tuple(self._inflate(x) for x in s)
        out = SlopeValue(m, s)
        return self.normalize(out) if self.rounding_model else out

    # -- order structure ----------------------------------------------------

    def leq(self, g: SlopeValue, h: SlopeValue) -> bool:
        g = self.pad(g)
        h = self.pad(h)
        if not ivl.leq(g.m, h.m):
            return False
        return all(ivl.leq(a, b) for a, b in zip(g.s, h.s))

    def join(self, g: SlopeValue, h: SlopeValue) -> SlopeValue:
        g = self.pad(g)
        h = self.pad(h)
        return SlopeValue(
            ivl.join(g.m, h.m), tuple(ivl.join(a, b) for a, b in zip(g.s, h.s))
        )

    def widen(self, g: SlopeValue, h: SlopeValue) -> SlopeValue:
        g = self.pad(g)
        h = self.pad(h)
        t = self.thresholds
        return SlopeValue(
            ivl.widen(g.m, h.m, t),
            tuple(ivl.widen(a, b, t) for a, b in zip(g.s, h.s)),
        )

    def meet(
        self,
        g: SlopeValue,
        h: SlopeValue,
        origin: tuple[str, int | None] | None = None,
    ) -> SlopeValue | None:
        """Greatest-lower-bound approximation; None signals an infeasible
        (empty) intersection.

        Incomparable overlapping values are replaced by a fresh independent
        variable holding the range intersection; when registry growth is
        disabled (fixpoint iteration) the left value is returned unrefined,
        which is sound but loses the test's precision.
        """
        g = self.pad(g)
        h = self.pad(h)
        rg = self.range_of(g)
        rh = self.range_of(h)
        cap = ivl.meet(rg, rh)
        if cap.is_bottom:
            return None
        if ivl.lt(rg, rh):
            return g
        if ivl.lt(rh, rg):
            return h
        if not self.allow_registry_growth:
            self.diagnostics.append(
                Diagnostic(
                    "lost-precision",
                    f"refinement to {cap} dropped (registry frozen)",
                    where=origin[0] if origin else None,
                )
            )
            return g
        self._fresh += 1
        name = f"_refined{self._fresh}"
        if origin is not None:
            name = f"_{origin[0]}_refined{self._fresh}"
        ell = self.reg.register(name, cap, kind="refined", origin=origin)
        return self.inject(cap, ell)

    def meet_interval(
        self,
        g: SlopeValue,
        bound: Interval,
        origin: tuple[str, int | None] | None = None,
    ) -> SlopeValue | None:
        """Meet with a plain interval constraint (test refinement)."""
        h = SlopeValue(bound, self.zero_slopes())
        return self.meet(g, h, origin=origin)
