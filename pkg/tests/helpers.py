"""Shared test machinery: the per-operation soundness fuzzer.

For every abstract operation we build random operand pairs with known
concrete witness sets, compute the abstract result, then check that the
correctly rounded concrete result of every witness pair stays inside the
result's concretization at the same input point.  Witnesses are sampled
from inward-rounded concretizations so a sampled point can never be an
artifact of outward rounding.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from fpslopes import interval as ivl
from fpslopes.interval import Interval, point
from fpslopes.oracle import ScalarOps
from fpslopes.profiles import PROFILES, PrecisionProfile
from fpslopes.slopes import IndRegistry, SlopeContext, SlopeValue

INF = math.inf

OPS = ("+", "-", "*", "/", "sqrt")


def gamma_at(
    ctx: SlopeContext, v: SlopeValue, upoint: list[float], inward: bool = False
) -> Interval:
    """Concretization interval of v at one input point."""
    v = ctx.pad(v)
    acc = v.m
    for i, s in enumerate(v.s):
        d = ivl.sub(point(upoint[i]), point(ctx.reg.center(i)), inward=inward)
        if d.is_bottom:
            return ivl.BOTTOM
        acc = ivl.add(acc, ivl.mul(s, d, inward=inward), inward=inward)
        if acc.is_bottom:
            return ivl.BOTTOM
    return acc


def sample_in(rng: random.Random, iv: Interval, fmt) -> float | None:
    """A format value inside the interval, or None if none reachable."""
    if iv.is_bottom:
        return None
    if iv.lo == iv.hi:
        v = iv.lo
    else:
        t = rng.random()
        if rng.random() < 0.3:
            t = rng.choice((0.0, 1.0, 0.5))
        v = iv.lo + t * (iv.hi - iv.lo)
        if math.isinf(v):
            v = iv.lo if not math.isinf(iv.lo) else iv.hi
        if math.isinf(v):
            return None
    v = fmt(v)
    if iv.lo <= v <= iv.hi:
        return v
    for cand in (fmt(iv.lo), fmt(iv.hi)):
        if iv.lo <= cand <= iv.hi:
            return cand
    return None


_MAG_CAP = 1e290  # keeps generated endpoints finite


def _rand_interval(
    rng: random.Random, scale: float, fmt, rel_u: float, positive: bool = False
) -> Interval:
    scale = min(scale, _MAG_CAP)
    c = rng.uniform(0.2, 1.0) if positive else rng.uniform(-1.0, 1.0)
    # anchor on a format value so point intervals have concrete witnesses
    c = fmt(c * scale)
    w = abs(rng.gauss(0.0, 0.35)) * abs(c) * rng.choice((0.0, 8.0 * rel_u, 1e-3, 0.5))
    lo, hi = c - w, c + w
    if positive and lo <= 0.0:
        lo = c * 0.1
        hi = max(hi, lo)
    if c == 0.0:
        lo = hi = 0.0
    return Interval(ivl.next_down(lo) if lo != c else lo, ivl.next_up(hi) if hi != c else hi)


def make_value(
    rng: random.Random, dims: int, mag: float, fmt, rel_u: float, positive: bool = False
) -> SlopeValue:
    m = _rand_interval(rng, mag, fmt, rel_u, positive)
    s_scale = mag * rng.choice((0.0, 0.2, 1.0))
    if positive:
        s_scale = min(s_scale, 0.05 * abs(m.lo))
    s = tuple(_rand_interval(rng, s_scale, fmt, rel_u) for _ in range(dims))
    return SlopeValue(m, s)


@dataclass
class OpFuzzStats:
    tested: dict[str, int] = field(default_factory=lambda: {op: 0 for op in OPS})
    violations: list[str] = field(default_factory=list)


def _format_rounder(prof: PrecisionProfile):
    if prof.name == "single":
        from fpslopes.profiles import round_binary32

        return round_binary32
    return lambda x: x  # binary64-representable operands for the wider formats


def fuzz_operations(
    profile_name: str,
    pairs_per_op: int,
    seed: int,
    witnesses: int = 3,
    max_report: int = 8,
) -> OpFuzzStats:
    """Run the per-operation containment fuzz for one precision profile."""
    prof = PROFILES[profile_name]
    oracle = ScalarOps(prof)
    fmt = _format_rounder(prof)
    rng = random.Random(seed)
    stats = OpFuzzStats()

    for op in OPS:
        attempts = 0
        while stats.tested[op] < pairs_per_op and attempts < pairs_per_op * 8:
            attempts += 1
            reg = IndRegistry()
            dims = rng.choice((1, 1, 1, 2))
            for d in range(dims):
                c = rng.uniform(-1.0, 1.0) * 10.0 ** rng.uniform(-3.0, 3.0)
                w = abs(rng.gauss(0.0, 1.0)) * abs(c) * rng.choice((0.0, 1e-6, 0.4))
                reg.register(f"v{d}", Interval(ivl.next_down(c - w), ivl.next_up(c + w)))
            ctx = SlopeContext(reg, prof)
            mag = 10.0 ** rng.uniform(-24.0, 24.0)
            g = make_value(rng, dims, mag, fmt, prof.u, positive=(op == "sqrt"))
            mode = rng.random()
            if mode < 0.25 and op in ("+", "-"):
                # absorption regime: g tiny relative to h, straddling u/2
                h = make_value(rng, dims, mag, fmt, prof.u)
                h_lo, h_hi = ivl.magnitude(ctx.range_of(h))
                if h_lo == 0.0 or math.isinf(h_hi):
                    continue
                ratio = prof.u * 10.0 ** rng.uniform(-3.0, 0.0)
                gm = fmt(h_hi * ratio)
                g = SlopeValue(point(gm), (ivl.ZERO,) * dims)
            elif mode < 0.35:
                # near the flush and overflow boundaries
                edge = min(rng.choice((prof.sigma, prof.overflow_cap)), _MAG_CAP)
                h = make_value(
                    rng, dims, edge * 10.0 ** rng.uniform(-1.0, 0.0),
                    fmt, prof.u, positive=(op == "/"),
                )
            else:
                h = make_value(
                    rng, dims, 10.0 ** rng.uniform(-24.0, 24.0), fmt, prof.u,
                    positive=(op == "/"),
                )
            if op == "/" and rng.random() < 0.5:
                h = SlopeValue(ivl.neg(h.m), tuple(ivl.neg(x) for x in h.s))

            rng_g = ctx.range_of(g)
            rng_h = ctx.range_of(h)
            try:
                if op == "+":
                    res = ctx.add(g, h)
                elif op == "-":
                    res = ctx.sub(g, h)
                elif op == "*":
                    res = ctx.mul(g, h)
                elif op == "/":
                    if rng_h.lo <= 0.0 <= rng_h.hi or h.m.lo <= 0.0 <= h.m.hi:
                        continue
                    res = ctx.div(g, h)
                else:
                    if g.m.lo <= 0.0 or rng_g.lo <= 0.0:
                        continue
                    res = ctx.sqrt(g)
            except ivl.IntervalDomainError:
                continue
            if ctx.diagnostics:
                continue  # hit a guarded precondition; not a containment case

            tested_here = False
            for _ in range(witnesses):
                upoint = []
                ok = True
                for i in range(dims):
                    u = sample_in(rng, reg.values(i), fmt)
                    if u is None:
                        ok = False
                        break
                    upoint.append(u)
                if not ok:
                    break
                x = sample_in(rng, gamma_at(ctx, g, upoint, inward=True), fmt)
                if x is None:
                    continue
                if op == "sqrt":
                    if x <= 0.0:
                        continue
                    z = oracle.sqrt(x)
                else:
                    y = sample_in(rng, gamma_at(ctx, h, upoint, inward=True), fmt)
                    if y is None:
                        continue
                    if op == "/" and y == 0.0:
                        continue
                    z = getattr(oracle, {"+": "add", "-": "sub", "*": "mul", "/": "div"}[op])(x, y)
                try:
                    if math.isnan(float(z)):
                        continue
                except OverflowError:
                    pass  # extended values beyond binary64; comparisons still exact
                bound = gamma_at(ctx, res, upoint)
                tested_here = True
                if not (bound.lo <= z <= bound.hi):
                    if len(stats.violations) < max_report:
                        stats.violations.append(
                            f"{profile_name} {op}: witness x={x!r} "
                            f"{'y=' + repr(y) if op != 'sqrt' else ''} "
                            f"z={z!r} outside {bound!r}"
                        )
            if tested_here:
                stats.tested[op] += 1
    return stats
