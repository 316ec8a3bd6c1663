"""Bit-exact concrete execution and soundness fuzzing.

Concrete semantics per profile:

* ``single``   every operation computed in binary64 and rounded to binary32;
               correct because binary64 carries more than 2p+2 bits of
               binary32, which makes the double rounding innocuous for
               +, -, *, / and sqrt.
* ``double``   native binary64.
* ``extended`` 64-bit-significand arithmetic via mpmath with correct
               nearest rounding; exact for operands in the binary64 range,
               where the extended exponent range cannot over- or underflow.
* ``double-rounding`` the extended result rounded again to binary64, the
               behavior of x87 registers spilled to memory.

The fuzzer draws input points (uniform plus endpoint-biased), replays the
program concretely, and checks every recorded instant of an analysis
report for containment: both the relational membership m + s . (u - center)
and the reported plain range must hold for every variable.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import interval as ivl
from .analyzer import AnalysisReport, InstantRecord
from .interval import Interval, point
from .profiles import PrecisionProfile, get_profile, round_binary32
from .program import Assign, BinOp, Branch, Const, Expr, Instr, Program, SqrtOp, Var
from .slopes import IndRegistry, SlopeValue

INF = math.inf


def _ieee_div(x: float, y: float) -> float:
    if y != 0.0:
        return x / y
    if x == 0.0 or x != x:
        return math.nan
    return math.copysign(INF, x) * math.copysign(1.0, y)


def _ieee_sqrt(x: float) -> float:
    if x < 0.0:
        return math.nan
    try:
        return math.sqrt(x)
    except ValueError:
        return math.nan


class ScalarOps:
    """Correctly rounded scalar operations for one profile."""

    def __init__(self, prof: PrecisionProfile):
        self.prof = prof
        self.name = prof.name

    def literal(self, c: float):
        return self.value(self.prof.round_value(c))

    def value(self, x: float):
        """Embed a binary64 number into the profile's value space."""
        if self.name == "single":
            return round_binary32(x)
        if self.name == "extended":
            return mpmath.mpf(x)
        return x

    def _binop(self, op: str, x, y):
        if self.name == "single":
            x, y = float(x), float(y)
            if op == "+":
                return round_binary32(x + y)
            if op == "-":
                return round_binary32(x - y)
            if op == "*":
                return round_binary32(x * y)
            return round_binary32(_ieee_div(x, y))
        if self.name == "double":
            if op == "+":
                return x + y
            if op == "-":
                return x - y
            if op == "*":
                return x * y
            return _ieee_div(x, y)
        # extended and double-rounding: correctly rounded 64-bit significand
        a = x if isinstance(x, mpmath.mpf) else mpmath.mpf(float(x))
        b = y if isinstance(y, mpmath.mpf) else mpmath.mpf(float(y))
        if op == "+":
            r = mpmath.fadd(a, b, prec=64, rounding="n")
        elif op == "-":
            r = mpmath.fsub(a, b, prec=64, rounding="n")
        elif op == "*":
            r = mpmath.fmul(a, b, prec=64, rounding="n")
        else:
            if b == 0:
                return math.nan if a == 0 else math.copysign(INF, float(a))
            r = mpmath.fdiv(a, b, prec=64, rounding="n")
        if self.name == "double-rounding":
            return float(r)
        return r

    def add(self, x, y):
        return self._binop("+", x, y)

    def sub(self, x, y):
        return self._binop("-", x, y)

    def mul(self, x, y):
        return self._binop("*", x, y)

    def div(self, x, y):
        return self._binop("/", x, y)

    def sqrt(self, x):
        if self.name == "single":
            return round_binary32(_ieee_sqrt(float(x)))
        if self.name == "double":
            return _ieee_sqrt(x)
        a = x if isinstance(x, mpmath.mpf) else mpmath.mpf(float(x))
        if a < 0:
            return math.nan
        with mpmath.workprec(64):
            r = mpmath.sqrt(a)
        if self.name == "double-rounding":
            return float(r)
        return r


@dataclass
class ConcreteTrace:
    """Per-instant variable valuations of one concrete run."""

    instants: list[dict[str, object]]
    final_state: dict[str, object]


def _eval_concrete(e: Expr, env: dict, ops: ScalarOps):
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Const):
        return ops.literal(e.value)
    if isinstance(e, BinOp):
        l = _eval_concrete(e.lhs, env, ops)
        r = _eval_concrete(e.rhs, env, ops)
        if e.op == "+":
            return ops.add(l, r)
        if e.op == "-":
            return ops.sub(l, r)
        if e.op == "*":
            return ops.mul(l, r)
        return ops.div(l, r)
    if isinstance(e, SqrtOp):
        return ops.sqrt(_eval_concrete(e.arg, env, ops))
    raise TypeError(e)


def _exec_concrete(instrs, env: dict, ops: ScalarOps, prof: PrecisionProfile) -> dict:
    for ins in instrs:
        if isinstance(ins, Assign):
            env[ins.target] = _eval_concrete(ins.expr, env, ops)
        elif isinstance(ins, Branch):
            lhs = _eval_concrete(ins.cond.lhs, env, ops)
            c = prof.round_value(ins.cond.rhs)
            if ins.cond.op == ">=":
                taken = lhs >= c
            elif ins.cond.op == ">":
                taken = lhs > c
            else:
                taken = lhs != c
            env = _exec_concrete(ins.then_body if taken else ins.else_body, env, ops, prof)
        else:
            raise TypeError(ins)
    return env


def simulate_concrete(
    program: Program,
    input_point: dict[str, float],
    prof: PrecisionProfile | str,
    steps: int | None = None,
) -> ConcreteTrace:
    """Run the program with one fixed input valuation, recording every
    intermediate value with correct rounding at each operation."""
    prof = get_profile(prof) if isinstance(prof, str) else prof
    ops = ScalarOps(prof)
    n = steps if steps is not None else program.steps
    env: dict[str, object] = {}
    for d in program.states:
        env[d.name] = ops.literal(d.init)
    instants = []
    for _ in range(n):
        for d in program.inputs:
            env[d.name] = ops.value(input_point[d.name])
        env = _exec_concrete(program.body, dict(env), ops, prof)
        instants.append(dict(env))
        news = {s: env[src] for s, src in program.updates}
        env.update(news)
    return ConcreteTrace(instants, env)


def simulate_model(model, input_point: dict[str, float], prof, steps: int | None = None):
    """Direct block-graph simulation, independent of the IR lowering; used
    to cross-check that lowering preserves concrete semantics bit-exactly."""
    from . import frontend as fe

    prof = get_profile(prof) if isinstance(prof, str) else prof
    ops = ScalarOps(prof)
    n = steps if steps is not None else model.steps
    state = {
        name: ops.literal(b.init)
        for name, b in model.blocks.items()
        if isinstance(b, fe.DelayBlock)
    }
    instants = []
    for _ in range(n):
        values: dict[str, object] = dict(state)

        def ev(name: str):
            if name in values:
                return values[name]
            b = model.blocks[name]
            if isinstance(b, fe.InputBlock):
                v = ops.value(input_point[name])
            elif isinstance(b, fe.ConstBlock):
                v = ops.literal(b.value)
            elif isinstance(b, fe.GainBlock):
                v = ops.mul(ops.literal(b.k), ev(b.src))
            elif isinstance(b, fe.SumBlock):
                acc = ev(b.srcs[0])
                if b.signs[0] == "-":
                    acc = ops.sub(ops.literal(0.0), acc)
                for sign, src in zip(b.signs[1:], b.srcs[1:]):
                    acc = ops.add(acc, ev(src)) if sign == "+" else ops.sub(acc, ev(src))
                v = acc
            elif isinstance(b, fe.ProductBlock):
                acc = ev(b.srcs[0])
                for src in b.srcs[1:]:
                    acc = ops.mul(acc, ev(src))
                v = acc
            elif isinstance(b, fe.DivBlock):
                v = ops.div(ev(b.num), ev(b.den))
            elif isinstance(b, fe.SqrtBlock):
                v = ops.sqrt(ev(b.src))
            elif isinstance(b, fe.SwitchBlock):
                p = ev(b.pred)
                c = prof.round_value(b.c)
                taken = p >= c if b.op == ">=" else p > c if b.op == ">" else p != c
                v = ev(b.then_src if taken else b.else_src)
            elif isinstance(b, fe.OutputBlock):
                v = ev(b.src)
            else:
                raise TypeError(b)
            values[name] = v
            return v

        for name in model.blocks:
            ev(name)
        instants.append(dict(values))
        state = {
            name: values[b.src]
            for name, b in model.blocks.items()
            if isinstance(b, fe.DelayBlock)
        }
    return ConcreteTrace(instants, state)


# --- vectorized execution (single / double only) ---------------------------


def _np_dtype(prof: PrecisionProfile):
    if prof.grid == "binary32":
        return np.float32
    if prof.grid == "binary64":
        return np.float64
    raise ValueError(f"no vectorized execution for profile {prof.name}")


def _eval_batch(e: Expr, env: dict, prof: PrecisionProfile, dtype):
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Const):
        return dtype(prof.round_value(e.value))
    if isinstance(e, BinOp):
        l = _eval_batch(e.lhs, env, prof, dtype)
        r = _eval_batch(e.rhs, env, prof, dtype)
        with np.errstate(all="ignore"):
            if e.op == "+":
                return l + r
            if e.op == "-":
                return l - r
            if e.op == "*":
                return l * r
            return l / r
    if isinstance(e, SqrtOp):
        with np.errstate(all="ignore"):
            return np.sqrt(_eval_batch(e.arg, env, prof, dtype))
    raise TypeError(e)


def _exec_batch(instrs, env: dict, prof: PrecisionProfile, dtype) -> dict:
    for ins in instrs:
        if isinstance(ins, Assign):
            env[ins.target] = _eval_batch(ins.expr, env, prof, dtype)
        elif isinstance(ins, Branch):
            lhs = _eval_batch(ins.cond.lhs, env, prof, dtype)
            c = dtype(prof.round_value(ins.cond.rhs))
            if ins.cond.op == ">=":
                mask = lhs >= c
            elif ins.cond.op == ">":
                mask = lhs > c
            else:
                mask = lhs != c
            t_env = _exec_batch(ins.then_body, dict(env), prof, dtype)
            e_env = _exec_batch(ins.else_body, dict(env), prof, dtype)
            for k in set(t_env) | set(e_env):
                tv = t_env.get(k, env.get(k))
                ev_ = e_env.get(k, env.get(k))
                env[k] = np.where(mask, tv, ev_)
        else:
            raise TypeError(ins)
    return env


def simulate_batch(
    program: Program,
    input_arrays: dict[str, np.ndarray],
    prof: PrecisionProfile | str,
    steps: int | None = None,
) -> list[dict[str, np.ndarray]]:
    """Vectorized concrete runs: one array lane per sample.  Bit-exact with
    simulate_concrete because numpy's element ops are the IEEE operations
    of the array dtype."""
    prof = get_profile(prof) if isinstance(prof, str) else prof
    dtype = _np_dtype(prof)
    n = steps if steps is not None else program.steps
    width = len(next(iter(input_arrays.values()))) if input_arrays else 1
    env: dict[str, np.ndarray] = {}
    for d in program.states:
        env[d.name] = np.full(width, prof.round_value(d.init), dtype=dtype)
    out = []
    for _ in range(n):
        for d in program.inputs:
            env[d.name] = input_arrays[d.name].astype(dtype)
        env = _exec_batch(program.body, dict(env), prof, dtype)
        out.append(dict(env))
        news = {s: env[src] for s, src in program.updates}
        env.update(news)
    return out


# --- soundness fuzzing ------------------------------------------------------


@dataclass(frozen=True)
class FuzzViolation:
    instant: int  # -1 is the limit instant
    var: str
    sample: int
    value: float
    lo: float
    hi: float
    check: str  # "membership" | "range"

    def render(self) -> str:
        where = "limit" if self.instant < 0 else f"t={self.instant}"
        return (
            f"{where} {self.var}[sample {self.sample}] = {self.value!r} "
            f"outside [{self.lo!r}, {self.hi!r}] ({self.check})"
        )


@dataclass
class FuzzVerdict:
    model: str
    profile: str
    samples: int
    seed: int
    checked_values: int
    violations: list[FuzzViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "model": self.model,
            "profile": self.profile,
            "samples": self.samples,
            "seed": self.seed,
            "checked_values": self.checked_values,
            "violations": [
                {
                    "instant": v.instant,
                    "var": v.var,
                    "sample": v.sample,
                    "value": repr(v.value),
                    "lo": repr(v.lo),
                    "hi": repr(v.hi),
                    "check": v.check,
                }
                for v in self.violations
            ],
        }


def sample_inputs(
    program: Program, prof: PrecisionProfile, samples: int, seed: int
) -> dict[str, np.ndarray]:
    """Deterministic input points: exact interval endpoints, midpoint, and
    near-endpoint values first, uniform draws after."""
    rng = np.random.Generator(np.random.PCG64(seed))
    out = {}
    for d in program.inputs:
        lo = prof.round_value(d.lo)
        hi = prof.round_value(d.hi)
        vals = rng.uniform(lo, hi, size=samples)
        fixed = [lo, hi, lo + 0.5 * (hi - lo)]
        fixed += [lo + 0.001 * (hi - lo), hi - 0.001 * (hi - lo)]
        vals[: min(len(fixed), samples)] = fixed[: min(len(fixed), samples)]
        vals = np.asarray([prof.round_value(float(v)) for v in vals])
        np.clip(vals, lo, hi, out=vals)
        out[d.name] = vals
    return out


def _gamma_bounds_batch(
    value: SlopeValue, upoints: dict[int, np.ndarray], reg: IndRegistry, width: int
) -> tuple[np.ndarray, np.ndarray]:
    """Outward-rounded m + s . (u - center) per sample lane."""
    lo = np.full(width, value.m.lo)
    hi = np.full(width, value.m.hi)
    ninf = np.float64(-INF)
    pinf = np.float64(INF)
    for i, s in enumerate(value.s):
        if s.lo == 0.0 and s.hi == 0.0:
            continue
        u = upoints[i]
        c = reg.center(i)
        d = u - c
        d_lo = np.nextafter(d, ninf)
        d_hi = np.nextafter(d, pinf)
        with np.errstate(all="ignore"):
            cands = np.stack([s.lo * d_lo, s.lo * d_hi, s.hi * d_lo, s.hi * d_hi])
            t_lo = np.fmin.reduce(cands)
            t_hi = np.fmax.reduce(cands)
            # inf * 0 corners: the term is unconstrained in that direction
            allnan = np.isnan(cands).all(axis=0)
            t_lo = np.where(allnan, ninf, np.nextafter(t_lo, ninf))
            t_hi = np.where(allnan, pinf, np.nextafter(t_hi, pinf))
            lo = np.nextafter(lo + t_lo, ninf)
            hi = np.nextafter(hi + t_hi, pinf)
    return lo, hi


def fuzz_soundness(
    program: Program,
    report: AnalysisReport,
    samples: int = 10_000,
    seed: int = 0,
    extra_steps: int = 50,
    max_violations: int = 25,
) -> FuzzVerdict:
    """Replays ``samples`` concrete runs and checks every recorded instant
    of the report; any containment failure is a soundness bug (or evidence
    of a tampered report).  The limit instant is checked against
    ``extra_steps`` continuations beyond the unrolled window."""
    prof = get_profile(report.profile)
    if prof.grid is None:
        raise ValueError("fuzzing needs a concrete grid; use single or double")
    verdict = FuzzVerdict(program.name, prof.name, samples, seed, 0)
    inputs = sample_inputs(program, prof, samples, seed)
    n = len(report.instants)
    traces = simulate_batch(program, inputs, prof, steps=n + (extra_steps if report.limit else 0))

    reg = report.registry
    upoints: dict[int, np.ndarray] = {}
    if reg is not None:
        for i, entry in enumerate(reg.entries):
            if entry.kind == "input":
                upoints[i] = inputs[entry.name].astype(np.float64)
            elif entry.kind == "state":
                upoints[i] = np.full(samples, entry.values.lo)
            else:  # refined: clamp the origin variable's trace value
                var, instant = entry.origin if entry.origin else (None, None)
                if var is not None and instant is not None and instant < len(traces):
                    vals = traces[instant][var].astype(np.float64)
                else:
                    vals = np.full(samples, entry.center)
                upoints[i] = np.clip(vals, entry.values.lo, entry.values.hi)

    def check_record(rec: InstantRecord, trace_env: dict, instant: int) -> None:
        for var, abstract in rec.values.items():
            if var not in trace_env:
                continue
            concrete = trace_env[var].astype(np.float64)
            finite = np.isfinite(concrete)
            bound = rec.bounds[var]
            if not bound.is_bottom:
                bad = (concrete < bound.lo) | (concrete > bound.hi)
                # infinite concrete values must be matched by infinite bounds
                bad |= np.isposinf(concrete) & (bound.hi < INF)
                bad |= np.isneginf(concrete) & (bound.lo > -INF)
                bad &= ~np.isnan(concrete)
                room = max(0, max_violations - len(verdict.violations))
                for idx in np.flatnonzero(bad)[:room]:
                    verdict.violations.append(
                        FuzzViolation(
                            instant, var, int(idx), float(concrete[idx]),
                            bound.lo, bound.hi, "range",
                        )
                    )
            if isinstance(abstract, SlopeValue) and reg is not None:
                lo, hi = _gamma_bounds_batch(abstract, upoints, reg, samples)
                bad = finite & ((concrete < lo) | (concrete > hi))
                room = max(0, max_violations - len(verdict.violations))
                for idx in np.flatnonzero(bad)[:room]:
                    verdict.violations.append(
                        FuzzViolation(
                            instant, var, int(idx), float(concrete[idx]),
                            float(lo[idx]), float(hi[idx]), "membership",
                        )
                    )
            verdict.checked_values += samples

    for t, rec in enumerate(report.instants):
        check_record(rec, traces[t], t)
    if report.limit is not None:
        for t in range(n, len(traces)):
            check_record(report.limit, traces[t], -1)
    return verdict


def gamma_member(
    values: dict[str, SlopeValue],
    concrete: dict[str, float],
    upoint: dict[str, float],
    reg: IndRegistry,
) -> bool:
    """Scalar membership test: does the concrete environment lie in the
    concretization of the abstract one at input point ``upoint``?"""
    u_by_index = {}
    for i, entry in enumerate(reg.entries):
        if entry.name in upoint:
            u_by_index[i] = upoint[entry.name]
        else:
            u_by_index[i] = entry.center
    for var, abstract in values.items():
        if var not in concrete:
            continue
        c = concrete[var]
        acc = abstract.m
        for i, s in enumerate(abstract.s):
            if s.lo == 0.0 and s.hi == 0.0:
                continue
            d = ivl.sub(point(u_by_index[i]), point(reg.center(i)))
            acc = ivl.add(acc, ivl.mul(s, d))
        if math.isnan(float(c)):
            continue
        if not acc.contains(float(c)):
            return False
    return True


def shrink_instant_bound(
    report: AnalysisReport, t: int, var: str, fraction: float = 0.10
) -> AnalysisReport:
    """Copy of the report with one recorded range shrunk by ``fraction`` of
    its width (both the plain bound and the membership value), for
    fault-injection checks of the fuzzer."""
    import copy

    shrunk = copy.copy(report)
    shrunk.instants = list(report.instants)
    rec = report.instants[t] if t >= 0 else report.limit
    b = rec.bounds[var]
    margin = 0.5 * fraction * b.width()
    new_b = Interval(b.lo + margin, b.hi - margin) if b.width() > 0 else b
    new_bounds = dict(rec.bounds)
    new_bounds[var] = new_b
    new_values = dict(rec.values)
    old = rec.values[var]
    if isinstance(old, SlopeValue):
        m = old.m
        w = m.width()
        if w > 0:
            mm = 0.5 * fraction * w
            new_values[var] = SlopeValue(Interval(m.lo + mm, m.hi - mm), old.s)
    else:
        new_values[var] = new_b
    new_rec = InstantRecord(rec.t, new_values, new_bounds)
    if t >= 0:
        shrunk.instants[t] = new_rec
    else:
        shrunk.limit = new_rec
    return shrunk
