"""Abstract interpreter for the simulation-loop IR.

The analyzer runs the loop body path-precisely for the configured number of
steps (no joins), recording a per-instant range for every variable, and then
collects the remaining behaviors (every later instant) in one extra abstract
instant computed as a join/widen fixpoint over the loop body.

Three value domains share the driver: the slopes domain (``fps``), the same
machinery without the floating-point rounding model (``real-slope``), and a
plain non-relational interval domain rounded outward on the profile's grid
(``interval``), which serves as the precision baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from . import interval as ivl
from .diagnostics import Diagnostic
from .interval import Interval, BOTTOM, TOP, point
from .profiles import (
    PrecisionProfile,
    get_profile,
    next_down_binary32,
    next_up_binary32,
    round_binary32,
)
from .program import Assign, BinOp, Branch, Cond, Const, Expr, Instr, Program, SqrtOp, Var
from .slopes import IndRegistry, SlopeContext, SlopeValue

INF = math.inf


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class AnalyzeOptions:
    profile: str | None = None  # default: the program's precision
    unroll: int | None = None  # default: the program's step count
    widen_delay: int = 3
    compute_limit: bool = True
    dual_slope_forms: bool = True
    thresholds: tuple[float, ...] | None = None
    domain: str = "fps"  # fps | interval | real-slope


@dataclass
class InstantRecord:
    t: int  # -1 marks the limit instant
    values: dict[str, object]  # SlopeValue or Interval, per domain
    bounds: dict[str, Interval]


@dataclass
class AnalysisReport:
    program: Program
    domain: str
    profile: str
    options: AnalyzeOptions
    instants: list[InstantRecord]
    limit: InstantRecord | None
    window_hull: dict[str, Interval]
    diagnostics: list[Diagnostic]
    limit_iterations: int
    registry: IndRegistry | None

    def output_hull(self) -> Interval:
        acc = BOTTOM
        for out in self.program.outputs:
            acc = ivl.join(acc, self.window_hull.get(out, BOTTOM))
        return acc

    def final_bounds(self, var: str) -> Interval:
        return self.instants[-1].bounds[var]

    def to_json_dict(self) -> dict:
        def iv_json(v: Interval) -> dict:
            if v.is_bottom:
                return {"bottom": True}
            return {
                "lo": f"{v.lo:.17g}",
                "hi": f"{v.hi:.17g}",
                "lo_hex": v.lo.hex(),
                "hi_hex": v.hi.hex(),
            }

        def instant_json(rec: InstantRecord) -> dict:
            return {
                "t": rec.t,
                "bounds": {k: iv_json(b) for k, b in sorted(rec.bounds.items())},
            }

        reg_json = None
        if self.registry is not None:
            reg_json = [
                {
                    "name": e.name,
                    "values": iv_json(e.values),
                    "center": f"{e.center:.17g}",
                    "kind": e.kind,
                }
                for e in self.registry.entries
            ]
        return {
            "schema": 1,
            "model": self.program.name,
            "domain": self.domain,
            "profile": self.profile,
            "unroll": len(self.instants),
            "widen_delay": self.options.widen_delay,
            "outputs": list(self.program.outputs),
            "instants": [instant_json(r) for r in self.instants],
            "window_hull": {k: iv_json(v) for k, v in sorted(self.window_hull.items())},
            "limit": instant_json(self.limit) if self.limit is not None else None,
            "limit_iterations": self.limit_iterations,
            "diagnostics": [
                {
                    "kind": d.kind,
                    "message": d.message,
                    "where": d.where,
                    "instant": d.instant,
                }
                for d in self.diagnostics
            ],
            "independent_variables": reg_json,
        }


def _guard_bounds(
    cond: Cond, prof: PrecisionProfile
) -> tuple[Interval | None, Interval | None]:
    """Intervals the tested expression is met with on the two branches.

    Bounds follow the profile grid where one exists; without a grid the
    closed over-approximation is used (sound, possibly one value wider).
    """
    c = prof.round_value(cond.rhs)
    if cond.op == ">=":
        below = prof.grid_next_down(c)
        return Interval(c, INF), Interval(-INF, below if below is not None else c)
    if cond.op == ">":
        above = prof.grid_next_up(c)
        return Interval(above if above is not None else c, INF), Interval(-INF, c)
    if cond.op == "!=":
        return None, Interval(c, c)
    raise AnalysisError(f"unsupported guard operator {cond.op!r}")


class _FpsExec:
    """Executes the IR over slope values (fps and real-slope domains)."""

    def __init__(self, program: Program, prof: PrecisionProfile, opts: AnalyzeOptions):
        self.program = program
        self.prof = prof
        self.reg = IndRegistry()
        self.ctx = SlopeContext(
            self.reg,
            prof,
            rounding_model=(opts.domain != "real-slope"),
            dual_slope_forms=opts.dual_slope_forms,
            thresholds=opts.thresholds,
        )
        self.input_index: dict[str, int] = {}
        self.instant = 0
        for decl in program.inputs:
            lo = prof.round_value(decl.lo)
            hi = prof.round_value(decl.hi)
            self.input_index[decl.name] = self.reg.register(
                decl.name, Interval(lo, hi), kind="input"
            )
        self.state_index: dict[str, int] = {}
        for decl in program.states:
            v = prof.round_value(decl.init)
            self.state_index[decl.name] = self.reg.register(
                decl.name, point(v), kind="state"
            )

    @property
    def diagnostics(self) -> list[Diagnostic]:
        return self.ctx.diagnostics

    def initial_env(self) -> dict[str, SlopeValue]:
        env = {}
        for name, idx in self.state_index.items():
            env[name] = self.ctx.inject(self.reg.values(idx), idx)
        return env

    def read_inputs(self, env: dict) -> dict:
        env = dict(env)
        for name, idx in self.input_index.items():
            env[name] = self.ctx.inject(self.reg.values(idx), idx)
        return env

    def eval_expr(self, e: Expr, env: dict) -> SlopeValue:
        if isinstance(e, Var):
            try:
                return env[e.name]
            except KeyError:
                raise AnalysisError(f"unbound variable {e.name!r}") from None
        if isinstance(e, Const):
            return self.ctx.constant(e.value)
        if isinstance(e, BinOp):
            l = self.eval_expr(e.lhs, env)
            r = self.eval_expr(e.rhs, env)
            if e.op == "+":
                return self.ctx.add(l, r)
            if e.op == "-":
                return self.ctx.sub(l, r)
            if e.op == "*":
                return self.ctx.mul(l, r)
            if e.op == "/":
                return self.ctx.div(l, r, where=str(e))
            raise AnalysisError(f"unknown operator {e.op!r}")
        if isinstance(e, SqrtOp):
            return self.ctx.sqrt(self.eval_expr(e.arg, env), where=str(e))
        raise AnalysisError(f"not an expression: {e!r}")

    def exec_instr(self, ins: Instr, env: dict | None) -> dict | None:
        if env is None:
            return None
        if isinstance(ins, Assign):
            env = dict(env)
            value = self.eval_expr(ins.expr, env)
            rng = self.ctx.range_of(value)
            if not rng.is_bottom and (rng.lo == INF or rng.hi == -INF):
                self.ctx.diagnostics.append(
                    Diagnostic(
                        "possible-overflow",
                        f"assigned value overflows: range {rng}",
                        where=ins.target,
                        instant=self.instant,
                    )
                )
            env[ins.target] = value
            return env
        if isinstance(ins, Branch):
            then_env, else_env = self.split_on_guard(ins.cond, env)
            for sub in ins.then_body:
                then_env = self.exec_instr(sub, then_env)
            for sub in ins.else_body:
                else_env = self.exec_instr(sub, else_env)
            return self.join_env(then_env, else_env)
        raise AnalysisError(f"not an instruction: {ins!r}")

    def split_on_guard(self, cond: Cond, env: dict) -> tuple[dict | None, dict | None]:
        value = self.eval_expr(cond.lhs, env)
        then_iv, else_iv = _guard_bounds(cond, self.prof)
        origin = (str(cond.lhs), self.instant)
        branches: list[dict | None] = []
        for bound in (then_iv, else_iv):
            if bound is None:  # the != true branch: no interval refinement
                rng = self.ctx.range_of(value)
                c = self.prof.round_value(cond.rhs)
                if rng.is_point and rng.lo == c:
                    branches.append(None)
                else:
                    branches.append(env)
                continue
            met = self.ctx.meet_interval(value, bound, origin=origin)
            if met is None:
                branches.append(None)
                continue
            refined = dict(env)
            if isinstance(cond.lhs, Var):
                refined[cond.lhs.name] = met
            else:
                self.ctx.diagnostics.append(
                    Diagnostic(
                        "lost-precision",
                        f"guard on compound expression {cond.lhs} not re-bound",
                        where=str(cond.lhs),
                        instant=self.instant,
                    )
                )
            branches.append(refined)
        return branches[0], branches[1]

    def commit_states(self, env: dict) -> dict:
        env = dict(env)
        news = {}
        for state, src in self.program.updates:
            try:
                news[state] = env[src]
            except KeyError:
                raise AnalysisError(f"state source {src!r} unbound") from None
        env.update(news)
        return env

    def snapshot(self, env: dict, t: int) -> InstantRecord:
        bounds = {k: self.ctx.range_of(v) for k, v in env.items()}
        return InstantRecord(t, dict(env), bounds)

    def join_env(self, a: dict | None, b: dict | None) -> dict | None:
        if a is None:
            return b
        if b is None:
            return a
        out = {}
        for k in a.keys() | b.keys():
            if k in a and k in b:
                out[k] = self.ctx.join(a[k], b[k])
            else:
                out[k] = a.get(k, b.get(k))
        return out

    def widen_env(self, a: dict, b: dict) -> dict:
        return {k: self.ctx.widen(a[k], b[k]) if k in a else b[k] for k in b}

    def env_leq(self, a: dict, b: dict) -> bool:
        for k, v in a.items():
            if k not in b or not self.ctx.leq(v, b[k]):
                return False
        return True


class _IntervalExec:
    """Executes the IR over plain intervals on the profile's value grid."""

    def __init__(self, program: Program, prof: PrecisionProfile, opts: AnalyzeOptions):
        if prof.grid is None:
            raise AnalysisError(
                "the interval domain needs a concrete value grid; "
                "use the single or double profile"
            )
        self.program = program
        self.prof = prof
        self.diagnostics: list[Diagnostic] = []
        self.thresholds = (
            opts.thresholds if opts.thresholds is not None else prof.widening_thresholds
        )
        self.instant = 0
        self._b32 = prof.grid == "binary32"

    # endpoint finishing on the format grid
    def _down(self, v64: float, e64: bool) -> float:
        if v64 != v64:
            return -INF
        if not self._b32:
            return ivl._down(v64, e64)
        v32 = round_binary32(v64)
        if e64 and v32 == v64:
            return v32
        return next_down_binary32(v32)

    def _up(self, v64: float, e64: bool) -> float:
        if v64 != v64:
            return INF
        if not self._b32:
            return ivl._up(v64, e64)
        v32 = round_binary32(v64)
        if e64 and v32 == v64:
            return v32
        return next_up_binary32(v32)

    def _add(self, a: Interval, b: Interval, s: float = 1.0) -> Interval:
        lv, le = ivl._sum_rounded(a.lo, s * b.lo if s > 0 else s * b.hi)
        hv, he = ivl._sum_rounded(a.hi, s * b.hi if s > 0 else s * b.lo)
        return Interval(self._down(lv, le), self._up(hv, he))

    def _mul(self, a: Interval, b: Interval) -> Interval:
        lo, hi = INF, -INF
        for x in (a.lo, a.hi):
            for y in (b.lo, b.hi):
                p, e = ivl._prod_rounded(x, y)
                if p != p:
                    return TOP
                lo = min(lo, self._down(p, e))
                hi = max(hi, self._up(p, e))
        return Interval(lo, hi)

    def _div(self, a: Interval, b: Interval) -> Interval:
        lo, hi = INF, -INF
        for x in (a.lo, a.hi):
            for y in (b.lo, b.hi):
                q, e = ivl._quot_rounded(x, y)
                if q != q:
                    return TOP
                lo = min(lo, self._down(q, e))
                hi = max(hi, self._up(q, e))
        return Interval(lo, hi)

    def _sqrt(self, a: Interval) -> Interval:
        lv, le = ivl._root_rounded(a.lo)
        hv, he = ivl._root_rounded(a.hi)
        return Interval(max(self._down(lv, le), 0.0), self._up(hv, he))

    def initial_env(self) -> dict[str, Interval]:
        return {
            d.name: point(self.prof.round_value(d.init)) for d in self.program.states
        }

    def read_inputs(self, env: dict) -> dict:
        env = dict(env)
        for d in self.program.inputs:
            env[d.name] = Interval(
                self.prof.round_value(d.lo), self.prof.round_value(d.hi)
            )
        return env

    def eval_expr(self, e: Expr, env: dict) -> Interval:
        if isinstance(e, Var):
            try:
                return env[e.name]
            except KeyError:
                raise AnalysisError(f"unbound variable {e.name!r}") from None
        if isinstance(e, Const):
            return point(self.prof.round_value(e.value))
        if isinstance(e, BinOp):
            l = self.eval_expr(e.lhs, env)
            r = self.eval_expr(e.rhs, env)
            if l.is_bottom or r.is_bottom:
                return BOTTOM
            if e.op == "+":
                return self._add(l, r)
            if e.op == "-":
                return self._add(l, r, s=-1.0)
            if e.op == "*":
                return self._mul(l, r)
            if e.op == "/":
                if r.lo <= 0.0 <= r.hi:
                    self.diagnostics.append(
                        Diagnostic(
                            "possible-division-by-zero",
                            f"divisor range {r} may contain zero",
                            where=str(e),
                            instant=self.instant,
                        )
                    )
                    return TOP
                return self._div(l, r)
            raise AnalysisError(f"unknown operator {e.op!r}")
        if isinstance(e, SqrtOp):
            a = self.eval_expr(e.arg, env)
            if a.is_bottom:
                return BOTTOM
            if a.lo < 0.0:
                self.diagnostics.append(
                    Diagnostic(
                        "possible-invalid-operand",
                        f"square root of range {a} below zero",
                        where=str(e),
                        instant=self.instant,
                    )
                )
                return TOP
            return self._sqrt(a)
        raise AnalysisError(f"not an expression: {e!r}")

    def exec_instr(self, ins: Instr, env: dict | None) -> dict | None:
        if env is None:
            return None
        if isinstance(ins, Assign):
            env = dict(env)
            value = self.eval_expr(ins.expr, env)
            if not value.is_bottom and (value.lo == INF or value.hi == -INF):
                self.diagnostics.append(
                    Diagnostic(
                        "possible-overflow",
                        f"assigned value overflows: {value}",
                        where=ins.target,
                        instant=self.instant,
                    )
                )
            env[ins.target] = value
            return env
        if isinstance(ins, Branch):
            value = self.eval_expr(ins.cond.lhs, env)
            then_iv, else_iv = _guard_bounds(ins.cond, self.prof)
            then_env: dict | None = dict(env)
            else_env: dict | None = dict(env)
            if then_iv is not None:
                met = ivl.meet(value, then_iv)
                if met.is_bottom:
                    then_env = None
                elif isinstance(ins.cond.lhs, Var):
                    then_env[ins.cond.lhs.name] = met
            else:
                c = self.prof.round_value(ins.cond.rhs)
                if value.is_point and value.lo == c:
                    then_env = None
            if else_iv is not None:
                met = ivl.meet(value, else_iv)
                if met.is_bottom:
                    else_env = None
                elif isinstance(ins.cond.lhs, Var):
                    else_env[ins.cond.lhs.name] = met
            for sub in ins.then_body:
                then_env = self.exec_instr(sub, then_env)
            for sub in ins.else_body:
                else_env = self.exec_instr(sub, else_env)
            return self.join_env(then_env, else_env)
        raise AnalysisError(f"not an instruction: {ins!r}")

    def commit_states(self, env: dict) -> dict:
        env = dict(env)
        news = {s: env[src] for s, src in self.program.updates}
        env.update(news)
        return env

    def snapshot(self, env: dict, t: int) -> InstantRecord:
        return InstantRecord(t, dict(env), dict(env))

    def join_env(self, a: dict | None, b: dict | None) -> dict | None:
        if a is None:
            return b
        if b is None:
            return a
        out = {}
        for k in a.keys() | b.keys():
            if k in a and k in b:
                out[k] = ivl.join(a[k], b[k])
            else:
                out[k] = a.get(k, b.get(k))
        return out

    def widen_env(self, a: dict, b: dict) -> dict:
        return {
            k: ivl.widen(a[k], b[k], self.thresholds) if k in a else b[k] for k in b
        }

    def env_leq(self, a: dict, b: dict) -> bool:
        return all(k in b and ivl.leq(v, b[k]) for k, v in a.items())


def _run_step(ex, env: dict) -> tuple[dict, dict]:
    """One loop body execution: returns (env after outputs, env after commit)."""
    env = ex.read_inputs(env)
    for ins in ex.program.body:
        env = ex.exec_instr(ins, env)
        if env is None:
            raise AnalysisError("whole step became infeasible; model is contradictory")
    return env, ex.commit_states(env)


def analyze(program: Program, options: AnalyzeOptions | None = None) -> AnalysisReport:
    """Run the abstract simulation: path-precise unrolled steps plus the
    widened fixpoint instant that covers every later step."""
    opts = options or AnalyzeOptions()
    prof = get_profile(opts.profile or program.precision)
    steps = opts.unroll if opts.unroll is not None else program.steps
    if opts.domain in ("fps", "real-slope"):
        ex = _FpsExec(program, prof, opts)
    elif opts.domain == "interval":
        ex = _IntervalExec(program, prof, opts)
    else:
        raise AnalysisError(f"unknown domain {opts.domain!r}")

    instants: list[InstantRecord] = []
    env = ex.initial_env()
    for t in range(steps):
        ex.instant = t
        mid_env, env = _run_step(ex, env)
        instants.append(ex.snapshot(mid_env, t))

    limit = None
    limit_iters = 0
    if opts.compute_limit:
        if isinstance(ex, _FpsExec):
            ex.ctx.allow_registry_growth = False
        ex.instant = steps
        acc = env
        cap = 4 * (2 * len(_thresholds_of(ex)) + 2) + opts.widen_delay + 8
        while True:
            if limit_iters >= cap:
                raise AnalysisError("widening fixpoint failed to stabilize")
            _, committed = _run_step(ex, acc)
            if ex.env_leq(committed, acc):
                break
            joined = ex.join_env(acc, committed)
            if limit_iters >= opts.widen_delay:
                acc = ex.widen_env(acc, joined)
            else:
                acc = joined
            limit_iters += 1
        mid_env, _ = _run_step(ex, acc)
        limit = ex.snapshot(mid_env, -1)
        if isinstance(ex, _FpsExec):
            ex.ctx.allow_registry_growth = True

    hull: dict[str, Interval] = {}
    for rec in instants:
        for k, b in rec.bounds.items():
            hull[k] = ivl.join(hull.get(k, BOTTOM), b)

    return AnalysisReport(
        program=program,
        domain=opts.domain,
        profile=prof.name,
        options=opts,
        instants=instants,
        limit=limit,
        window_hull=hull,
        diagnostics=list(ex.diagnostics),
        limit_iterations=limit_iters,
        registry=ex.reg if isinstance(ex, _FpsExec) else None,
    )


def _thresholds_of(ex) -> tuple[float, ...]:
    if isinstance(ex, _FpsExec):
        return ex.ctx.thresholds
    return ex.thresholds
