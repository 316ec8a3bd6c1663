"""Real-arithmetic expansion baselines for straight-line expressions.

These evaluators quantify what the floating-point adaptation adds on top of
the classical enclosures: the slope form (first-order expansion around the
box midpoint with slope intervals), the derivative (mean value) form, and
plain interval evaluation.  All three run in outward-rounded binary64 with
no rounding-error terms.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import interval as ivl
from .interval import Interval, point
from .profiles import DOUBLE
from .program import BinOp, Const, Expr, SqrtOp, Var
from .slopes import IndRegistry, SlopeContext, SlopeValue


@dataclass(frozen=True)
class SlopeExpansion:
    center: Interval  # value at the expansion point
    slopes: tuple[Interval, ...]
    enclosure: Interval
    variables: tuple[str, ...]


@dataclass(frozen=True)
class DerivativeExpansion:
    center: Interval
    derivatives: tuple[Interval, ...]
    enclosure: Interval
    variables: tuple[str, ...]


def real_slope_eval(
    expr: Expr,
    variables: dict[str, Interval],
    *,
    dual_slope_forms: bool = False,
) -> SlopeExpansion:
    """Slope expansion of ``expr`` over the box ``variables``, expanded at
    the box midpoints."""
    reg = IndRegistry()
    ctx = SlopeContext(
        reg, DOUBLE, rounding_model=False, dual_slope_forms=dual_slope_forms
    )
    env: dict[str, SlopeValue] = {}
    for name, iv in variables.items():
        idx = reg.register(name, iv)
        env[name] = ctx.inject(iv, idx)

    def walk(e: Expr) -> SlopeValue:
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, Const):
            return ctx.constant(e.value)
        if isinstance(e, BinOp):
            l, r = walk(e.lhs), walk(e.rhs)
            if e.op == "+":
                return ctx.add(l, r)
            if e.op == "-":
                return ctx.sub(l, r)
            if e.op == "*":
                return ctx.mul(l, r)
            if e.op == "/":
                return ctx.div(l, r, where=str(e))
            raise ValueError(f"unknown operator {e.op!r}")
        if isinstance(e, SqrtOp):
            return ctx.sqrt(walk(e.arg), where=str(e))
        raise TypeError(e)

    v = ctx.pad(walk(expr))
    return SlopeExpansion(v.m, v.s, ctx.range_of(v), tuple(variables))


def naive_interval_eval(expr: Expr, variables: dict[str, Interval]) -> Interval:
    """Plain interval extension: substitute intervals for variables."""
    if isinstance(expr, Var):
        return variables[expr.name]
    if isinstance(expr, Const):
        return point(expr.value)
    if isinstance(expr, BinOp):
        l = naive_interval_eval(expr.lhs, variables)
        r = naive_interval_eval(expr.rhs, variables)
        return {"+": ivl.add, "-": ivl.sub, "*": ivl.mul, "/": ivl.div}[expr.op](l, r)
    if isinstance(expr, SqrtOp):
        return ivl.sqrt(naive_interval_eval(expr.arg, variables))
    raise TypeError(expr)


def real_derivative_eval(
    expr: Expr, variables: dict[str, Interval]
) -> DerivativeExpansion:
    """Mean-value form: f(z) + f'(X) . (X - z) with the derivative evaluated
    by interval automatic differentiation over the whole box."""
    names = tuple(variables)
    index = {n: i for i, n in enumerate(names)}
    n = len(names)
    centers = {name: ivl.mid_or_fallback(iv) for name, iv in variables.items()}

    def walk(e: Expr) -> tuple[Interval, Interval, tuple[Interval, ...]]:
        # returns (value at z, value over X, derivative vector over X)
        if isinstance(e, Var):
            z = point(centers[e.name])
            d = [ivl.ZERO] * n
            d[index[e.name]] = ivl.ONE
            return z, variables[e.name], tuple(d)
        if isinstance(e, Const):
            c = point(expr_value(e))
            return c, c, (ivl.ZERO,) * n
        if isinstance(e, BinOp):
            fz_g, fx_g, d_g = walk(e.lhs)
            fz_h, fx_h, d_h = walk(e.rhs)
            if e.op == "+":
                return (
                    ivl.add(fz_g, fz_h),
                    ivl.add(fx_g, fx_h),
                    tuple(ivl.add(a, b) for a, b in zip(d_g, d_h)),
                )
            if e.op == "-":
                return (
                    ivl.sub(fz_g, fz_h),
                    ivl.sub(fx_g, fx_h),
                    tuple(ivl.sub(a, b) for a, b in zip(d_g, d_h)),
                )
            if e.op == "*":
                return (
                    ivl.mul(fz_g, fz_h),
                    ivl.mul(fx_g, fx_h),
                    tuple(
                        ivl.add(ivl.mul(a, fx_h), ivl.mul(fx_g, b))
                        for a, b in zip(d_g, d_h)
                    ),
                )
            if e.op == "/":
                den = ivl.mul(fx_h, fx_h)
                return (
                    ivl.div(fz_g, fz_h),
                    ivl.div(fx_g, fx_h),
                    tuple(
                        ivl.div(ivl.sub(ivl.mul(a, fx_h), ivl.mul(b, fx_g)), den)
                        for a, b in zip(d_g, d_h)
                    ),
                )
            raise ValueError(f"unknown operator {e.op!r}")
        if isinstance(e, SqrtOp):
            fz_g, fx_g, d_g = walk(e.arg)
            rx = ivl.sqrt(fx_g)
            half = point(0.5)
            return (
                ivl.sqrt(fz_g),
                rx,
                tuple(ivl.div(ivl.mul(half, a), rx) for a in d_g),
            )
        raise TypeError(e)

    fz, _, d = walk(expr)
    acc = fz
    for i, name in enumerate(names):
        delta = ivl.sub(variables[name], point(centers[name]))
        acc = ivl.add(acc, ivl.mul(d[i], delta))
    return DerivativeExpansion(fz, d, acc, names)


def expr_value(e: Const) -> float:
    return float(e.value)
