"""Dataflow program IR: expressions, instructions and the simulation loop.

A program is one loop body executed for a fixed number of steps.  Each step
evaluates the inputs, runs the body (assignments and guarded branches) and
then commits the state updates simultaneously, which is how unit delays
behave in discrete-time block diagrams.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __str__(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # '+', '-', '*', '/'
    lhs: Expr
    rhs: Expr

    def __str__(self) -> str:
        return f"({self.lhs} {self.op} {self.rhs})"


@dataclass(frozen=True)
class SqrtOp(Expr):
    arg: Expr

    def __str__(self) -> str:
        return f"sqrt({self.arg})"


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, BinOp):
        return free_vars(e.lhs) | free_vars(e.rhs)
    if isinstance(e, SqrtOp):
        return free_vars(e.arg)
    raise TypeError(f"not an expression: {e!r}")


COND_OPS = (">=", ">", "!=")


@dataclass(frozen=True)
class Cond:
    """Switch predicate: expr op constant, with op in {>=, >, !=}."""

    lhs: Expr
    op: str
    rhs: float

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs!r}"


class Instr:
    __slots__ = ()


@dataclass(frozen=True)
class Assign(Instr):
    target: str
    expr: Expr

    def __str__(self) -> str:
        return f"{self.target} := {self.expr}"


@dataclass(frozen=True)
class Branch(Instr):
    cond: Cond
    then_body: tuple[Instr, ...]
    else_body: tuple[Instr, ...]

    def __str__(self) -> str:
        return f"if {self.cond} then {{...}} else {{...}}"


@dataclass(frozen=True)
class InputDecl:
    name: str
    lo: float
    hi: float


@dataclass(frozen=True)
class StateDecl:
    name: str
    init: float


@dataclass(frozen=True)
class Program:
    inputs: tuple[InputDecl, ...]
    states: tuple[StateDecl, ...]
    body: tuple[Instr, ...]
    updates: tuple[tuple[str, str], ...]  # (state var, source var)
    outputs: tuple[str, ...]
    steps: int = 1
    precision: str = "double"
    name: str = "program"

    def variables(self) -> list[str]:
        """All variables in definition order: inputs, states, then assigned."""
        seen: list[str] = [d.name for d in self.inputs]
        seen += [d.name for d in self.states]

        def walk(instrs: tuple[Instr, ...]) -> None:
            for ins in instrs:
                if isinstance(ins, Assign):
                    if ins.target not in seen:
                        seen.append(ins.target)
                else:
                    walk(ins.then_body)
                    walk(ins.else_body)

        walk(self.body)
        return seen
