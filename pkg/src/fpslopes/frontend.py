"""Textual block-diagram models and their lowering to the program IR.

The model language is line oriented: one ``name = block(args)`` definition
per statement (argument lists may span lines until the parenthesis closes),
plus a ``simulate steps=N precision=P`` directive.  Blocks mirror the usual
discrete-time diagram vocabulary: input, const, gain, sum, product, div,
sqrt, switch, delay, output.  See docs/dsl.md for the grammar.

Lowering emits the three-phase loop body: inputs are read, every non-delay
block becomes one assignment (switch becomes a guarded branch) in
topological order, and delay updates are committed at the end of the step.
Sum and product chains associate left in declaration order; association is
normative because it changes floating-point results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .program import (
    Assign,
    BinOp,
    Branch,
    Cond,
    Const,
    Expr,
    InputDecl,
    Instr,
    Program,
    SqrtOp,
    StateDecl,
    Var,
)


class ModelError(ValueError):
    """Parse or validation failure; carries every collected message."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class InputBlock:
    lo: float
    hi: float


@dataclass(frozen=True)
class ConstBlock:
    value: float


@dataclass(frozen=True)
class GainBlock:
    k: float
    src: str


@dataclass(frozen=True)
class SumBlock:
    signs: str
    srcs: tuple[str, ...]


@dataclass(frozen=True)
class ProductBlock:
    srcs: tuple[str, ...]


@dataclass(frozen=True)
class DivBlock:
    num: str
    den: str


@dataclass(frozen=True)
class SqrtBlock:
    src: str


@dataclass(frozen=True)
class SwitchBlock:
    pred: str
    op: str  # '>=', '>', '!='
    c: float
    then_src: str
    else_src: str


@dataclass(frozen=True)
class DelayBlock:
    init: float
    src: str


@dataclass(frozen=True)
class OutputBlock:
    src: str


Block = (
    InputBlock
    | ConstBlock
    | GainBlock
    | SumBlock
    | ProductBlock
    | DivBlock
    | SqrtBlock
    | SwitchBlock
    | DelayBlock
    | OutputBlock
)


@dataclass
class Model:
    name: str
    blocks: dict[str, Block]
    steps: int = 1
    precision: str = "double"


def _parse_number(tok: str, line: int, errors: list[str]) -> float:
    tok = tok.strip()
    try:
        if tok.lower().startswith(("0x", "-0x", "+0x")):
            return float.fromhex(tok)
        return float(tok)
    except ValueError:
        errors.append(f"line {line}: not a number: {tok!r}")
        return math.nan


def _block_sources(b: Block) -> tuple[str, ...]:
    if isinstance(b, (InputBlock, ConstBlock)):
        return ()
    if isinstance(b, GainBlock):
        return (b.src,)
    if isinstance(b, SumBlock):
        return b.srcs
    if isinstance(b, ProductBlock):
        return b.srcs
    if isinstance(b, DivBlock):
        return (b.num, b.den)
    if isinstance(b, SqrtBlock):
        return (b.src,)
    if isinstance(b, SwitchBlock):
        return (b.pred, b.then_src, b.else_src)
    if isinstance(b, DelayBlock):
        return (b.src,)
    if isinstance(b, OutputBlock):
        return (b.src,)
    raise TypeError(b)


def _logical_statements(text: str) -> list[tuple[int, str]]:
    """Join lines until parentheses balance; returns (first line no, stmt)."""
    out: list[tuple[int, str]] = []
    buf: list[str] = []
    start = 0
    depth = 0
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip() and depth == 0:
            continue
        if not buf:
            start = i
        buf.append(line)
        depth += line.count("(") - line.count(")")
        if depth <= 0:
            out.append((start, " ".join(buf).strip()))
            buf = []
            depth = 0
    if buf:
        out.append((start, " ".join(buf).strip()))
    return out


_VALID_SIGNS = frozenset("+-")
_COND_OPS = (">=", ">", "!=")


def parse_model(text: str, name: str = "model") -> Model:
    """Parse the textual DSL; raises ModelError listing every problem."""
    errors: list[str] = []
    blocks: dict[str, Block] = {}
    steps = None
    precision = None

    for lineno, stmt in _logical_statements(text):
        if stmt.startswith("simulate"):
            for part in stmt[len("simulate") :].split():
                if "=" not in part:
                    errors.append(f"line {lineno}: bad simulate option {part!r}")
                    continue
                key, val = part.split("=", 1)
                if key == "steps":
                    try:
                        steps = int(val)
                    except ValueError:
                        errors.append(f"line {lineno}: steps must be an integer")
                elif key == "precision":
                    precision = val
                else:
                    errors.append(f"line {lineno}: unknown simulate option {key!r}")
            continue
        if "=" not in stmt:
            errors.append(f"line {lineno}: expected 'name = block(...)'")
            continue
        lhs, rhs = stmt.split("=", 1)
        bname = lhs.strip()
        rhs = rhs.strip()
        if not bname.isidentifier():
            errors.append(f"line {lineno}: bad block name {bname!r}")
            continue
        if bname in blocks:
            errors.append(f"line {lineno}: duplicate block {bname!r}")
            continue
        if "(" not in rhs or not rhs.endswith(")"):
            errors.append(f"line {lineno}: expected 'kind(args)' after '='")
            continue
        kind, argstr = rhs.split("(", 1)
        kind = kind.strip()
        args = [a.strip() for a in argstr[:-1].split(",")] if argstr[:-1].strip() else []

        def num(tok: str) -> float:
            return _parse_number(tok, lineno, errors)

        if kind == "input" and len(args) == 2:
            blocks[bname] = InputBlock(num(args[0]), num(args[1]))
        elif kind == "const" and len(args) == 1:
            blocks[bname] = ConstBlock(num(args[0]))
        elif kind == "gain" and len(args) == 2:
            blocks[bname] = GainBlock(num(args[0]), args[1])
        elif kind == "sum" and len(args) >= 2:
            signs = args[0]
            srcs = tuple(args[1:])
            if not signs or set(signs) - _VALID_SIGNS:
                errors.append(f"line {lineno}: sum signs must be '+'/'-': {signs!r}")
            elif len(signs) != len(srcs):
                errors.append(
                    f"line {lineno}: sum has {len(signs)} signs but {len(srcs)} sources"
                )
            else:
                blocks[bname] = SumBlock(signs, srcs)
        elif kind == "product" and len(args) >= 2:
            blocks[bname] = ProductBlock(tuple(args))
        elif kind == "div" and len(args) == 2:
            blocks[bname] = DivBlock(args[0], args[1])
        elif kind == "sqrt" and len(args) == 1:
            blocks[bname] = SqrtBlock(args[0])
        elif kind == "switch" and len(args) == 5:
            if args[1] not in _COND_OPS:
                errors.append(f"line {lineno}: switch operator must be >=, > or !=")
            else:
                blocks[bname] = SwitchBlock(args[0], args[1], num(args[2]), args[3], args[4])
        elif kind == "delay" and len(args) == 2:
            blocks[bname] = DelayBlock(num(args[0]), args[1])
        elif kind == "output" and len(args) == 1:
            blocks[bname] = OutputBlock(args[0])
        else:
            errors.append(f"line {lineno}: unknown block or wrong arity: {kind}({len(args)} args)")

    model = Model(name, blocks, steps or 1, precision or "double")
    errors.extend(validate_model(model))
    if errors:
        raise ModelError(errors)
    if steps is None:
        model.steps = 1
    return model


def validate_model(model: Model) -> list[str]:
    errors: list[str] = []
    blocks = model.blocks
    if not any(isinstance(b, OutputBlock) for b in blocks.values()):
        errors.append("no output block")
    for bname, b in blocks.items():
        for src in _block_sources(b):
            if src not in blocks:
                errors.append(f"block {bname!r} references unknown block {src!r}")
    if errors:
        return errors
    # every cycle must pass through a delay block
    color: dict[str, int] = {}
    stack_path: list[str] = []

    def visit(n: str) -> None:
        color[n] = 1
        stack_path.append(n)
        b = blocks[n]
        if not isinstance(b, DelayBlock):
            for src in _block_sources(b):
                c = color.get(src, 0)
                if c == 1:
                    cyc = stack_path[stack_path.index(src) :] + [src]
                    errors.append("delay-free cycle: " + " -> ".join(cyc))
                elif c == 0:
                    visit(src)
        stack_path.pop()
        color[n] = 2

    for bname in blocks:
        if color.get(bname, 0) == 0:
            visit(bname)
    return errors


def format_model(model: Model) -> str:
    """Print a model back to DSL text; parse(format(m)) == m structurally."""
    lines: list[str] = []
    for name, b in model.blocks.items():
        if isinstance(b, InputBlock):
            lines.append(f"{name} = input({b.lo!r}, {b.hi!r})")
        elif isinstance(b, ConstBlock):
            lines.append(f"{name} = const({b.value!r})")
        elif isinstance(b, GainBlock):
            lines.append(f"{name} = gain({b.k!r}, {b.src})")
        elif isinstance(b, SumBlock):
            lines.append(f"{name} = sum({b.signs}, {', '.join(b.srcs)})")
        elif isinstance(b, ProductBlock):
            lines.append(f"{name} = product({', '.join(b.srcs)})")
        elif isinstance(b, DivBlock):
            lines.append(f"{name} = div({b.num}, {b.den})")
        elif isinstance(b, SqrtBlock):
            lines.append(f"{name} = sqrt({b.src})")
        elif isinstance(b, SwitchBlock):
            lines.append(
                f"{name} = switch({b.pred}, {b.op}, {b.c!r}, {b.then_src}, {b.else_src})"
            )
        elif isinstance(b, DelayBlock):
            lines.append(f"{name} = delay({b.init!r}, {b.src})")
        elif isinstance(b, OutputBlock):
            lines.append(f"{name} = output({b.src})")
    lines.append(f"simulate steps={model.steps} precision={model.precision}")
    return "\n".join(lines) + "\n"


# expression-tree depth above which sum/product chains spill to temporaries
_CHAIN_LIMIT = 64


def _topo_order(model: Model) -> list[str]:
    """Non-delay blocks in dependency order (delay reads break cycles)."""
    blocks = model.blocks
    order: list[str] = []
    state = {}

    def visit(n: str) -> None:
        if state.get(n) == 2:
            return
        state[n] = 1
        b = blocks[n]
        if not isinstance(b, (DelayBlock, InputBlock)):
            for src in _block_sources(b):
                if not isinstance(blocks[src], (DelayBlock, InputBlock)):
                    if state.get(src) != 2:
                        visit(src)
        state[n] = 2
        order.append(n)

    for name in blocks:
        visit(name)
    return order


def lower_to_program(model: Model) -> Program:
    """Emit the three-phase loop body for the analyzer and the oracle."""
    blocks = model.blocks
    inputs = tuple(
        InputDecl(n, b.lo, b.hi) for n, b in blocks.items() if isinstance(b, InputBlock)
    )
    states = tuple(
        StateDecl(n, b.init) for n, b in blocks.items() if isinstance(b, DelayBlock)
    )
    updates = tuple(
        (n, b.src) for n, b in blocks.items() if isinstance(b, DelayBlock)
    )
    outputs = tuple(n for n, b in blocks.items() if isinstance(b, OutputBlock))

    body: list[Instr] = []
    for name in _topo_order(model):
        b = blocks[name]
        if isinstance(b, (InputBlock, DelayBlock)):
            continue
        if isinstance(b, ConstBlock):
            body.append(Assign(name, Const(b.value)))
        elif isinstance(b, GainBlock):
            body.append(Assign(name, BinOp("*", Const(b.k), Var(b.src))))
        elif isinstance(b, SumBlock):
            acc: Expr
            if b.signs[0] == "+":
                acc = Var(b.srcs[0])
            else:
                acc = BinOp("-", Const(0.0), Var(b.srcs[0]))
            depth = 0
            for k, (sign, src) in enumerate(zip(b.signs[1:], b.srcs[1:])):
                acc = BinOp("+" if sign == "+" else "-", acc, Var(src))
                depth += 1
                # long chains spill to accumulator wires to keep trees shallow
                if depth >= _CHAIN_LIMIT and k < len(b.srcs) - 2:
                    t = f"{name}__acc{k + 1}"
                    body.append(Assign(t, acc))
                    acc = Var(t)
                    depth = 0
            body.append(Assign(name, acc))
        elif isinstance(b, ProductBlock):
            acc = Var(b.srcs[0])
            depth = 0
            for k, src in enumerate(b.srcs[1:]):
                acc = BinOp("*", acc, Var(src))
                depth += 1
                if depth >= _CHAIN_LIMIT and k < len(b.srcs) - 2:
                    t = f"{name}__acc{k + 1}"
                    body.append(Assign(t, acc))
                    acc = Var(t)
                    depth = 0
            body.append(Assign(name, acc))
        elif isinstance(b, DivBlock):
            body.append(Assign(name, BinOp("/", Var(b.num), Var(b.den))))
        elif isinstance(b, SqrtBlock):
            body.append(Assign(name, SqrtOp(Var(b.src))))
        elif isinstance(b, SwitchBlock):
            body.append(
                Branch(
                    Cond(Var(b.pred), b.op, b.c),
                    (Assign(name, Var(b.then_src)),),
                    (Assign(name, Var(b.else_src)),),
                )
            )
        elif isinstance(b, OutputBlock):
            body.append(Assign(name, Var(b.src)))

    return Program(
        inputs=inputs,
        states=states,
        body=tuple(body),
        updates=updates,
        outputs=outputs,
        steps=model.steps,
        precision=model.precision,
        name=model.name,
    )


def load_model(path: str) -> Model:
    import os

    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_model(text, name=os.path.splitext(os.path.basename(path))[0])
