"""AST for the analysis language.

Nodes are frozen dataclasses; source positions are carried on the side
(compare=False) so that structural equality ignores layout, which is what
the parse/pretty-print round-trip law needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..probcore import Domain, Value


@dataclass(frozen=True)
class Pos:
    line: int
    col: int


def _pos_field():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Visibility:
    """Global-visible, global-hidden, or visible to a set of agents."""

    kind: str  # 'vis' | 'hid'
    agents: Optional[tuple[str, ...]] = None  # only with kind == 'vis'

    def __post_init__(self):
        if self.kind not in ("vis", "hid"):
            raise ValueError(self.kind)
        if self.agents is not None and self.kind != "vis":
            raise ValueError("agent sets only apply to vis")

    @property
    def is_global_visible(self):
        return self.kind == "vis" and self.agents is None

    @property
    def is_global_hidden(self):
        return self.kind == "hid"

    def __str__(self):
        if self.kind == "hid":
            return "hid"
        if self.agents is None:
            return "vis"
        return "vis{" + ",".join(self.agents) + "}"


VIS = Visibility("vis")
HID = Visibility("hid")


@dataclass(frozen=True)
class VarDecl:
    name: str
    domain: Domain
    visibility: Visibility
    pos: Optional[Pos] = _pos_field()


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

class Expr:
    pass


@dataclass(frozen=True)
class Lit(Expr):
    value: Value
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Name(Expr):
    ident: str
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Unop(Expr):
    op: str  # '-' | 'not'
    operand: Expr
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Binop(Expr):
    op: str  # + - * / div mod = != < <= > >= and or xor
    left: Expr
    right: Expr
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class IfExpr(Expr):
    """`then_branch if guard else else_branch` (guard in the middle)."""

    then_branch: Expr
    guard: Expr
    else_branch: Expr
    pos: Optional[Pos] = _pos_field()


# ---------------------------------------------------------------------------
# Distribution expressions
# ---------------------------------------------------------------------------

class DistExpr:
    pass


@dataclass(frozen=True)
class DistExplicit(DistExpr):
    entries: tuple[tuple[Expr, Expr], ...]  # (value expr, probability expr)
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class DistUniform(DistExpr):
    exprs: tuple[Expr, ...]
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class DistCond(DistExpr):
    then_branch: DistExpr
    guard: Expr
    else_branch: DistExpr
    pos: Optional[Pos] = _pos_field()


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------

class Program:
    pass


@dataclass(frozen=True)
class Skip(Program):
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Assign(Program):
    target: str
    expr: Expr
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Choose(Program):
    target: str
    dist: DistExpr
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class XorAssign(Program):
    """`(x xor y) := e`: set x,y jointly so that x xor y = e, uniformly."""

    first: str
    second: str
    expr: Expr
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Seq(Program):
    first: Program
    second: Program
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class GeneralChoice(Program):
    """Run left with probability prob (an expression in v,h), else right."""

    left: Program
    prob: Expr
    right: Program
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Cond(Program):
    guard: Expr
    then_branch: Program
    else_branch: Program
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Atomic(Program):
    body: Program
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Reveal(Program):
    expr: Expr
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class LocalDecl:
    decl: VarDecl
    init: Optional[DistExpr]  # None only under the uniform-default flag


@dataclass(frozen=True)
class LocalBlock(Program):
    decls: tuple[LocalDecl, ...]
    body: Program
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Module:
    """A parsed source file: global declarations plus one program."""

    decls: tuple[VarDecl, ...]
    body: Program

    def decl_map(self) -> dict[str, VarDecl]:
        return {d.name: d for d in self.decls}


def seq_of(*programs: Program) -> Program:
    """Right-fold statements into nested Seq (identity for one statement)."""
    if not programs:
        return Skip()
    out = programs[-1]
    for p in reversed(programs[:-1]):
        out = Seq(p, out)
    return out


def node_count(p: Program) -> int:
    if isinstance(p, (Skip, Assign, Choose, XorAssign, Reveal)):
        return 1
    if isinstance(p, Seq):
        return 1 + node_count(p.first) + node_count(p.second)
    if isinstance(p, GeneralChoice):
        return 1 + node_count(p.left) + node_count(p.right)
    if isinstance(p, Cond):
        return 1 + node_count(p.then_branch) + node_count(p.else_branch)
    if isinstance(p, Atomic):
        return 1 + node_count(p.body)
    if isinstance(p, LocalBlock):
        return 1 + node_count(p.body)
    raise TypeError(p)
