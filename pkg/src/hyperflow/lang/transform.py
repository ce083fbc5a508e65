"""Program transformations: per-agent view projection and desugaring."""

from __future__ import annotations

import itertools
from typing import Optional

from ..errors import UnknownAgent
from ..probcore import Domain, vbool, vnum
from . import ast as A


# ---------------------------------------------------------------------------
# Per-agent views
# ---------------------------------------------------------------------------

def agents_of(module: A.Module) -> set[str]:
    """All agent names mentioned in any visibility annotation."""
    found: set[str] = set()

    def from_decl(d: A.VarDecl):
        if d.visibility.agents:
            found.update(d.visibility.agents)

    def walk(p: A.Program):
        if isinstance(p, A.LocalBlock):
            for ld in p.decls:
                from_decl(ld.decl)
            walk(p.body)
        elif isinstance(p, A.Seq):
            walk(p.first)
            walk(p.second)
        elif isinstance(p, A.GeneralChoice):
            walk(p.left)
            walk(p.right)
        elif isinstance(p, A.Cond):
            walk(p.then_branch)
            walk(p.else_branch)
        elif isinstance(p, A.Atomic):
            walk(p.body)

    for d in module.decls:
        from_decl(d)
    walk(module.body)
    return found


def _project_decl(d: A.VarDecl, agent: Optional[str]) -> A.VarDecl:
    if d.visibility.agents is None:
        return d  # global markers are observer-independent
    seen = agent is not None and agent in d.visibility.agents
    return A.VarDecl(d.name, d.domain, A.VIS if seen else A.HID, d.pos)


def project_view(module: A.Module, agent: Optional[str]) -> A.Module:
    """The module as observed by one agent.

    Variables whose agent set contains `agent` become globally visible, all
    other agent-annotated variables become hidden.  `agent=None` is the
    external observer, who sees only globally visible variables (and every
    reveal, which stays a reveal).  A module with no agent annotations is
    returned unchanged (so projection is idempotent); naming an agent that
    an annotated module never mentions is an error.
    """
    known = agents_of(module)
    if agent is not None and known and agent not in known:
        raise UnknownAgent(f"agent {agent!r} appears in no visibility annotation")

    def walk(p: A.Program) -> A.Program:
        if isinstance(p, A.LocalBlock):
            decls = tuple(
                A.LocalDecl(_project_decl(ld.decl, agent), ld.init) for ld in p.decls
            )
            return A.LocalBlock(decls, walk(p.body), p.pos)
        if isinstance(p, A.Seq):
            return A.Seq(walk(p.first), walk(p.second), p.pos)
        if isinstance(p, A.GeneralChoice):
            return A.GeneralChoice(walk(p.left), p.prob, walk(p.right), p.pos)
        if isinstance(p, A.Cond):
            return A.Cond(p.guard, walk(p.then_branch), walk(p.else_branch), p.pos)
        if isinstance(p, A.Atomic):
            return A.Atomic(walk(p.body), p.pos)
        return p

    decls = tuple(_project_decl(d, agent) for d in module.decls)
    return A.Module(decls, walk(module.body))


# ---------------------------------------------------------------------------
# Desugaring
# ---------------------------------------------------------------------------

def _all_names(module: A.Module) -> set[str]:
    names: set[str] = set()

    def walk(p: A.Program):
        if isinstance(p, A.LocalBlock):
            for ld in p.decls:
                names.add(ld.decl.name)
            walk(p.body)
        elif isinstance(p, A.Seq):
            walk(p.first)
            walk(p.second)
        elif isinstance(p, A.GeneralChoice):
            walk(p.left)
            walk(p.right)
        elif isinstance(p, A.Cond):
            walk(p.then_branch)
            walk(p.else_branch)
        elif isinstance(p, A.Atomic):
            walk(p.body)

    names.update(d.name for d in module.decls)
    walk(module.body)
    return names


def _expr_value_range(expr: A.Expr, decls: dict[str, A.VarDecl]):
    """All values expr can take over the declared domains of its variables."""
    from ..semantics import eval_expr, base_env  # late import, avoids a cycle

    free = sorted(_free_names(expr) & decls.keys())
    env0 = base_env(decls.values())
    out = []
    for combo in itertools.product(*(decls[n].domain.values for n in free)):
        env = dict(env0)
        env.update(zip(free, combo))
        v = eval_expr(expr, env)
        if v not in out:
            out.append(v)
    return sorted(out, key=lambda v: v.key())


def _free_names(e: A.Expr) -> set[str]:
    if isinstance(e, A.Name):
        return {e.ident}
    if isinstance(e, A.Unop):
        return _free_names(e.operand)
    if isinstance(e, A.Binop):
        return _free_names(e.left) | _free_names(e.right)
    if isinstance(e, A.IfExpr):
        return _free_names(e.then_branch) | _free_names(e.guard) | _free_names(e.else_branch)
    return set()


class _Desugarer:
    def __init__(self, module: A.Module):
        self.taken = _all_names(module)
        self.counter = itertools.count(1)
        self.module = module

    def fresh(self, stem: str) -> str:
        while True:
            name = f"{stem}_{next(self.counter)}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def walk(self, p: A.Program, decls: dict[str, A.VarDecl]) -> A.Program:
        if isinstance(p, A.Reveal):
            # publish E to everyone: a fresh globally visible local set to E
            name = self.fresh("reveal")
            values = tuple(_expr_value_range(p.expr, decls))
            decl = A.VarDecl(name, Domain(name, values), A.VIS, p.pos)
            init = A.DistExplicit(((A.Lit(values[0]), A.Lit(vnum(1))),))
            return A.LocalBlock(
                (A.LocalDecl(decl, init),), A.Assign(name, p.expr), p.pos
            )
        if isinstance(p, A.XorAssign):
            # set the pair uniformly subject to first xor second = e
            flip = A.Choose(
                p.first,
                A.DistUniform((A.Lit(vbool(False)), A.Lit(vbool(True)))),
                p.pos,
            )
            fix = A.Assign(p.second, A.Binop("xor", A.Name(p.first), p.expr), p.pos)
            return A.Seq(flip, fix, p.pos)
        if isinstance(p, A.Seq):
            return A.Seq(self.walk(p.first, decls), self.walk(p.second, decls), p.pos)
        if isinstance(p, A.GeneralChoice):
            return A.GeneralChoice(self.walk(p.left, decls), p.prob, self.walk(p.right, decls), p.pos)
        if isinstance(p, A.Cond):
            return A.Cond(p.guard, self.walk(p.then_branch, decls), self.walk(p.else_branch, decls), p.pos)
        if isinstance(p, A.Atomic):
            return A.Atomic(self.walk(p.body, decls), p.pos)
        if isinstance(p, A.LocalBlock):
            inner = dict(decls)
            for ld in p.decls:
                inner[ld.decl.name] = ld.decl
            return A.LocalBlock(p.decls, self.walk(p.body, inner), p.pos)
        return p


def desugar(module: A.Module) -> A.Module:
    """Rewrite every reveal to its local-block form and expand xor-assignments."""
    d = _Desugarer(module)
    return A.Module(module.decls, d.walk(module.body, module.decl_map()))


def has_construct(p: A.Program, kinds: tuple[type, ...]) -> bool:
    if isinstance(p, kinds):
        return True
    if isinstance(p, A.Seq):
        return has_construct(p.first, kinds) or has_construct(p.second, kinds)
    if isinstance(p, A.GeneralChoice):
        return has_construct(p.left, kinds) or has_construct(p.right, kinds)
    if isinstance(p, A.Cond):
        return has_construct(p.then_branch, kinds) or has_construct(p.else_branch, kinds)
    if isinstance(p, A.Atomic):
        return has_construct(p.body, kinds)
    if isinstance(p, A.LocalBlock):
        return has_construct(p.body, kinds)
    return False
