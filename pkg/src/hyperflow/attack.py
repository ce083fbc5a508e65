"""Attack-context synthesis: from a refinement failure to a verified
vulnerability gap.

When spec and impl are functionally equal but the impl's partition at some
visible value v' is not reachable by merging spec fractions, that partition
lies strictly outside a convex set (all refinements of the spec partition),
so a hyperplane separates them.  The hyperplane's normal, transposed and
normalised, becomes a stochastic channel on the hidden state; wrapping it
in `if v = v' then h <- row(h) else h := const fi` yields a context under
which the impl is strictly more vulnerable to a single guess than the spec.

Two routes produce the normal: the Farkas certificate of the failed
refinement LP (free, the default) and an explicit vertex-enumeration LP
that maximises the separation margin (used to cross-check on small
instances).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import (
    InternalError,
    NotSeparable,
    PreconditionViolated,
    UnsupportedConstruct,
    VertexBudgetExceeded,
)
from .lang import ast as A
from .lang.transform import desugar
from .lp import LinearProgram, solve_max
from .matrix import RatMatrix
from .measures import bayes_vuln
from .probcore import ONE, ZERO, Value, value_key, vnum
from .refine import NotRefined, Partition, check_refinement, refinement_lp
from .semantics import Scope, SplitState, eval as eval_hyper

DEFAULT_VERTEX_CAP = 2 ** 20


@dataclass
class SeparatingDirection:
    """Normal X (target fractions x hidden values) with a positive margin:
    every refinement of the source partition scores at least `margin`
    below the target partition under the dot product with X."""

    x: RatMatrix
    margin: Fraction
    h_columns: list  # hidden tuples indexing X's columns


def _score_table(x: RatMatrix, mat_s: RatMatrix) -> list[list[Fraction]]:
    """s[r][c] = (row r of X) . (fraction c of the source)."""
    return [
        [
            sum((x[r, h] * mat_s[c, h] for h in range(x.ncols)), ZERO)
            for c in range(mat_s.nrows)
        ]
        for r in range(x.nrows)
    ]


def refinement_score_range(x: RatMatrix, mat_s: RatMatrix) -> tuple[Fraction, Fraction]:
    """Exact min and max of dot(M x mat_s, X) over all simple M: each source
    fraction is assigned independently to its best (or worst) X row."""
    s = _score_table(x, mat_s)
    lo = sum((min(s[r][c] for r in range(x.nrows)) for c in range(mat_s.nrows)), ZERO)
    hi = sum((max(s[r][c] for r in range(x.nrows)) for c in range(mat_s.nrows)), ZERO)
    return lo, hi


def _matrices(pi_s: Partition, pi_i: Partition) -> tuple[RatMatrix, RatMatrix, list]:
    h_columns = sorted(set(pi_s.h_support()) | set(pi_i.h_support()), key=value_key)
    return pi_s.matrix(h_columns), pi_i.matrix(h_columns), h_columns


def separating_direction_from_certificate(
    pi_s: Partition, pi_i: Partition, certificate: Optional[list] = None
) -> SeparatingDirection:
    """Read the separating normal off the refinement LP's Farkas certificate.

    The certificate multipliers on the product equations form exactly a
    matrix X with dot(R x Pi_S, X) < dot(Pi_I, X) for every refinement R.
    """
    mat_s, mat_i, h_columns = _matrices(pi_s, pi_i)
    if certificate is None:
        from .lp import InfeasibleCert, solve_feasibility

        result = solve_feasibility(refinement_lp(mat_s, mat_i))
        if not isinstance(result, InfeasibleCert):
            raise NotSeparable("partitions are in refinement; nothing to separate")
        certificate = result.certificate
    f_s, f_i, nh = mat_s.nrows, mat_i.nrows, len(h_columns)
    # constraint layout: f_s column sums, then (r, h) product equations
    x = RatMatrix(
        [[certificate[f_s + r * nh + h] for h in range(nh)] for r in range(f_i)]
    )
    tgt = x.dot(mat_i)
    _, hi = refinement_score_range(x, mat_s)
    margin = tgt - hi
    if margin <= 0:
        raise NotSeparable("certificate did not yield a separating direction")
    return SeparatingDirection(x, margin, h_columns)


def separating_direction(
    pi_s: Partition,
    pi_i: Partition,
    method: str = "farkas",
    vertex_cap: int = DEFAULT_VERTEX_CAP,
) -> SeparatingDirection:
    """A hyperplane strictly separating pi_i from all refinements of pi_s."""
    if method == "farkas":
        return separating_direction_from_certificate(pi_s, pi_i)
    if method == "vertices":
        return separating_direction_by_vertices(pi_s, pi_i, vertex_cap)
    raise ValueError(method)


def separating_direction_by_vertices(
    pi_s: Partition, pi_i: Partition, vertex_cap: int = DEFAULT_VERTEX_CAP
) -> SeparatingDirection:
    """Enumerate the vertex refinements M x Pi_S (one per assignment of
    source fractions to target rows) and maximise the separation margin
    with X entries boxed to [-1, 1]."""
    mat_s, mat_i, h_columns = _matrices(pi_s, pi_i)
    f_s, f_i, nh = mat_s.nrows, mat_i.nrows, len(h_columns)
    n_vertices = f_i ** f_s
    if n_vertices > vertex_cap:
        raise VertexBudgetExceeded(f"{n_vertices} vertices exceed the cap {vertex_cap}")
    nx = f_i * nh
    lp = LinearProgram(
        nx + 1,
        objective=[ZERO] * nx + [ONE],
        bounds=[(Fraction(-1), Fraction(1))] * nx + [(ZERO, None)],
    )
    for assignment in itertools.product(range(f_i), repeat=f_s):
        # dot(M Pi_S, X) - dot(Pi_I, X) + eps <= 0
        coeffs = [ZERO] * (nx + 1)
        for c, r in enumerate(assignment):
            for h in range(nh):
                coeffs[r * nh + h] += mat_s[c, h]
        for r in range(f_i):
            for h in range(nh):
                coeffs[r * nh + h] -= mat_i[r, h]
        coeffs[nx] = ONE
        lp.add(coeffs, "<=", ZERO)
    margin, point = solve_max(lp)
    if margin <= 0:
        raise NotSeparable("no positive-margin hyperplane: partitions refine")
    x = RatMatrix([[point[r * nh + h] for h in range(nh)] for r in range(f_i)])
    return SeparatingDirection(x, margin, h_columns)


# ---------------------------------------------------------------------------
# Channel construction
# ---------------------------------------------------------------------------


@dataclass
class AttackChannel:
    """Stochastic redistribution of the hidden value, applied at v'.

    Rows are indexed by the declared hidden values; columns by the target
    values: a prefix drawn from (or extending) the declared hidden domain,
    plus `n_split` fresh values that absorb the slack left after scaling.
    No fresh column ever attracts a maximising one-guess strategy on
    either side; that is checked numerically during construction.
    """

    rows: dict  # hidden tuple -> list[Fraction] over columns
    columns: list[Value]  # single-variable target values
    n_split: int
    trigger_v: tuple


def _fresh_values(domain_values, count: int) -> list[Value]:
    """Fresh single-var numeric values 0, -1, -2, ... avoiding the domain."""
    out: list[Value] = []
    k = 0
    while len(out) < count:
        cand = vnum(-k) if k else vnum(0)
        if cand not in domain_values and cand not in out:
            out.append(cand)
        k += 1
    return out


def build_attack_channel(
    direction: SeparatingDirection,
    pi_s: Partition,
    pi_i: Partition,
    h_domain_values: list[Value],
    trigger_v: tuple = (),
) -> AttackChannel:
    """Turn a separating normal into a one-summing channel matrix.

    Orientation: refinements of the source must score strictly less, so
    the normal is negated when the separation runs the other way.  Then a
    constant shift makes every entry strictly positive, a scale bounds the
    row sums by one, and the slack goes to fresh values -- split into
    enough pieces that none can ever be the best guess.
    """
    mat_s, mat_i, h_columns = _matrices(pi_s, pi_i)
    x = direction.x
    tgt = x.dot(mat_i)
    lo, hi = refinement_score_range(x, mat_s)
    if hi < tgt:
        pass  # refinements already score below the target partition
    elif tgt < lo:
        x = x.scale(-1)
    else:
        raise NotSeparable("direction does not separate the refinement set")

    # rows: declared hidden values (tuples); columns: target fraction slots.
    # X columns cover only the partitions' support; other hidden values get
    # constant rows, which is harmless since they never occur at v'.
    f_i = x.nrows
    col_of = {h: j for j, h in enumerate(h_columns)}
    d0: dict = {}
    for h in _h_tuples(h_domain_values):
        if h in col_of:
            d0[h] = [x[r, col_of[h]] for r in range(f_i)]
        else:
            d0[h] = [ZERO] * f_i

    entries = [q for row in d0.values() for q in row]
    shift = max(ZERO, 1 - min(entries))
    shifted = {h: [q + shift for q in row] for h, row in d0.items()}
    max_row_sum = max(sum(row, ZERO) for row in shifted.values())
    scaled = {h: [q / max_row_sum for q in row] for h, row in shifted.items()}
    slack = {h: 1 - sum(row, ZERO) for h, row in scaled.items()}

    # target values: reuse the declared hidden domain order, extend if the
    # partition has more fractions than the domain has values
    if any(len(h) != 1 for h in d0):
        raise UnsupportedConstruct("attack synthesis handles one hidden variable")
    base_values = [h[0] for h in _h_tuples(h_domain_values)]
    target_values = list(base_values[:f_i])
    if f_i > len(base_values):
        target_values += _fresh_values(h_domain_values, f_i - len(base_values))

    # how many ways to split the slack so no fresh value can win a guess:
    # fraction r's mass on a fresh column is slack_r / k, its best real
    # guess is m_r > 0 (all scaled entries are positive), so pick k with
    # slack_r / k < m_r for every fraction of either partition
    n_split = 1 if any(s > 0 for s in slack.values()) else 0
    if n_split:
        for pi in (pi_s, pi_i):
            for f in pi.fractions:
                m_r = max(
                    sum((f[h] * scaled[h][t] for h in f.support), ZERO)
                    for t in range(f_i)
                )
                z_r = sum((f[h] * slack[h] for h in f.support), ZERO)
                if z_r == 0:
                    continue
                while z_r / n_split >= m_r:
                    n_split += 1

    split_values = _fresh_values(
        list(h_domain_values) + target_values, n_split
    )
    columns = target_values + split_values
    rows = {}
    for h, row in scaled.items():
        extra = [slack[h] / n_split] * n_split if n_split else []
        rows[h] = list(row) + extra
        if sum(rows[h], ZERO) != 1:
            raise InternalError("channel row does not sum to one")
    return AttackChannel(rows, columns, n_split, trigger_v=trigger_v)


def _h_tuples(h_domain_values):
    return [(v,) for v in h_domain_values]


# ---------------------------------------------------------------------------
# Context emission and end-to-end verification
# ---------------------------------------------------------------------------


def _prob_expr(q: Fraction) -> A.Expr:
    if q.denominator == 1:
        return A.Lit(vnum(q))
    return A.Binop("/", A.Lit(vnum(q.numerator)), A.Lit(vnum(q.denominator)))


def _row_dist(columns, row) -> A.DistExpr:
    entries = tuple(
        (A.Lit(val), _prob_expr(q)) for val, q in zip(columns, row) if q != 0
    )
    return A.DistExplicit(entries)


def channel_choose_dist(channel: AttackChannel, h_name: str) -> A.DistExpr:
    """Nested conditional distribution selecting the row for the current h."""
    hs = sorted(channel.rows, key=value_key)
    dist = _row_dist(channel.columns, channel.rows[hs[-1]])
    for h in reversed(hs[:-1]):
        guard = A.Binop("=", A.Name(h_name), A.Lit(h[0]))
        dist = A.DistCond(_row_dist(channel.columns, channel.rows[h]), guard, dist)
    return dist


def emit_context(
    channel: AttackChannel,
    trigger_v: tuple,
    module: A.Module,
) -> A.Module:
    """A standalone context module: same variables, hidden domain extended
    with the channel's fresh values; body applies the channel at v' and
    pins the hidden value to a constant elsewhere."""
    scope = Scope.of_module(module)
    if len(scope.hidden) != 1:
        raise UnsupportedConstruct("attack synthesis handles one hidden variable")
    hdecl = scope.hidden[0]
    extended = list(hdecl.domain.values)
    for val in channel.columns:
        if val not in extended:
            extended.append(val)
    decls = []
    for d in module.decls:
        if d.name == hdecl.name:
            from .probcore import Domain

            decls.append(A.VarDecl(d.name, Domain(d.name, tuple(extended)), d.visibility))
        else:
            decls.append(d)

    guard: Optional[A.Expr] = None
    for decl, val in zip(scope.visible, trigger_v):
        term = A.Binop("=", A.Name(decl.name), A.Lit(val))
        guard = term if guard is None else A.Binop("and", guard, term)
    if guard is None:
        guard = A.Lit(Value("bool", True))

    # constancy is all that matters for the else branch
    zero = vnum(0)
    else_value = zero if zero in hdecl.domain.values else hdecl.domain.values[0]
    body = A.Cond(
        guard,
        A.Choose(hdecl.name, channel_choose_dist(channel, hdecl.name)),
        A.Assign(hdecl.name, A.Lit(else_value)),
    )
    return A.Module(tuple(decls), body)


def compose(module: A.Module, context: A.Module) -> A.Module:
    """module ; context under the context's (widened) declarations."""
    return A.Module(context.decls, A.Seq(module.body, context.body))


@dataclass
class AttackReport:
    context: A.Module
    trigger_v: tuple
    bv_spec: Fraction  # of spec ; context
    bv_impl: Fraction  # of impl ; context
    verdict: bool  # bv_impl > bv_spec
    channel: AttackChannel


def synthesize_and_verify(
    spec_module: A.Module,
    impl_module: A.Module,
    init: SplitState,
    method: str = "farkas",
    vertex_cap: int = DEFAULT_VERTEX_CAP,
) -> AttackReport:
    """Build a distinguishing context for a refinement failure and verify
    the Bayes-vulnerability gap end-to-end on the composed programs."""
    spec_d = desugar(spec_module)
    impl_d = desugar(impl_module)
    scope = Scope.of_module(spec_d)
    hyper_s = eval_hyper(spec_d.body, scope, init)
    hyper_i = eval_hyper(impl_d.body, Scope.of_module(impl_d), init)
    failure = check_refinement(hyper_s, hyper_i)
    if not isinstance(failure, NotRefined) or failure.functional_mismatch:
        raise PreconditionViolated(
            "attack synthesis needs a NotRefined verdict with functional equality"
        )
    pi_s, pi_i = failure.pi_s, failure.pi_i
    if method == "farkas":
        direction = separating_direction_from_certificate(pi_s, pi_i, failure.certificate)
    elif method == "vertices":
        direction = separating_direction_by_vertices(pi_s, pi_i, vertex_cap)
    else:
        raise ValueError(method)
    if len(scope.hidden) != 1:
        raise UnsupportedConstruct("attack synthesis handles one hidden variable")
    h_values = list(scope.hidden[0].domain.values)
    channel = build_attack_channel(direction, pi_s, pi_i, h_values, trigger_v=failure.v)
    context = emit_context(channel, failure.v, spec_module)
    return verify_attack(spec_module, impl_module, context, failure.v, channel, init)


def verify_attack(
    spec_module: A.Module,
    impl_module: A.Module,
    context: A.Module,
    trigger_v: tuple,
    channel: Optional[AttackChannel],
    init: SplitState,
) -> AttackReport:
    """Evaluate spec;C and impl;C and report the exact vulnerabilities."""
    composed_s = desugar(compose(spec_module, context))
    composed_i = desugar(compose(impl_module, context))
    scope = Scope.of_module(composed_s)
    bv_s = bayes_vuln(eval_hyper(composed_s.body, scope, init))
    bv_i = bayes_vuln(eval_hyper(composed_i.body, Scope.of_module(composed_i), init))
    return AttackReport(
        context=context,
        trigger_v=trigger_v,
        bv_spec=bv_s,
        bv_impl=bv_i,
        verdict=bv_i > bv_s,
        channel=channel,
    )
