"""Partitions of fractions and the LP-based secure-refinement decision.

A fraction is a sub-distribution over hidden values; the partition for a
visible value v collects the inner distributions of all split-states at v,
scaled by their outer probabilities.  One hyper-distribution refines
another exactly when, for every v, some column-stochastic matrix maps the
coarser partition's fractions onto the finer one's -- an exact LP
feasibility question.  Failures come with a Farkas certificate that attack
synthesis turns into a separating hyperplane.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import NotRefinementMatrix
from .lp import Feasible, LinearProgram, solve_feasibility
from .matrix import RatMatrix
from .measures import ft
from .probcore import ONE, ZERO, FiniteDist, normalize, value_key
from .semantics import HyperDist


@dataclass(frozen=True)
class Partition:
    """Canonically sorted multiset of fractions for one visible value."""

    fractions: tuple[FiniteDist, ...]
    reduced: bool = False

    @classmethod
    def of(cls, fractions, reduced=False) -> "Partition":
        return cls(tuple(sorted(fractions, key=value_key)), reduced)

    @property
    def weight(self) -> Fraction:
        return sum((f.weight for f in self.fractions), ZERO)

    def __len__(self):
        return len(self.fractions)

    def __iter__(self):
        return iter(self.fractions)

    def h_support(self) -> list:
        seen = []
        for f in self.fractions:
            for h, _ in f.items():
                if h not in seen:
                    seen.append(h)
        return sorted(seen, key=value_key)

    def matrix(self, h_columns) -> RatMatrix:
        """Fractions as rows over the given hidden-value column order."""
        if not self.fractions:
            raise ValueError("empty partition has no matrix")
        return RatMatrix([[f[h] for h in h_columns] for f in self.fractions])


def extract_partition(hyper: HyperDist, v) -> Partition:
    """Fractions p*delta for the split-states at visible value v.

    Reduced by construction: canonical hypers never hold two split-states
    with the same v and similar inner distributions.
    """
    fractions = [s.delta.scale(w) for s, w in hyper.items() if s.v == v]
    return Partition.of(fractions, reduced=True)


def reduce_partition(pi: Partition) -> Partition:
    """Add up similar fractions and drop zero ones; idempotent."""
    groups: dict = {}
    for f in pi.fractions:
        if f.weight == 0:
            continue
        groups.setdefault(normalize(f), []).append(f)
    out = []
    for fs in groups.values():
        total = fs[0]
        for f in fs[1:]:
            total = total.add(f)
        out.append(total)
    return Partition.of(out, reduced=True)


def similar(pi1: Partition, pi2: Partition) -> bool:
    """Same reduction (fractions equal after merging similar ones)."""
    return reduce_partition(pi1) == reduce_partition(pi2)


def bv_partition(pi: Partition) -> Fraction:
    """Bayes vulnerability of a partition: sum of per-fraction maxima."""
    return sum((f.max_weight() for f in pi.fractions), ZERO)


# ---------------------------------------------------------------------------
# Refinement decision
# ---------------------------------------------------------------------------


@dataclass
class RefinementWitness:
    """Per visible value, a column-stochastic R with R x Pi_S = Pi_I."""

    per_v: dict  # v tuple -> RatMatrix (or None where both partitions are empty)


@dataclass
class NotRefined:
    v: Optional[tuple]  # failing visible value; None for functional mismatch
    functional_mismatch: bool = False
    certificate: Optional[list] = None  # Farkas certificate of the failing LP
    pi_s: Optional[Partition] = None
    pi_i: Optional[Partition] = None
    h_columns: Optional[list] = None


def refinement_lp(mat_s: RatMatrix, mat_i: RatMatrix) -> LinearProgram:
    """Feasibility LP for R >= 0 (rows(I) x rows(S)): columns one-summing
    and R x mat_s = mat_i.

    Variable order: R[r][c] at index r*rows(S) + c.  Constraint order:
    rows(S) column-sum equations first, then the product equations in
    (target row, hidden column) order -- attack synthesis relies on this
    layout when reading the Farkas certificate.
    """
    f_s, f_i = mat_s.nrows, mat_i.nrows
    if mat_s.ncols != mat_i.ncols:
        raise ValueError("partitions must share their hidden-column space")
    lp = LinearProgram(f_i * f_s)
    for c in range(f_s):
        coeffs = [ZERO] * lp.num_vars
        for r in range(f_i):
            coeffs[r * f_s + c] = ONE
        lp.add(coeffs, "=", ONE)
    for r in range(f_i):
        for h in range(mat_s.ncols):
            coeffs = [ZERO] * lp.num_vars
            for c in range(f_s):
                coeffs[r * f_s + c] = mat_s[c, h]
            lp.add(coeffs, "=", mat_i[r, h])
    return lp


def check_partition_refinement(
    pi_s: Partition, pi_i: Partition
) -> tuple[Optional[RatMatrix], Optional[list]]:
    """(witness matrix, None) if pi_s is refined by pi_i, else
    (None, farkas certificate)."""
    h_columns = sorted(
        set(pi_s.h_support()) | set(pi_i.h_support()), key=value_key
    )
    mat_s = pi_s.matrix(h_columns)
    mat_i = pi_i.matrix(h_columns)
    result = solve_feasibility(refinement_lp(mat_s, mat_i))
    if isinstance(result, Feasible):
        f_s, f_i = mat_s.nrows, mat_i.nrows
        r = RatMatrix(
            [[result.point[row * f_s + c] for c in range(f_s)] for row in range(f_i)]
        )
        # witness soundness: re-verify by exact multiplication
        r.check_refinement_matrix()
        if r @ mat_s != mat_i:
            raise NotRefinementMatrix("LP returned a non-reproducing witness")
        return r, None
    return None, result.certificate


def check_refinement(
    spec: HyperDist, impl: HyperDist
) -> Union[RefinementWitness, NotRefined]:
    """Decide secure refinement between two canonical hyper-distributions.

    Functional equality is checked first (refinement implies it); then for
    each visible value an exact LP finds a refinement matrix, or the first
    failing value is reported with its infeasibility certificate.
    """
    if ft(spec) != ft(impl):
        return NotRefined(v=None, functional_mismatch=True)
    per_v: dict = {}
    vs = sorted(
        {s.v for s, _ in spec.items()} | {s.v for s, _ in impl.items()},
        key=value_key,
    )
    for v in vs:
        pi_s = extract_partition(spec, v)
        pi_i = extract_partition(impl, v)
        if not pi_s.fractions and not pi_i.fractions:
            continue
        if not pi_s.fractions or not pi_i.fractions:
            # cannot happen after ft equality, but fail safely
            return NotRefined(v=v, pi_s=pi_s, pi_i=pi_i)
        witness, cert = check_partition_refinement(pi_s, pi_i)
        if witness is None:
            h_columns = sorted(
                set(pi_s.h_support()) | set(pi_i.h_support()), key=value_key
            )
            return NotRefined(
                v=v, certificate=cert, pi_s=pi_s, pi_i=pi_i, h_columns=h_columns
            )
        per_v[v] = witness
    return RefinementWitness(per_v)


def refines(spec: HyperDist, impl: HyperDist) -> bool:
    return isinstance(check_refinement(spec, impl), RefinementWitness)


# ---------------------------------------------------------------------------
# Convex decomposition of refinement matrices
# ---------------------------------------------------------------------------


def is_simple(m: RatMatrix) -> bool:
    """0/1 with exactly one 1 per column (a transposed strategy matrix)."""
    for c in range(m.ncols):
        col = [m[r, c] for r in range(m.nrows)]
        if sorted(col, reverse=True)[:1] != [ONE] or sum(col, ZERO) != ONE:
            return False
        if any(x not in (ZERO, ONE) for x in col):
            return False
    return True


def decompose_refinement(r: RatMatrix) -> list[tuple[Fraction, RatMatrix]]:
    """Write a refinement matrix as a convex combination of simple ones.

    Greedy: pick the smallest nonzero column-minimum c, subtract c times
    the simple matrix marking each column's minimum position, repeat.  The
    zero count grows every round, so this terminates; the coefficients sum
    to one and reconstruct r exactly.
    """
    r.check_refinement_matrix()
    work = RatMatrix([row[:] for row in r.rows])
    out: list[tuple[Fraction, RatMatrix]] = []
    while not work.is_zero():
        positions = []
        c_min: Optional[Fraction] = None
        for c in range(work.ncols):
            entries = [(work[row, c], row) for row in range(work.nrows) if work[row, c] > 0]
            if not entries:
                raise NotRefinementMatrix("column sums diverged during decomposition")
            val, row = min(entries)
            positions.append(row)
            if c_min is None or val < c_min:
                c_min = val
        simple = RatMatrix.zero(work.nrows, work.ncols)
        for c, row in enumerate(positions):
            simple.rows[row][c] = ONE
        out.append((c_min, simple))
        work = RatMatrix(
            [
                [work[row, c] - (c_min if positions[c] == row else ZERO) for c in range(work.ncols)]
                for row in range(work.nrows)
            ]
        )
    total = sum((c for c, _ in out), ZERO)
    if total != 1:
        raise NotRefinementMatrix(f"coefficients sum to {total}, not 1")
    return out
