"""Dense exact-rational matrices.

Sizes in this package are tiny (a few hundred entries at most), so a dense
list-of-rows representation with Fraction entries is plenty.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InternalError, NotRefinementMatrix
from .probcore import ZERO, ONE, rat


class RatMatrix:
    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Sequence]):
        self.rows = [[rat(x) for x in row] for row in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        if any(len(r) != self.ncols for r in self.rows):
            raise ValueError("ragged matrix")
        if self.nrows == 0 or self.ncols == 0:
            raise ValueError("matrix dimensions must be positive")

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> "RatMatrix":
        return cls([[ZERO] * ncols for _ in range(nrows)])

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, diag: Sequence) -> "RatMatrix":
        n = len(diag)
        m = cls.zero(n, n)
        for i, x in enumerate(diag):
            m.rows[i][i] = rat(x)
        return m

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return (
            isinstance(other, RatMatrix)
            and self.nrows == other.nrows
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash(tuple(tuple(r) for r in self.rows))

    def __repr__(self):
        return "RatMatrix(" + "; ".join(
            " ".join(str(x) for x in row) for row in self.rows
        ) + ")"

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        out = [[ZERO] * other.ncols for _ in range(self.nrows)]
        for i, row in enumerate(self.rows):
            orow = out[i]
            for k, a in enumerate(row):
                if a == 0:
                    continue
                brow = other.rows[k]
                for j, b in enumerate(brow):
                    if b != 0:
                        orow[j] += a * b
        return RatMatrix(out)

    def scale(self, c) -> "RatMatrix":
        c = rat(c)
        return RatMatrix([[x * c for x in row] for row in self.rows])

    def add_scalar(self, c) -> "RatMatrix":
        c = rat(c)
        return RatMatrix([[x + c for x in row] for row in self.rows])

    def transpose(self) -> "RatMatrix":
        return RatMatrix([list(col) for col in zip(*self.rows)])

    def trace(self) -> Fraction:
        if self.nrows != self.ncols:
            raise ValueError("trace of a non-square matrix")
        return sum((self.rows[i][i] for i in range(self.nrows)), ZERO)

    def dot(self, other: "RatMatrix") -> Fraction:
        """Entrywise dot product (the trace form of matrix dot)."""
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("dot of differently shaped matrices")
        return sum(
            (a * b for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb)),
            ZERO,
        )

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.rows for x in row)

    def min_entry(self) -> Fraction:
        return min(x for row in self.rows for x in row)

    def row_sums(self) -> list[Fraction]:
        return [sum(row, ZERO) for row in self.rows]

    def col_sums(self) -> list[Fraction]:
        return [sum(col, ZERO) for col in zip(*self.rows)]

    def is_column_stochastic(self) -> bool:
        return all(x >= 0 for row in self.rows for x in row) and all(
            s == 1 for s in self.col_sums()
        )

    def check_refinement_matrix(self):
        if not self.is_column_stochastic():
            raise NotRefinementMatrix(f"not column-stochastic: {self!r}")

    def pad(self, nrows: int, ncols: int) -> "RatMatrix":
        """Extend with zero rows/columns to at least the given shape."""
        if nrows < self.nrows or ncols < self.ncols:
            raise ValueError("pad cannot shrink")
        rows = [row + [ZERO] * (ncols - self.ncols) for row in self.rows]
        rows += [[ZERO] * ncols for _ in range(nrows - self.nrows)]
        return RatMatrix(rows)


def solve_linear(a: RatMatrix, b: Sequence[Fraction]) -> list[Fraction]:
    """Solve a x = b exactly for square non-singular a (Gaussian elimination)."""
    n = a.nrows
    if a.ncols != n or len(b) != n:
        raise ValueError("solve_linear expects a square system")
    m = [row[:] + [rat(bi)] for row, bi in zip(a.rows, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise InternalError("singular basis matrix in linear solve")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]
