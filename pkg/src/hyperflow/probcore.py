"""Exact rational arithmetic, finite values, and discrete (sub-)distributions.

Everything here is exact: weights are `fractions.Fraction`, never floats.
Distributions are immutable and canonical (zero-weight entries dropped,
entries kept in a fixed total order), so structural equality coincides
with semantic equality and serialisation is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .errors import NegativeWeight, WeightOverflow, ZeroCondition, ZeroWeight

Rat = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(x) -> Fraction:
    """Coerce ints/bools/Fractions to an exact Fraction (bool becomes 0/1)."""
    if isinstance(x, bool):
        return ONE if x else ZERO
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def rat_str(q: Fraction) -> str:
    """Serialise a probability as "num/den" (denominator always present)."""
    return f"{q.numerator}/{q.denominator}"


def parse_rat(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(text))


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

# kind ranks fix a total order across kinds so that mixed domains
# (e.g. numeric values added to a boolean domain by attack synthesis)
# still sort deterministically.
_KIND_RANK = {"bool": 0, "num": 1, "sym": 2}


@dataclass(frozen=True)
class Value:
    """A scalar from a finite domain: boolean, exact rational, or enum symbol."""

    kind: str  # 'bool' | 'num' | 'sym'
    payload: Union[bool, Fraction, str]

    def key(self):
        return (_KIND_RANK[self.kind], self.payload)

    def __str__(self):
        if self.kind == "bool":
            return "true" if self.payload else "false"
        if self.kind == "num":
            q = self.payload
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        return self.payload

    def __repr__(self):
        return f"Value({self})"


def vnum(x) -> Value:
    return Value("num", rat(x) if not isinstance(x, bool) else Fraction(int(x)))


def vbool(b: bool) -> Value:
    return Value("bool", bool(b))


def vsym(name: str) -> Value:
    return Value("sym", name)


def value_key(x):
    """Total order key for values, tuples of values, and distributions."""
    if isinstance(x, Value):
        return x.key()
    if isinstance(x, tuple):
        return tuple(value_key(e) for e in x)
    if isinstance(x, FiniteDist):
        return tuple((value_key(v), w) for v, w in x.items())
    if isinstance(x, bool):
        return (_KIND_RANK["bool"], x)
    if isinstance(x, (int, Fraction)):
        return (_KIND_RANK["num"], x)
    if isinstance(x, str):
        return (_KIND_RANK["sym"], x)
    # split-states expose their own .key()
    return x.key()


@dataclass(frozen=True)
class Domain:
    """A named finite ordered list of values (no duplicates)."""

    name: str
    values: tuple[Value, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError(f"domain {self.name} is empty")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"domain {self.name} has duplicate values")

    def __contains__(self, v: Value) -> bool:
        return v in self.values

    def __len__(self):
        return len(self.values)

    def index(self, v: Value) -> int:
        return self.values.index(v)


# ---------------------------------------------------------------------------
# Finite discrete (sub-)distributions
# ---------------------------------------------------------------------------

class FiniteDist:
    """An immutable sub-distribution over hashable points (weight <= 1).

    Construction canonicalises: duplicate points have their weights added,
    zero-weight points are dropped, and entries are sorted by `value_key`.
    """

    __slots__ = ("_entries", "_weight", "_hash")

    def __init__(self, pairs: Iterable[tuple[object, Fraction]], _trusted=False):
        if _trusted:
            entries = tuple(pairs)
            total = sum((w for _, w in entries), ZERO)
        else:
            acc: dict = {}
            for v, w in pairs:
                w = rat(w)
                if w < 0:
                    raise NegativeWeight(f"negative weight {w} at {v!r}")
                if w == 0:
                    continue
                acc[v] = acc.get(v, ZERO) + w
            total = sum(acc.values(), ZERO)
            if total > 1:
                raise WeightOverflow(f"weights sum to {total} > 1")
            entries = tuple(sorted(acc.items(), key=lambda kv: value_key(kv[0])))
        object.__setattr__(self, "_entries", entries)
        object.__setattr__(self, "_weight", total)
        object.__setattr__(self, "_hash", hash(entries))

    # -- constructors ----------------------------------------------------

    @classmethod
    def point(cls, v) -> "FiniteDist":
        return cls([(v, ONE)])

    @classmethod
    def uniform(cls, values: Sequence) -> "FiniteDist":
        values = list(values)
        if not values:
            raise ZeroWeight("uniform distribution over empty set")
        share = Fraction(1, len(values))
        return cls([(v, share) for v in values])

    # -- queries ----------------------------------------------------------

    @property
    def weight(self) -> Fraction:
        return self._weight

    @property
    def is_full(self) -> bool:
        return self._weight == 1

    @property
    def support(self) -> tuple:
        return tuple(v for v, _ in self._entries)

    def items(self) -> tuple[tuple[object, Fraction], ...]:
        return self._entries

    def __getitem__(self, v) -> Fraction:
        for u, w in self._entries:
            if u == v:
                return w
        return ZERO

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __eq__(self, other):
        return isinstance(other, FiniteDist) and self._entries == other._entries

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{v}@{rat_str(w)}" for v, w in self._entries)
        return "{" + body + "}"

    def key(self):
        return value_key(self)

    def max_weight(self) -> Fraction:
        """Largest single weight (0 for the empty sub-distribution)."""
        return max((w for _, w in self._entries), default=ZERO)

    # -- arithmetic --------------------------------------------------------

    def scale(self, c: Fraction) -> "FiniteDist":
        c = rat(c)
        if c < 0:
            raise NegativeWeight(f"negative scale {c}")
        return FiniteDist([(v, w * c) for v, w in self._entries])

    def add(self, other: "FiniteDist") -> "FiniteDist":
        return FiniteDist(list(self._entries) + list(other._entries))

    def map(self, f: Callable) -> "FiniteDist":
        """Push forward through f (weights of equal images add)."""
        return FiniteDist([(f(v), w) for v, w in self._entries])


def mk_dist(pairs: Iterable[tuple[object, Fraction]]) -> FiniteDist:
    """Explicit-distribution constructor; duplicate points add their weights."""
    return FiniteDist(pairs)


def normalize(d: FiniteDist) -> FiniteDist:
    """Scale d by 1/weight(d); the result is a full distribution."""
    if d.weight == 0:
        raise ZeroWeight("cannot normalise a zero-weight distribution")
    inv = 1 / d.weight
    return FiniteDist([(v, w * inv) for v, w in d.items()])


def expected_value(d: FiniteDist, f: Callable):
    """Sum of d.x * f.x over the support of d.

    If f yields distributions, the result is their weighted mixture (a
    FiniteDist); otherwise f's values are coerced to exact rationals
    (booleans as 0/1) and a Fraction is returned.
    """
    pairs = [(w, f(v)) for v, w in d.items()]
    if not pairs:
        return ZERO
    if isinstance(pairs[0][1], FiniteDist):
        acc = []
        for w, dist in pairs:
            if not isinstance(dist, FiniteDist):
                raise TypeError("f must consistently return distributions")
            acc.extend((u, w * q) for u, q in dist.items())
        return FiniteDist(acc)
    return sum((w * rat(x) for w, x in pairs), ZERO)


def posterior(d: FiniteDist, weight_fn: Callable) -> FiniteDist:
    """A-posteriori distribution of d given per-point likelihoods.

    Implements the weighted comprehension: scale each point of d by
    weight_fn, then renormalise by the scalar expectation.  Boolean
    weight functions make this plain conditioning.
    """
    scaled = []
    total = ZERO
    for v, w in d.items():
        q = rat(weight_fn(v))
        if q < 0:
            raise NegativeWeight(f"negative conditioning weight {q} at {v!r}")
        if q > 0:
            scaled.append((v, w * q))
            total += w * q
    if total == 0:
        raise ZeroCondition("conditioning on a probability-zero observation")
    inv = 1 / total
    return FiniteDist([(v, w * inv) for v, w in scaled])
