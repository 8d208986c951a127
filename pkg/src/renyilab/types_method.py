"""Method-of-types combinatorics: n-types, conditional types, exact class sizes.

Class sizes are computed through exact log-factorials (multinomials), not
through the e^{nH + o(n)} estimates; the simulator depends on exact small-n
probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .prob import FiniteDistribution, GuardExceededError

__all__ = [
    "TypeVector",
    "ConditionalTypeVector",
    "TypeStatistics",
    "enumerate_types",
    "count_types",
    "enumerate_conditional_types",
    "type_statistics",
    "sequence_type",
    "joint_sequence_type",
    "nearest_type",
    "log_factorial",
    "log_multinomial",
]

ENUMERATION_GUARD = 10**7

_LOG_FACT_CAP = 10**6
_log_fact_table = np.zeros(1)


def log_factorial(n: int) -> float:
    """Exact log n! from a grown-on-demand cumulative table (lgamma beyond cap)."""
    global _log_fact_table
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > _LOG_FACT_CAP:
        return math.lgamma(n + 1)
    if n >= _log_fact_table.size:
        old = _log_fact_table
        grow = max(n + 1, 2 * old.size, 1024)
        ext = np.log(np.arange(old.size, grow, dtype=float).clip(min=1))
        _log_fact_table = np.concatenate([old, old[-1] + np.cumsum(ext)])
    return float(_log_fact_table[n])


def log_multinomial(counts: Sequence[int]) -> float:
    n = int(sum(counts))
    return log_factorial(n) - sum(log_factorial(int(c)) for c in counts)


@dataclass(frozen=True)
class TypeVector:
    """An n-type: integer counts over the alphabet summing to n."""

    n: int
    counts: tuple

    def __post_init__(self):
        c = tuple(int(x) for x in self.counts)
        if any(x < 0 for x in c) or sum(c) != self.n:
            raise ValueError(f"counts {c} are not an {self.n}-type")
        object.__setattr__(self, "counts", c)

    @property
    def alphabet_size(self) -> int:
        return len(self.counts)

    @property
    def distribution(self) -> FiniteDistribution:
        return FiniteDistribution(np.asarray(self.counts, dtype=float) / self.n)


@dataclass(frozen=True)
class ConditionalTypeVector:
    """Count matrix over X x Y whose row sums match an input TypeVector."""

    n: int
    counts: tuple  # tuple of tuples, rows indexed by x

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.counts)
        if any(v < 0 for r in rows for v in r) or sum(v for r in rows for v in r) != self.n:
            raise ValueError("conditional counts do not total n")
        object.__setattr__(self, "counts", rows)

    def row_sums(self) -> tuple:
        return tuple(sum(r) for r in self.counts)

    def matches_input(self, tx: TypeVector) -> bool:
        return self.row_sums() == tx.counts

    @property
    def joint_distribution(self) -> FiniteDistribution:
        flat = np.asarray(self.counts, dtype=float).ravel() / self.n
        return FiniteDistribution(flat)


def count_types(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def _compositions(n: int, k: int) -> Iterator[tuple]:
    # lexicographic order over count vectors
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def enumerate_types(n: int, k: int) -> Iterator[TypeVector]:
    """All n-types on a k-letter alphabet, lexicographic in the count vector."""
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    if count_types(n, k) > ENUMERATION_GUARD:
        raise GuardExceededError(f"{count_types(n, k)} types exceeds the enumeration guard")
    for c in _compositions(n, k):
        yield TypeVector(n, c)


def enumerate_conditional_types(tx: TypeVector, output_size: int) -> Iterator[ConditionalTypeVector]:
    """Conditional n-types compatible with input type ``tx``, row-major lexicographic.

    Rows are generated lazily one input symbol at a time to bound memory.
    """
    total = 1
    for c in tx.counts:
        total *= count_types(c, output_size)
        if total > ENUMERATION_GUARD:
            raise GuardExceededError("conditional type enumeration exceeds the guard")

    def rec(i: int, acc: list):
        if i == len(tx.counts):
            yield ConditionalTypeVector(tx.n, tuple(acc))
            return
        for row in _compositions(tx.counts[i], output_size):
            acc.append(row)
            yield from rec(i + 1, acc)
            acc.pop()

    yield from rec(0, [])


@dataclass(frozen=True)
class TypeStatistics:
    log_class_size: float
    log_prob: float
    entropy: float  # H of the type itself, nats


def type_statistics(T: TypeVector, P: FiniteDistribution) -> TypeStatistics:
    """log|T_T| (exact multinomial), log P^{otimes n}(T_T), and H_T in nats."""
    if T.alphabet_size != P.dim:
        raise ValueError("type and distribution alphabets differ")
    log_size = log_multinomial(T.counts)
    log_prob = log_size
    for c, p in zip(T.counts, P.atoms):
        if c == 0:
            continue
        if p == 0:
            log_prob = -math.inf
            break
        log_prob += c * math.log(p)
    h = _type_entropy(T)
    return TypeStatistics(log_class_size=log_size, log_prob=log_prob, entropy=h)


def _type_entropy(T: TypeVector) -> float:
    p = np.asarray(T.counts, dtype=float) / T.n
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def sequence_type(word: Sequence[int], alphabet_size: int | None = None) -> TypeVector:
    """Empirical type of a word over {0, ..., k-1}."""
    w = np.asarray(word, dtype=int)
    if w.size == 0:
        raise ValueError("word must be nonempty")
    k = alphabet_size if alphabet_size is not None else int(w.max()) + 1
    if w.min() < 0 or w.max() >= k:
        raise ValueError("symbol out of range")
    counts = np.bincount(w, minlength=k)
    return TypeVector(w.size, tuple(int(c) for c in counts))


def joint_sequence_type(x_word: Sequence[int], y_word: Sequence[int], kx: int, ky: int) -> ConditionalTypeVector:
    x = np.asarray(x_word, dtype=int)
    y = np.asarray(y_word, dtype=int)
    if x.size != y.size or x.size == 0:
        raise ValueError("words must be nonempty and of equal length")
    counts = np.zeros((kx, ky), dtype=int)
    np.add.at(counts, (x, y), 1)
    return ConditionalTypeVector(x.size, tuple(tuple(int(v) for v in r) for r in counts))


def nearest_type(P: FiniteDistribution, n: int) -> TypeVector:
    """Largest-remainder rounding of P to an n-type; ties break to lower index.

    Satisfies max_x |P(x) - T(x)/n| <= |X| / (2n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    scaled = P.atoms * n
    base = np.floor(scaled).astype(int)
    short = n - int(base.sum())
    if short > 0:
        rema = scaled - base
        # descending remainder; tied remainders round the lower index down,
        # so (0.5, 0.5) at n=3 lands on (1, 2)
        order = np.lexsort((-np.arange(base.size), -rema))
        base[order[:short]] += 1
    return TypeVector(n, tuple(int(c) for c in base))
