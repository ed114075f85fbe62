"""Discrete entropy, mutual information and bound calculations.

All quantities are in bits (base-2 logarithms). Zero-probability entries
follow the ``0 * log 0 = 0`` convention: they count towards the size of a
set but never contribute to a sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, ValidationError

SUM_TOL = 1e-9


@dataclass(frozen=True)
class Distribution:
    """Probability mass over an ordered set of ``size`` elements.

    ``size`` defaults to ``len(probs)``. It may be larger, which models
    elements that exist in the set but are never used.
    """

    probs: tuple[float, ...]
    size: int | None = None

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise ValidationError("distribution is empty")
        for i, p in enumerate(probs):
            if not math.isfinite(p) or p < 0.0:
                raise ValidationError(f"entry {i} is negative or not finite: {p!r}")
        for i, p in enumerate(probs):
            if p > 1.0 + SUM_TOL:
                raise ValidationError(f"entry {i} exceeds 1: {p!r}")
        total = math.fsum(probs)
        if abs(total - 1.0) > SUM_TOL:
            raise ValidationError(f"entries must sum to 1 (got sum {total:.12g})")
        support = sum(1 for p in probs if p > 0.0)
        size = len(probs) if self.size is None else int(self.size)
        if size < support:
            raise ValidationError(
                f"size t={size} is smaller than the support ({support} nonzero entries)"
            )
        object.__setattr__(self, "size", size)

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        if n < 1:
            raise DomainError("uniform distribution needs at least one element")
        return cls((1.0 / n,) * n)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def __len__(self):
        return len(self.probs)


DistLike = Union[Distribution, Sequence[float], np.ndarray]


def _as_distribution(d: DistLike) -> Distribution:
    if isinstance(d, Distribution):
        return d
    return Distribution(tuple(np.asarray(d, dtype=float).ravel()))


class JointDistribution:
    """Joint probability table ``p(a_i, b_j)``.

    Rows index transmitter elements, columns index receiver elements.
    The table is copied and frozen on construction.
    """

    __slots__ = ("_table",)

    def __init__(self, table):
        arr = np.array(table, dtype=float)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ValidationError(f"joint table must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("joint table contains non-finite entries")
        if np.any(arr < 0.0):
            i, j = np.argwhere(arr < 0.0)[0]
            raise ValidationError(f"joint entry ({i}, {j}) is negative: {arr[i, j]!r}")
        total = math.fsum(arr.ravel())
        if abs(total - 1.0) > SUM_TOL:
            raise ValidationError(f"joint entries must sum to 1 (got sum {total:.12g})")
        arr.setflags(write=False)
        self._table = arr

    @classmethod
    def from_counts(cls, counts) -> "JointDistribution":
        arr = np.asarray(counts, dtype=float)
        if arr.ndim != 2:
            raise DomainError("counts must be a 2-D array")
        if np.any(arr < 0):
            raise DomainError("counts must be non-negative")
        total = arr.sum()
        if total <= 0:
            raise DomainError("count table is all zero")
        return cls(arr / total)

    @property
    def table(self) -> np.ndarray:
        return self._table

    @property
    def shape(self) -> tuple[int, int]:
        return self._table.shape

    def row_marginal(self) -> np.ndarray:
        return self._table.sum(axis=1)

    def col_marginal(self) -> np.ndarray:
        return self._table.sum(axis=0)

    def product_of_marginals(self) -> np.ndarray:
        return np.outer(self.row_marginal(), self.col_marginal())

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._table, other._table))

    def __hash__(self):
        return hash((self.shape, self._table.tobytes()))

    def __repr__(self):
        return f"JointDistribution({self._table.tolist()!r})"


JointLike = Union[JointDistribution, Sequence[Sequence[float]], np.ndarray]


def _as_joint(j: JointLike) -> JointDistribution:
    return j if isinstance(j, JointDistribution) else JointDistribution(j)


def _plogp_sum(p: np.ndarray) -> float:
    """-sum p log2 p over the nonzero entries of ``p``."""
    nz = p[p > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


@dataclass(frozen=True)
class RelativeInformation:
    """An entropy considered against the bound of its own set."""

    entropy_bits: float
    bound_bits: float
    slack_bits: float


def entropy(d: DistLike) -> float:
    """Shannon entropy of ``d`` in bits."""
    d = _as_distribution(d)
    h = _plogp_sum(d.as_array())
    return max(h, 0.0)


def entropy_bound(n: int) -> float:
    """Largest entropy a set of ``n`` elements can carry: ``log2 n``."""
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"element count must be an integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise DomainError("an empty alphabet has no entropy bound")
    return math.log2(n)


def joint_entropy(j: JointLike) -> float:
    return _plogp_sum(_as_joint(j).table.ravel())


def conditional_entropy(j: JointLike) -> float:
    """H(B|A): receiver uncertainty that remains once the transmitted element is known.

    Evaluated row by row as ``sum_a p(a) H(B | A=a)``.
    """
    table = _as_joint(j).table
    total = 0.0
    for row in table:
        pa = row.sum()
        if pa > 0.0:
            total += pa * _plogp_sum(row / pa)
    return max(total, 0.0)


def mutual_information(j: JointLike) -> float:
    """I(A;B) = sum p(a,b) log2[p(a,b) / (p(a) p(b))] over nonzero joint entries."""
    j = _as_joint(j)
    table = j.table
    rows, cols = np.nonzero(table > 0.0)
    p = table[rows, cols]
    # logs taken separately: the product p(a)p(b) can underflow for tiny masses
    ratio = np.log2(p) - np.log2(j.row_marginal()[rows]) - np.log2(j.col_marginal()[cols])
    return max(float(np.sum(p * ratio)), 0.0)


def kl_divergence(p: DistLike, q: DistLike) -> float:
    """Relative entropy D(p || q) in bits.

    Raises DomainError when ``q`` assigns zero mass where ``p`` does not.
    """
    p = _as_distribution(p).as_array()
    q = _as_distribution(q).as_array()
    if p.shape != q.shape:
        raise DomainError(f"length mismatch: {p.size} vs {q.size}")
    bad = np.nonzero((q == 0.0) & (p > 0.0))[0]
    if bad.size:
        raise DomainError(f"p is not absolutely continuous w.r.t. q at index {int(bad[0])}")
    mask = p > 0.0
    return max(float(np.sum(p[mask] * (np.log2(p[mask]) - np.log2(q[mask])))), 0.0)


def relative_information(d: DistLike) -> RelativeInformation:
    """Entropy of ``d`` together with its bound ``log2 t`` and the gap between them.

    The gap is computed first, as the divergence of ``d`` from the uniform
    distribution over all ``t`` elements, ``sum p log2(t p)``. The entropy
    is then recovered as bound minus gap, so it never goes through
    :func:`entropy`.
    """
    d = _as_distribution(d)
    t = d.size
    bound = entropy_bound(t)
    p = d.as_array()
    nz = p[p > 0.0]
    slack = max(float(np.sum(nz * np.log2(t * nz))), 0.0)
    slack = min(slack, bound)
    return RelativeInformation(entropy_bits=bound - slack, bound_bits=bound, slack_bits=slack)


def mutual_bound(n: int, joint_entropy_bits: float) -> float:
    """Bound on the mutual information of an ``n``-pair channel with uniform marginals.

    Equals ``2 log2 n - H(A,B)``, where the joint entropy can range over
    ``[log2 n, 2 log2 n]``; the result therefore lies in ``[0, log2 n]``.
    """
    log_n = entropy_bound(n)
    h = float(joint_entropy_bits)
    if not math.isfinite(h) or h < log_n - SUM_TOL or h > 2.0 * log_n + SUM_TOL:
        raise DomainError(
            f"joint entropy {h!r} outside [{log_n!r}, {2.0 * log_n!r}] for n={n}"
        )
    return min(max(2.0 * log_n - h, 0.0), log_n)
