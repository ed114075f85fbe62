"""Set-theoretic information channels built from one-one ordered pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NoChannelError, ValidationError
from .info_core import (
    SUM_TOL,
    Distribution,
    JointDistribution,
    entropy,
    entropy_bound,
    joint_entropy,
    mutual_bound,
    mutual_information,
)


@dataclass(frozen=True)
class Alphabet:
    """An ordered inventory of element labels. Labels are exact, case-sensitive strings."""

    id: str
    elements: tuple[str, ...]

    def __post_init__(self):
        elements = tuple(self.elements)
        object.__setattr__(self, "elements", elements)
        if not elements:
            raise ValidationError(f"alphabet {self.id!r} has no elements")
        seen = set()
        for label in elements:
            if not isinstance(label, str):
                raise ValidationError(f"alphabet {self.id!r}: label {label!r} is not a string")
            if label in seen:
                raise ValidationError(f"alphabet {self.id!r}: label {label!r} appears twice")
            seen.add(label)

    @property
    def count(self) -> int:
        return len(self.elements)

    def index(self, label: str) -> int:
        return self.elements.index(label)

    def __contains__(self, label):
        return label in self.elements


@dataclass(frozen=True)
class ConstraintSet:
    """A one-one pairing of transmitter and receiver elements.

    Construction does not enforce the pairing rules; call :func:`validate`
    to get a list of what is wrong.
    """

    id: str
    tx: Alphabet
    rx: Alphabet
    pairs: tuple[tuple[str, str], ...]
    ignored: bool = False
    fault: bool = False

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((str(a), str(b)) for a, b in self.pairs))

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def t(self) -> int:
        return self.tx.count

    @property
    def r(self) -> int:
        return self.rx.count

    @property
    def included(self) -> bool:
        return not (self.ignored or self.fault)


@dataclass(frozen=True)
class ChannelMetrics:
    h_a_bits: float
    h_b_bits: float
    mi_bits: float
    mb_bits: float
    s_bound_bits: float
    variation_bits: float

    def as_dict(self) -> dict:
        return {
            "h_a": self.h_a_bits,
            "h_b": self.h_b_bits,
            "mi": self.mi_bits,
            "mb": self.mb_bits,
            "s_bound": self.s_bound_bits,
            "v": self.variation_bits,
        }


def common_set(tx: Alphabet, rx: Alphabet, id: Optional[str] = None) -> ConstraintSet:
    """Pair every label that appears in both alphabets, in transmitter order."""
    shared = [label for label in tx.elements if label in rx]
    if not shared:
        raise NoChannelError(
            f"no channel: alphabets {tx.id!r} and {rx.id!r} have no common element"
        )
    return ConstraintSet(
        id=id if id is not None else f"{tx.id}/{rx.id}",
        tx=tx,
        rx=rx,
        pairs=tuple((label, label) for label in shared),
    )


def validate(cs: ConstraintSet) -> list[str]:
    """Return every broken ConstraintSet invariant as a readable message."""
    problems = []
    tx_seen: set[str] = set()
    rx_seen: set[str] = set()
    for a, b in cs.pairs:
        if a in tx_seen:
            problems.append(f"tx label {a!r} paired twice")
        tx_seen.add(a)
        if b in rx_seen:
            problems.append(f"rx label {b!r} paired twice")
        rx_seen.add(b)
        if a not in cs.tx:
            problems.append(f"tx label {a!r} not in alphabet {cs.tx.id!r}")
        if b not in cs.rx:
            problems.append(f"rx label {b!r} not in alphabet {cs.rx.id!r}")
    if cs.n < 1:
        problems.append("constraint set has no ordered pairs (n must be >= 1)")
    if cs.n > min(cs.t, cs.r):
        problems.append(f"n={cs.n} exceeds min(t, r)={min(cs.t, cs.r)}")
    return problems


def _require_valid(cs: ConstraintSet) -> None:
    problems = validate(cs)
    if problems:
        raise ValidationError(f"constraint set {cs.id!r}: " + "; ".join(problems))


def pair_indices(cs: ConstraintSet) -> list[tuple[int, int]]:
    """(tx index, rx index) of each ordered pair."""
    return [(cs.tx.index(a), cs.rx.index(b)) for a, b in cs.pairs]


def channel_matrix(cs: ConstraintSet, noise: Optional[JointDistribution] = None) -> np.ndarray:
    """Transition probabilities ``W[a, b] = p(b | a)`` over the t x r alphabets.

    Without noise each paired element goes to its partner and unpaired
    elements go nowhere (their row is all zero). With a noise table, rows
    with positive mass are the table's conditionals; rows the table never
    exercises fall back to the noiseless routing.
    """
    w = np.zeros((cs.t, cs.r))
    for i, j in pair_indices(cs):
        w[i, j] = 1.0
    if noise is not None:
        table = noise.table
        pa = table.sum(axis=1)
        for i in range(cs.t):
            if pa[i] > 0.0:
                w[i] = table[i] / pa[i]
    return w


def _delivered_mi(block: np.ndarray) -> float:
    """Information carried through the paired block of a (sub-)probability table.

    Mass outside the block is treated as lost: it is neither renormalised
    into the block nor allowed to carry information of its own.
    """
    mass = math.fsum(block.ravel())
    if mass <= 0.0:
        return 0.0
    return min(mass, 1.0) * mutual_information(JointDistribution(block / mass))


def _paired_block(table: np.ndarray, idx: list[tuple[int, int]]) -> np.ndarray:
    rows = [i for i, _ in idx]
    cols = [j for _, j in idx]
    return table[np.ix_(rows, cols)]


def _uniform_mutual_bound(cs: ConstraintSet, w: np.ndarray) -> float:
    idx = pair_indices(cs)
    n = cs.n
    u = _paired_block(w, idx) / n
    mass = math.fsum(u.ravel())
    if mass <= 0.0:
        return 0.0
    un = u / mass
    if (
        np.allclose(un.sum(axis=0), 1.0 / n, rtol=0.0, atol=SUM_TOL)
        and np.allclose(un.sum(axis=1), 1.0 / n, rtol=0.0, atol=SUM_TOL)
    ):
        return min(mass, 1.0) * mutual_bound(n, joint_entropy(JointDistribution(un)))
    return _delivered_mi(u)


def channel_metrics(
    cs: ConstraintSet,
    source: Optional[Distribution | Sequence[float]] = None,
    noise: Optional[JointDistribution | Sequence[Sequence[float]]] = None,
) -> ChannelMetrics:
    """Entropies, mutual information, mutual bound and variation for one constraint set.

    ``source`` is the transmitter distribution over all ``t`` elements
    (uniform when omitted). ``noise`` is a full t x r joint table; when
    given with a source, its row marginals must equal that source.
    """
    _require_valid(cs)
    if noise is not None and not isinstance(noise, JointDistribution):
        noise = JointDistribution(noise)
    if noise is not None and noise.shape != (cs.t, cs.r):
        raise ValidationError(
            f"noise table shape {noise.shape} does not match t x r = ({cs.t}, {cs.r})"
        )
    if source is None:
        source = (
            Distribution(tuple(noise.row_marginal()))
            if noise is not None
            else Distribution.uniform(cs.t)
        )
    elif not isinstance(source, Distribution):
        source = Distribution(tuple(source))
    if len(source) != cs.t:
        raise ValidationError(f"source has {len(source)} entries but t={cs.t}")
    p = source.as_array()
    if noise is not None and not np.allclose(noise.row_marginal(), p, rtol=0.0, atol=SUM_TOL):
        raise ValidationError("noise table row marginals do not match the source distribution")

    idx = pair_indices(cs)
    if noise is None:
        joint = np.zeros((cs.t, cs.r))
        for i, j in idx:
            joint[i, j] = p[i]
    else:
        joint = np.array(noise.table)

    received = joint.sum(axis=0)
    mass = math.fsum(received)
    h_b = entropy(received / mass) if mass > 0.0 else 0.0

    from .variation import variation_bits

    w = channel_matrix(cs, noise)
    return ChannelMetrics(
        h_a_bits=entropy(source),
        h_b_bits=h_b,
        mi_bits=_delivered_mi(_paired_block(joint, idx)),
        mb_bits=_uniform_mutual_bound(cs, w),
        s_bound_bits=entropy_bound(cs.n),
        variation_bits=variation_bits(cs.t, cs.r),
    )
