"""Simulated link between two multi-mode endpoints.

A run first negotiates a mode with the etiquette, then pushes symbols
through the selected constraint set and compares the empirical mutual
information with the analytic value.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import ChannelMetrics, ConstraintSet, channel_matrix, channel_metrics, pair_indices
from .errors import ValidationError
from .etiquette.codec import Selection
from .etiquette.machine import DEFAULT_TIMEOUT_TICKS, NegotiationState, run_session
from .etiquette.tree import CapabilityTree, Role
from .info_core import Distribution, JointDistribution, mutual_information
from .rng import SplitMix64
from .specs import parse_caps, parse_channel, parse_distribution


@dataclass(frozen=True)
class Endpoint:
    id: str
    caps: CapabilityTree
    modes: dict = field(default_factory=dict)  # mode_id -> ConstraintSet
    sources: dict = field(default_factory=dict)  # mode_id -> Distribution
    refuse: frozenset = frozenset()

    def __post_init__(self):
        for desc in self.caps.modes():
            cs = self.modes.get(desc.mode_id)
            if cs is not None and cs.n != desc.states:
                raise ValidationError(
                    f"endpoint {self.id!r}: mode {desc.mode_id!r} advertises {desc.states} "
                    f"states but its constraint set has n={cs.n}"
                )
        for mode_id, src in self.sources.items():
            cs = self.modes.get(mode_id)
            if cs is not None and len(src) != cs.t:
                raise ValidationError(
                    f"endpoint {self.id!r}: source for {mode_id!r} has {len(src)} entries, t={cs.t}"
                )

    def session_state(self, layer: Optional[str] = None, announce_id: bool = False) -> NegotiationState:
        return NegotiationState(
            local_caps=self.caps, endpoint_id=self.id, refuse=frozenset(self.refuse),
            layer=layer, announce_id=announce_id,
        )


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    symbol_count: int = 100_000
    noise: dict = field(default_factory=dict)  # mode_id -> JointDistribution
    per_phase_timeout: int = DEFAULT_TIMEOUT_TICKS
    record_symbols: bool = False

    def __post_init__(self):
        if self.symbol_count < 1:
            raise ValidationError("symbol_count must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class TranscriptEntry:
    time: int
    direction: str
    kind: str


@dataclass
class SimReport:
    transcript: tuple[TranscriptEntry, ...]
    selected: Optional[Selection]
    analytic: Optional[ChannelMetrics]
    empirical_mi_bits: float
    symbols_sent: int
    symbols_delivered: int
    failure_reason: Optional[str] = None
    symbol_trace: Optional[list] = None  # (index, tx label, rx label or "")
    counts: Optional[np.ndarray] = None  # t x r delivered joint counts, not serialised
    labels: Optional[tuple] = None  # (tx elements, rx elements) for the counts table

    def to_dict(self) -> dict:
        return {
            "transcript": [[e.time, e.direction, e.kind] for e in self.transcript],
            "selected": None if self.selected is None else [self.selected.tx_mode, self.selected.rx_mode],
            "analytic": None if self.analytic is None else self.analytic.as_dict(),
            "empirical_mi": self.empirical_mi_bits,
            "symbols_sent": self.symbols_sent,
            "symbols_delivered": self.symbols_delivered,
            "failure_reason": self.failure_reason,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def to_text(self, precision: str = "fixed6") -> str:
        fmt = (lambda x: repr(float(x))) if precision == "full" else (lambda x: f"{x:.6f}")
        lines = ["transcript:"]
        for e in self.transcript:
            lines.append(f"  t={e.time:<8d} {e.direction:<5} {e.kind}")
        if self.selected is None:
            lines.append(f"negotiation=Failed reason={self.failure_reason}")
        else:
            lines.append(f"selected={self.selected}")
        if self.analytic is not None:
            a = self.analytic
            lines.append(
                f"analytic H(A)={fmt(a.h_a_bits)} H(B)={fmt(a.h_b_bits)} MI={fmt(a.mi_bits)} "
                f"MB={fmt(a.mb_bits)} S={fmt(a.s_bound_bits)} V={fmt(a.variation_bits)}"
            )
        lines.append(f"empirical_mi={fmt(self.empirical_mi_bits)}")
        lines.append(f"symbols_sent={self.symbols_sent} symbols_delivered={self.symbols_delivered}")
        return "\n".join(lines) + "\n"

    def symbols_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["symbol_index", "tx_element", "rx_element"])
        w.writerows(self.symbol_trace or [])
        return buf.getvalue()


def empirical_mi(counts) -> float:
    """Plug-in mutual information of a table of joint occurrence counts (no bias correction)."""
    return mutual_information(JointDistribution.from_counts(counts))


def _transmitter(left: Endpoint, right: Endpoint, sel: Selection) -> Endpoint:
    for ep in (left, right):
        m = ep.caps.mode(sel.tx_mode)
        if m is not None and m.role is Role.TX:
            return ep
    raise ValidationError(f"no endpoint transmits mode {sel.tx_mode!r}")


def _draw(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, cdf.size - 1)


def transmit(cs: ConstraintSet, source: Distribution, noise: Optional[JointDistribution],
             count: int, rng: SplitMix64) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``count`` transmitter symbols and route each through the channel.

    Returns (tx indices, rx indices); rx index -1 marks a lost symbol.
    Draw order: all transmitter uniforms first, then (with noise) all
    receiver uniforms.
    """
    p = source.as_array()
    tx = _draw(np.cumsum(p), rng.uniforms(count))
    # never emit an element with zero probability because of cdf round-off
    zero = p[tx] == 0.0
    if np.any(zero):
        tx[zero] = np.flatnonzero(p)[-1]
    w = channel_matrix(cs, noise)
    rx = np.full(count, -1, dtype=np.int64)
    if noise is None:
        for i, j in pair_indices(cs):
            rx[tx == i] = j
    else:
        u = rng.uniforms(count)
        for i in range(cs.t):
            sel = tx == i
            row = w[i]
            mass = row.sum()
            if not np.any(sel) or mass <= 0.0:
                continue
            cdf = np.cumsum(row)
            j = np.searchsorted(cdf, u[sel] * mass, side="right")
            rx[sel] = np.minimum(j, cs.r - 1)
    return tx, rx


def run(left: Endpoint, right: Endpoint, cfg: SimConfig, both_start: bool = False) -> SimReport:
    session = run_session(
        left.session_state(announce_id=both_start),
        right.session_state(announce_id=both_start),
        cfg.per_phase_timeout,
        both_start,
    )
    transcript = [TranscriptEntry(w.tick, w.direction, w.kind) for w in session.transcript]
    sel = session.selected
    if sel is None:
        transcript.append(TranscriptEntry(session.end_tick, "--", f"FAILED({session.failure_reason})"))
        return SimReport(tuple(transcript), None, None, 0.0, 0, 0, session.failure_reason)

    ep = _transmitter(left, right, sel)
    cs = ep.modes.get(sel.tx_mode)
    if cs is None:
        raise ValidationError(f"endpoint {ep.id!r} has no channel for mode {sel.tx_mode!r}")
    source = ep.sources.get(sel.tx_mode)
    if source is None:
        source = Distribution.uniform(cs.t)
    noise = cfg.noise.get(sel.tx_mode)
    analytic = channel_metrics(cs, source, noise)

    rng = SplitMix64(cfg.seed)
    tx, rx = transmit(cs, source, noise, cfg.symbol_count, rng)
    delivered = rx >= 0
    counts = np.zeros((cs.t, cs.r), dtype=np.int64)
    np.add.at(counts, (tx[delivered], rx[delivered]), 1)
    idx = pair_indices(cs)
    block = counts[np.ix_([i for i, _ in idx], [j for _, j in idx])]
    in_block = int(block.sum())
    emp = (in_block / cfg.symbol_count) * empirical_mi(block) if in_block else 0.0

    trace = None
    if cfg.record_symbols:
        trace = [
            (k, cs.tx.elements[a], cs.rx.elements[b] if b >= 0 else "")
            for k, (a, b) in enumerate(zip(tx.tolist(), rx.tolist()))
        ]
    return SimReport(
        transcript=tuple(transcript),
        selected=sel,
        analytic=analytic,
        empirical_mi_bits=emp,
        symbols_sent=cfg.symbol_count,
        symbols_delivered=int(delivered.sum()),
        symbol_trace=trace,
        counts=counts,
        labels=(cs.tx.elements, cs.rx.elements),
    )


def parse_endpoint(doc, default_id: str) -> Endpoint:
    if not isinstance(doc, dict):
        raise ValidationError(f"endpoint {default_id!r} must be a JSON object")
    eid = str(doc.get("id", default_id))
    caps = parse_caps(doc.get("caps", doc))
    modes, sources = {}, {}
    for mode_id, spec in (doc.get("modes") or {}).items():
        parsed = parse_channel(spec, mode_id)
        modes[mode_id] = parsed.cs
        if parsed.source is not None:
            sources[mode_id] = parsed.source
    for mode_id, src in (doc.get("sources") or {}).items():
        sources[mode_id] = parse_distribution(src)
    return Endpoint(eid, caps, modes, sources, frozenset(doc.get("refuse", ())))


def parse_scenario(doc) -> tuple[Endpoint, Endpoint, SimConfig]:
    if not isinstance(doc, dict) or "left" not in doc or "right" not in doc:
        raise ValidationError("scenario needs 'left' and 'right' endpoint blocks")
    left = parse_endpoint(doc["left"], "L")
    right = parse_endpoint(doc["right"], "R")
    cfg = SimConfig(
        seed=int(doc.get("seed", 0)),
        symbol_count=int(doc.get("symbol_count", 100_000)),
        noise={k: JointDistribution(v) for k, v in (doc.get("noise") or {}).items()},
        per_phase_timeout=int(doc.get("timeout_ticks", DEFAULT_TIMEOUT_TICKS)),
        record_symbols=bool(doc.get("record_symbols", False)),
    )
    return left, right, cfg
