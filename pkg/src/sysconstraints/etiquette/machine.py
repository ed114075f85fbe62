"""Identify / negotiate / select state machine and a scripted two-party session runner.

``step`` is a pure transition function. The host owns message delivery and
time; :func:`run_session` is such a host for an in-order, lossless link.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Union

from ..errors import ParseError
from .codec import EtiquetteMessage, Kind, Selection, decode, encode
from .tree import CapabilityTree, rank_selections

DEFAULT_TIMEOUT_TICKS = 5_000_000  # 5 simulated seconds of microsecond ticks

NO_COMPATIBLE = "no compatible mode"
EXHAUSTED = "candidates exhausted"


class Phase(Enum):
    IDLE = "Idle"
    IDENTIFYING = "Identifying"
    NEGOTIATING = "Negotiating"
    SELECTING = "Selecting"
    ESTABLISHED = "Established"
    FAILED = "Failed"

    @property
    def terminal(self) -> bool:
        return self in (Phase.ESTABLISHED, Phase.FAILED)


class Start:
    def __repr__(self):
        return "START"


class Timeout:
    def __repr__(self):
        return "TIMEOUT"


START = Start()
TIMEOUT = Timeout()

Event = Union[EtiquetteMessage, bytes, Start, Timeout]


@dataclass(frozen=True)
class NegotiationState:
    local_caps: CapabilityTree
    phase: Phase = Phase.IDLE
    remote_caps: Optional[CapabilityTree] = None
    selected: Optional[Selection] = None
    failure_reason: Optional[str] = None
    initiator: bool = False
    endpoint_id: Optional[str] = None
    # carry endpoint_id in PROBE so simultaneous starts can be resolved
    announce_id: bool = False
    # responder policy: transmitter mode_ids refused with reason "policy"
    refuse: frozenset = frozenset()
    layer: Optional[str] = None
    proposal: Optional[Selection] = None
    pending: tuple[Selection, ...] = ()


def _fail(state: NegotiationState, reason: str, *out: EtiquetteMessage):
    return (
        replace(state, phase=Phase.FAILED, failure_reason=reason, selected=None, pending=()),
        tuple(out),
    )


def _open_negotiation(state: NegotiationState, remote: CapabilityTree):
    """Initiator has both trees: send its own CAPS and the first proposal."""
    state = replace(state, remote_caps=remote, phase=Phase.NEGOTIATING)
    own = EtiquetteMessage.caps_of(state.local_caps)
    ranked = [Selection(c.tx_mode, c.rx_mode) for c in rank_selections(state.local_caps, remote, state.layer)]
    if not ranked:
        return _fail(state, NO_COMPATIBLE, own, EtiquetteMessage.reject(NO_COMPATIBLE))
    first, rest = ranked[0], tuple(ranked[1:])
    state = replace(state, phase=Phase.SELECTING, proposal=first, pending=rest)
    return state, (own, EtiquetteMessage(Kind.PROPOSE, selection=first))


def _acceptable(state: NegotiationState, sel: Selection) -> Optional[str]:
    """Reason to refuse ``sel`` from the responder's side, or None."""
    ranked = rank_selections(state.remote_caps, state.local_caps, state.layer)
    if (sel.tx_mode, sel.rx_mode) not in {(c.tx_mode, c.rx_mode) for c in ranked}:
        return "incompatible"
    if sel.tx_mode in state.refuse:
        return "policy"
    return None


def step(state: NegotiationState, event: Event):
    """Advance one endpoint by one event.

    Returns ``(new_state, outgoing_messages)``. Every (phase, event) pair
    has a successor; anything unexpected lands in Failed with a reason.
    """
    if state.phase.terminal:
        return state, ()
    if isinstance(event, Timeout):
        return _fail(state, "timeout")
    if isinstance(event, (bytes, bytearray)):
        try:
            event = decode(event)
        except ParseError as e:
            return _fail(state, f"malformed message: {e}")
    phase = state.phase

    if isinstance(event, Start):
        if phase is Phase.IDLE:
            state = replace(state, initiator=True, phase=Phase.IDENTIFYING)
            return state, (EtiquetteMessage.probe(state.endpoint_id if state.announce_id else None),)
        return _fail(state, f"unexpected start in {phase.value}")

    if not isinstance(event, EtiquetteMessage):
        return _fail(state, f"unsupported event {event!r}")
    kind = event.kind

    if kind is Kind.PROBE:
        if phase is Phase.IDLE:
            state = replace(state, initiator=False, phase=Phase.IDENTIFYING)
            return state, (EtiquetteMessage.caps_of(state.local_caps),)
        if phase is Phase.IDENTIFYING and state.initiator:
            # both sides started: the lower endpoint id keeps the initiator role
            mine, theirs = state.endpoint_id, event.endpoint_id
            if mine is None or theirs is None or mine == theirs:
                return _fail(state, "simultaneous start could not be resolved")
            if mine < theirs:
                return state, ()
            state = replace(state, initiator=False)
            return state, (EtiquetteMessage.caps_of(state.local_caps),)

    elif kind is Kind.CAPS and phase is Phase.IDENTIFYING:
        if state.initiator:
            return _open_negotiation(state, event.caps)
        return replace(state, remote_caps=event.caps, phase=Phase.NEGOTIATING), ()

    elif kind is Kind.PROPOSE and phase is Phase.NEGOTIATING and not state.initiator:
        reason = _acceptable(state, event.selection)
        if reason is not None:
            return state, (EtiquetteMessage.reject(reason),)
        state = replace(state, phase=Phase.SELECTING, proposal=event.selection)
        return state, (EtiquetteMessage(Kind.ACCEPT, selection=event.selection),)

    elif kind is Kind.ACCEPT and phase is Phase.SELECTING and state.initiator:
        if event.selection != state.proposal:
            return _fail(state, "ACCEPT does not match the outstanding proposal")
        state = replace(state, phase=Phase.ESTABLISHED, selected=event.selection, pending=())
        return state, (EtiquetteMessage(Kind.CONFIRM, selection=event.selection),)

    elif kind is Kind.REJECT:
        if phase is Phase.SELECTING and state.initiator:
            if not state.pending:
                return _fail(state, EXHAUSTED, EtiquetteMessage.reject(EXHAUSTED))
            nxt, rest = state.pending[0], state.pending[1:]
            state = replace(state, proposal=nxt, pending=rest)
            return state, (EtiquetteMessage(Kind.PROPOSE, selection=nxt),)
        if not state.initiator and phase in (Phase.IDENTIFYING, Phase.NEGOTIATING, Phase.SELECTING):
            return _fail(state, event.reason)

    elif kind is Kind.CONFIRM and phase is Phase.SELECTING and not state.initiator:
        if event.selection != state.proposal:
            return _fail(state, "CONFIRM does not match the accepted proposal")
        return replace(state, phase=Phase.ESTABLISHED, selected=event.selection), ()

    return _fail(state, f"unexpected {kind.name} in {phase.value}")


@dataclass(frozen=True)
class WireRecord:
    tick: int
    direction: str
    kind: str
    wire: bytes


@dataclass
class SessionResult:
    left: NegotiationState
    right: NegotiationState
    transcript: list[WireRecord] = field(default_factory=list)
    end_tick: int = 0

    @property
    def established(self) -> bool:
        return self.left.phase is Phase.ESTABLISHED and self.right.phase is Phase.ESTABLISHED

    @property
    def selected(self) -> Optional[Selection]:
        return self.left.selected if self.established else None

    @property
    def failure_reason(self) -> Optional[str]:
        if self.established:
            return None
        return self.left.failure_reason or self.right.failure_reason or "incomplete"


def run_session(
    left: NegotiationState,
    right: NegotiationState,
    timeout_ticks: int = DEFAULT_TIMEOUT_TICKS,
    both_start: bool = False,
    max_events: int = 10_000,
) -> SessionResult:
    """Drive two machines against each other over an in-order lossless link.

    ``left`` receives the start command (both do when ``both_start``).
    Each delivery costs one tick. When no message is in flight, the first
    non-terminal endpoint whose phase timer expires gets a timeout.
    """
    states = {"L": left, "R": right}
    entered = {"L": 0, "R": 0}
    peer = {"L": "R", "R": "L"}
    queue: list = []
    seq = 0
    now = 0
    transcript: list[WireRecord] = []

    def feed(side: str, event) -> None:
        nonlocal seq
        before = states[side].phase
        states[side], out = step(states[side], event)
        if states[side].phase is not before:
            entered[side] = now
        for msg in out:
            wire = encode(msg)
            transcript.append(WireRecord(now, f"{side}->{peer[side]}", msg.kind.name, wire))
            seq += 1
            heapq.heappush(queue, (now + 1, seq, peer[side], wire))

    feed("L", START)
    if both_start:
        feed("R", START)
    events = 0
    while events < max_events:
        events += 1
        if queue:
            now, _, side, wire = heapq.heappop(queue)
            feed(side, wire)
            continue
        waiting = [s for s in ("L", "R") if not states[s].phase.terminal]
        if not waiting:
            break
        side = min(waiting, key=lambda s: (entered[s] + timeout_ticks, s))
        now = max(now, entered[side] + timeout_ticks)
        feed(side, TIMEOUT)
    return SessionResult(states["L"], states["R"], transcript, now)
