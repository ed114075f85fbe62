"""Capability negotiation between multi-mode endpoints."""

from .codec import EncodeError, EtiquetteMessage, Kind, Selection, decode, encode
from .machine import (
    DEFAULT_TIMEOUT_TICKS,
    START,
    TIMEOUT,
    NegotiationState,
    Phase,
    SessionResult,
    WireRecord,
    run_session,
    step,
)
from .tree import (
    Candidate,
    CapabilityTree,
    ModeDescriptor,
    Node,
    Role,
    is_superset,
    rank_selections,
)
