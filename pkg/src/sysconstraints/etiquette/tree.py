"""Capability trees: the negotiable description of an endpoint's modes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, NamedTuple, Optional

from ..errors import SupersetViolation, ValidationError

U16_MAX = 0xFFFF
U32_MAX = 0xFFFFFFFF


class Role(IntEnum):
    TX = 0
    RX = 1

    @classmethod
    def parse(cls, value) -> "Role":
        if isinstance(value, Role):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            if key in ("tx", "transmitter"):
                return cls.TX
            if key in ("rx", "receiver"):
                return cls.RX
            raise ValidationError(f"unknown role {value!r}")
        return cls(int(value))


@dataclass(frozen=True)
class ModeDescriptor:
    mode_id: str
    role: Role
    states: int
    revision: int = 0
    layer_tags: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "role", Role.parse(self.role))
        object.__setattr__(self, "layer_tags", tuple(self.layer_tags))
        if not isinstance(self.mode_id, str) or not self.mode_id:
            raise ValidationError(f"mode_id must be a non-empty string, got {self.mode_id!r}")
        if not 1 <= self.states <= U32_MAX:
            raise ValidationError(f"mode {self.mode_id!r}: states must be in 1..2^32-1, got {self.states}")
        if not 0 <= self.revision <= U32_MAX:
            raise ValidationError(f"mode {self.mode_id!r}: revision out of range: {self.revision}")

    @property
    def s_bits(self) -> float:
        return math.log2(self.states)


@dataclass(frozen=True)
class Node:
    """One tag-addressed tree entry; ``mode`` is set on leaves that describe a mode."""

    tag: int
    children: tuple["Node", ...] = ()
    mode: Optional[ModeDescriptor] = None

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if isinstance(self.tag, bool) or not 0 <= self.tag <= U16_MAX:
            raise ValidationError(f"node tag must fit in 16 bits, got {self.tag!r}")
        _check_sibling_tags(self.children, (self.tag,))


def _check_sibling_tags(nodes, prefix) -> None:
    seen = set()
    for node in nodes:
        if node.tag in seen:
            raise ValidationError(f"tag path {prefix + (node.tag,)} is not unique")
        seen.add(node.tag)


@dataclass(frozen=True)
class CapabilityTree:
    version: int
    nodes: tuple[Node, ...] = ()
    bug_list: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(
            self, "bug_list", tuple((str(m), int(r)) for m, r in self.bug_list)
        )
        if isinstance(self.version, bool) or not 0 <= self.version <= U32_MAX:
            raise ValidationError(f"tree version out of range: {self.version!r}")
        _check_sibling_tags(self.nodes, ())
        seen = set()
        for mode in self.modes():
            if mode.mode_id in seen:
                raise ValidationError(f"mode_id {mode.mode_id!r} appears twice in one tree")
            seen.add(mode.mode_id)
        for mode_id, rev in self.bug_list:
            if not mode_id or not 0 <= rev <= U32_MAX:
                raise ValidationError(f"bad bug-list entry ({mode_id!r}, {rev!r})")

    def walk(self) -> Iterator[tuple[tuple[int, ...], Node]]:
        stack = [((node.tag,), node) for node in reversed(self.nodes)]
        while stack:
            path, node = stack.pop()
            yield path, node
            stack.extend((path + (c.tag,), c) for c in reversed(node.children))

    def tag_paths(self) -> dict[tuple[int, ...], Node]:
        return dict(self.walk())

    def modes(self) -> list[ModeDescriptor]:
        return [node.mode for _, node in self.walk() if node.mode is not None]

    def mode(self, mode_id: str) -> Optional[ModeDescriptor]:
        for m in self.modes():
            if m.mode_id == mode_id:
                return m
        return None

    def is_buggy(self, mode: ModeDescriptor) -> bool:
        return (mode.mode_id, mode.revision) in self.bug_list

    def evolve(self, new: "CapabilityTree") -> "CapabilityTree":
        """Accept ``new`` as the successor of this tree, or raise SupersetViolation."""
        if new.version <= self.version:
            raise SupersetViolation(
                f"version must increase: {self.version} -> {new.version}"
            )
        if not is_superset(new, self):
            raise SupersetViolation(
                f"version {new.version} drops tag paths or modes present in version {self.version}"
            )
        return new


def _payload_extends(new: Optional[ModeDescriptor], old: Optional[ModeDescriptor]) -> bool:
    if old is None:
        return True
    if new is None:
        return False
    return (
        new.mode_id == old.mode_id
        and new.role == old.role
        and new.states == old.states
        and new.revision >= old.revision
        and set(old.layer_tags) <= set(new.layer_tags)
    )


def is_superset(new: CapabilityTree, old: CapabilityTree) -> bool:
    """True iff ``new`` keeps every tag path and leaf payload of ``old``.

    Leaf payloads may come back with a higher revision or extra layer tags.
    """
    new_paths = new.tag_paths()
    for path, old_node in old.walk():
        new_node = new_paths.get(path)
        if new_node is None or not _payload_extends(new_node.mode, old_node.mode):
            return False
    return True


class Candidate(NamedTuple):
    tx_mode: str
    rx_mode: str
    s_bits: float


def rank_selections(
    local: CapabilityTree, remote: CapabilityTree, layer: Optional[str] = None
) -> list[Candidate]:
    """Compatible (local transmitter, remote receiver) pairs, best first.

    Modes are compatible when they share a mode_id. A pair is dropped when
    either descriptor's (mode_id, revision) is on either side's bug list.
    Ranking is by ``log2`` of the usable state count, descending, then by
    mode_id ascending.
    """
    receivers = {m.mode_id: m for m in remote.modes() if m.role is Role.RX}
    out = []
    for tx in local.modes():
        if tx.role is not Role.TX:
            continue
        rx = receivers.get(tx.mode_id)
        if rx is None:
            continue
        if layer is not None and (layer not in tx.layer_tags or layer not in rx.layer_tags):
            continue
        if any(tree.is_buggy(m) for tree in (local, remote) for m in (tx, rx)):
            continue
        out.append(Candidate(tx.mode_id, rx.mode_id, math.log2(min(tx.states, rx.states))))
    out.sort(key=lambda c: (-c.s_bits, c.tx_mode))
    return out
