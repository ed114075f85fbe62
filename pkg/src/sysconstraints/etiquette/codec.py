"""Binary wire format for etiquette messages.

Every message is::

    "ETQ1" | kind:u8 | payload_length:u16be | payload

and the payload is a sequence of TLVs (``tag:u16be | length:u16be | value``).
Tree nodes are container TLVs whose value is itself a TLV sequence.
Unknown tags inside a CAPS payload are skipped so that older decoders
can read newer, extended trees; unknown message kinds are rejected.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

from ..errors import ParseError, ValidationError
from .tree import CapabilityTree, ModeDescriptor, Node, Role, U16_MAX

MAGIC = b"ETQ1"
HEADER_LEN = 7
MAX_DEPTH = 32

TAG_NODE = 0x0001
TAG_NODE_TAG = 0x0002
TAG_TREE_VERSION = 0x0003
TAG_MODE_ID = 0x0010
TAG_ROLE = 0x0011
TAG_STATES = 0x0012
TAG_REVISION = 0x0013
TAG_LAYER = 0x0014
TAG_BUG_ENTRY = 0x0020
TAG_SELECTION = 0x0030
TAG_REJECT_REASON = 0x0031
TAG_ENDPOINT_ID = 0x0040


class Kind(IntEnum):
    PROBE = 0x01
    CAPS = 0x02
    PROPOSE = 0x03
    ACCEPT = 0x04
    REJECT = 0x05
    CONFIRM = 0x06


SELECTION_KINDS = (Kind.PROPOSE, Kind.ACCEPT, Kind.CONFIRM)


@dataclass(frozen=True)
class Selection:
    tx_mode: str
    rx_mode: str

    def __str__(self):
        return self.tx_mode if self.tx_mode == self.rx_mode else f"{self.tx_mode}->{self.rx_mode}"


@dataclass(frozen=True)
class EtiquetteMessage:
    kind: Kind
    caps: Optional[CapabilityTree] = None
    selection: Optional[Selection] = None
    reason: Optional[str] = None
    endpoint_id: Optional[str] = None

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        want = {
            "caps": kind is Kind.CAPS,
            "selection": kind in SELECTION_KINDS,
            "reason": kind is Kind.REJECT,
        }
        for name, required in want.items():
            present = getattr(self, name) is not None
            if present != required:
                verb = "requires" if required else "does not carry"
                raise ValidationError(f"{kind.name} {verb} a {name}")
        if self.endpoint_id is not None and kind is not Kind.PROBE:
            raise ValidationError("only PROBE carries an endpoint id")

    @classmethod
    def probe(cls, endpoint_id: Optional[str] = None):
        return cls(Kind.PROBE, endpoint_id=endpoint_id)

    @classmethod
    def caps_of(cls, tree: CapabilityTree):
        return cls(Kind.CAPS, caps=tree)

    @classmethod
    def reject(cls, reason: str):
        return cls(Kind.REJECT, reason=reason)


class EncodeError(ValueError):
    pass


# -- encoding ---------------------------------------------------------------

def _tlv(tag: int, value: bytes) -> bytes:
    if len(value) > U16_MAX:
        raise EncodeError(f"TLV 0x{tag:04x} value is {len(value)} bytes (max {U16_MAX})")
    return struct.pack(">HH", tag, len(value)) + value


def _utf8(tag: int, text: str) -> bytes:
    return _tlv(tag, text.encode("utf-8"))


def _u32(tag: int, value: int) -> bytes:
    return _tlv(tag, struct.pack(">I", value))


def _encode_mode(mode: ModeDescriptor) -> bytes:
    parts = [
        _utf8(TAG_MODE_ID, mode.mode_id),
        _tlv(TAG_ROLE, bytes([int(mode.role)])),
        _u32(TAG_STATES, mode.states),
        _u32(TAG_REVISION, mode.revision),
    ]
    parts.extend(_utf8(TAG_LAYER, layer) for layer in mode.layer_tags)
    return b"".join(parts)


def _encode_node(node: Node) -> bytes:
    body = _tlv(TAG_NODE_TAG, struct.pack(">H", node.tag))
    if node.mode is not None:
        body += _encode_mode(node.mode)
    body += b"".join(_encode_node(c) for c in node.children)
    return _tlv(TAG_NODE, body)


def _encode_caps(tree: CapabilityTree) -> bytes:
    parts = [_u32(TAG_TREE_VERSION, tree.version)]
    parts.extend(_encode_node(n) for n in tree.nodes)
    for mode_id, rev in tree.bug_list:
        parts.append(_tlv(TAG_BUG_ENTRY, _utf8(TAG_MODE_ID, mode_id) + _u32(TAG_REVISION, rev)))
    return b"".join(parts)


def encode(msg: EtiquetteMessage) -> bytes:
    if msg.kind is Kind.PROBE:
        payload = b"" if msg.endpoint_id is None else _utf8(TAG_ENDPOINT_ID, msg.endpoint_id)
    elif msg.kind is Kind.CAPS:
        payload = _encode_caps(msg.caps)
    elif msg.kind is Kind.REJECT:
        payload = _utf8(TAG_REJECT_REASON, msg.reason)
    else:
        sel = msg.selection
        payload = _tlv(TAG_SELECTION, _utf8(TAG_MODE_ID, sel.tx_mode) + _utf8(TAG_MODE_ID, sel.rx_mode))
    if len(payload) > U16_MAX:
        raise EncodeError(f"payload is {len(payload)} bytes (max {U16_MAX})")
    return MAGIC + struct.pack(">BH", int(msg.kind), len(payload)) + payload


# -- decoding ---------------------------------------------------------------

def _split(buf: bytes, start: int, end: int) -> list[tuple[int, int, int]]:
    """Split ``buf[start:end]`` into (tag, value_start, value_end) triples."""
    out = []
    pos = start
    while pos < end:
        if end - pos < 4:
            raise ParseError(pos, "truncated TLV header")
        tag, length = struct.unpack_from(">HH", buf, pos)
        if pos + 4 + length > end:
            raise ParseError(pos, f"TLV 0x{tag:04x} value overruns its container")
        out.append((tag, pos + 4, pos + 4 + length))
        pos += 4 + length
    return out


def _text(buf: bytes, vs: int, ve: int) -> str:
    try:
        return buf[vs:ve].decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(vs + e.start, "invalid UTF-8") from None


def _uint(buf: bytes, vs: int, ve: int, size: int) -> int:
    if ve - vs != size:
        raise ParseError(vs, f"expected {size}-byte integer, got {ve - vs} bytes")
    return int.from_bytes(buf[vs:ve], "big")


def _singletons(items, allowed: dict[int, str], strict: bool):
    """Group TLVs by tag; singletons must appear at most once."""
    single: dict[int, tuple[int, int]] = {}
    multi: dict[int, list[tuple[int, int]]] = {}
    for tag, vs, ve in items:
        kind = allowed.get(tag)
        if kind == "one":
            if tag in single:
                raise ParseError(vs - 4, f"duplicate TLV 0x{tag:04x}")
            single[tag] = (vs, ve)
        elif kind == "many":
            multi.setdefault(tag, []).append((vs, ve))
        elif strict:
            raise ParseError(vs - 4, f"unexpected TLV 0x{tag:04x}")
    return single, multi


_NODE_FIELDS = {
    TAG_NODE_TAG: "one", TAG_MODE_ID: "one", TAG_ROLE: "one", TAG_STATES: "one",
    TAG_REVISION: "one", TAG_LAYER: "many", TAG_NODE: "many",
}


def _decode_node(buf: bytes, vs: int, ve: int, depth: int) -> Node:
    if depth > MAX_DEPTH:
        raise ParseError(vs, f"tree nested deeper than {MAX_DEPTH}")
    items = _split(buf, vs, ve)
    single, multi = _singletons(items, _NODE_FIELDS, strict=False)
    if TAG_NODE_TAG not in single:
        raise ParseError(vs, "node without a tag")
    tag = _uint(buf, *single[TAG_NODE_TAG], 2)
    mode_tags = (TAG_MODE_ID, TAG_ROLE, TAG_STATES, TAG_REVISION)
    present = [t for t in mode_tags if t in single]
    mode = None
    if present:
        if len(present) != len(mode_tags):
            raise ParseError(vs, "incomplete mode descriptor")
        role_raw = _uint(buf, *single[TAG_ROLE], 1)
        if role_raw not in (0, 1):
            raise ParseError(single[TAG_ROLE][0], f"role must be 0 or 1, got {role_raw}")
        try:
            mode = ModeDescriptor(
                mode_id=_text(buf, *single[TAG_MODE_ID]),
                role=Role(role_raw),
                states=_uint(buf, *single[TAG_STATES], 4),
                revision=_uint(buf, *single[TAG_REVISION], 4),
                layer_tags=tuple(_text(buf, s, e) for s, e in multi.get(TAG_LAYER, [])),
            )
        except ValidationError as e:
            raise ParseError(vs, str(e)) from None
    elif TAG_LAYER in multi:
        raise ParseError(vs, "layer tag outside a mode descriptor")
    children = tuple(_decode_node(buf, s, e, depth + 1) for s, e in multi.get(TAG_NODE, []))
    try:
        return Node(tag=tag, children=children, mode=mode)
    except ValidationError as e:
        raise ParseError(vs, str(e)) from None


def _decode_caps(buf: bytes, start: int, end: int) -> CapabilityTree:
    items = _split(buf, start, end)
    single, multi = _singletons(
        items,
        {TAG_TREE_VERSION: "one", TAG_NODE: "many", TAG_BUG_ENTRY: "many"},
        strict=False,
    )
    if TAG_TREE_VERSION not in single:
        raise ParseError(start, "CAPS without a tree version")
    version = _uint(buf, *single[TAG_TREE_VERSION], 4)
    nodes = tuple(_decode_node(buf, s, e, 1) for s, e in multi.get(TAG_NODE, []))
    bugs = []
    for s, e in multi.get(TAG_BUG_ENTRY, []):
        inner, _ = _singletons(
            _split(buf, s, e), {TAG_MODE_ID: "one", TAG_REVISION: "one"}, strict=False
        )
        if TAG_MODE_ID not in inner or TAG_REVISION not in inner:
            raise ParseError(s, "bug entry needs a mode_id and a revision")
        bugs.append((_text(buf, *inner[TAG_MODE_ID]), _uint(buf, *inner[TAG_REVISION], 4)))
    try:
        return CapabilityTree(version=version, nodes=nodes, bug_list=tuple(bugs))
    except ValidationError as e:
        raise ParseError(start, str(e)) from None


def _decode_selection(buf: bytes, start: int, end: int) -> Selection:
    items = _split(buf, start, end)
    if len(items) != 1 or items[0][0] != TAG_SELECTION:
        raise ParseError(start, "expected exactly one selection TLV")
    _, vs, ve = items[0]
    inner = _split(buf, vs, ve)
    if len(inner) != 2 or any(tag != TAG_MODE_ID for tag, _, _ in inner):
        raise ParseError(vs, "selection must hold exactly two mode_id TLVs")
    tx, rx = (_text(buf, s, e) for _, s, e in inner)
    return Selection(tx, rx)


def decode(data: bytes) -> EtiquetteMessage:
    """Parse one complete message; anything malformed raises ParseError."""
    buf = bytes(data)
    if len(buf) < HEADER_LEN:
        if buf[: len(MAGIC)] != MAGIC[: len(buf)]:
            raise ParseError(0, "bad magic")
        raise ParseError(len(buf), "truncated header")
    if buf[:4] != MAGIC:
        raise ParseError(0, "bad magic")
    try:
        kind = Kind(buf[4])
    except ValueError:
        raise ParseError(4, f"unknown message kind 0x{buf[4]:02x}") from None
    (length,) = struct.unpack_from(">H", buf, 5)
    end = HEADER_LEN + length
    if len(buf) < end:
        raise ParseError(len(buf), "payload shorter than declared length")
    if len(buf) > end:
        raise ParseError(end, "trailing bytes after payload")

    if kind is Kind.PROBE:
        items = _split(buf, HEADER_LEN, end)
        if not items:
            return EtiquetteMessage.probe()
        if len(items) != 1 or items[0][0] != TAG_ENDPOINT_ID:
            raise ParseError(HEADER_LEN, "PROBE may only carry one endpoint id")
        return EtiquetteMessage.probe(_text(buf, items[0][1], items[0][2]))
    if kind is Kind.CAPS:
        return EtiquetteMessage.caps_of(_decode_caps(buf, HEADER_LEN, end))
    if kind is Kind.REJECT:
        items = _split(buf, HEADER_LEN, end)
        if len(items) != 1 or items[0][0] != TAG_REJECT_REASON:
            raise ParseError(HEADER_LEN, "REJECT must carry exactly one reason")
        return EtiquetteMessage.reject(_text(buf, items[0][1], items[0][2]))
    return EtiquetteMessage(kind, selection=_decode_selection(buf, HEADER_LEN, end))
