"""JSON input documents: distributions, channels, systems, capability trees, scenarios.

The README documents the field-by-field schemas.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

from .channel import Alphabet, ConstraintSet, common_set
from .errors import ValidationError
from .etiquette.tree import CapabilityTree, ModeDescriptor, Node
from .info_core import Distribution, JointDistribution
from .variation import SystemOfConstraints

ANALOG_KEYS = ("analog", "tolerance")


def read_json(path) -> Any:
    """Load a JSON file. OSError propagates; bad JSON becomes ValidationError."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: not valid JSON ({e})") from None


def _require(doc: dict, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ValidationError(f"{where}: missing field {key!r}")
    return doc[key]


def parse_distribution(doc) -> Distribution:
    if isinstance(doc, list):
        return Distribution(tuple(doc))
    probs = _require(doc, "probs", "distribution")
    return Distribution(tuple(probs), doc.get("size"))


def parse_alphabet(doc, where: str) -> Alphabet:
    return Alphabet(str(_require(doc, "id", where)), tuple(_require(doc, "elements", where)))


class ChannelSpec:
    """A parsed channel document: the constraint set plus its optional source and noise."""

    def __init__(self, cs: ConstraintSet, source: Optional[Distribution], noise: Optional[JointDistribution]):
        self.cs = cs
        self.source = source
        self.noise = noise


def parse_channel(doc, default_id: str = "channel") -> ChannelSpec:
    if not isinstance(doc, dict):
        raise ValidationError("channel spec must be a JSON object")
    cid = str(doc.get("id", default_id))
    for key in ANALOG_KEYS:
        if doc.get(key):
            raise ValidationError(
                f"channel {cid!r}: analog/tolerance parameters are not supported; "
                "only incremental (countable element) parameters can be modelled"
            )
    tx = parse_alphabet(_require(doc, "tx", cid), f"{cid}.tx")
    rx = parse_alphabet(_require(doc, "rx", cid), f"{cid}.rx")
    ignored = bool(doc.get("ignored", False))
    fault = bool(doc.get("fault", False))
    if "pairs" in doc and doc["pairs"] is not None:
        pairs = []
        for p in doc["pairs"]:
            if not isinstance(p, (list, tuple)) or len(p) != 2:
                raise ValidationError(f"channel {cid!r}: each pair must be [txLabel, rxLabel]")
            pairs.append((p[0], p[1]))
        cs = ConstraintSet(cid, tx, rx, tuple(pairs), ignored, fault)
    else:
        base = common_set(tx, rx, id=cid)
        cs = ConstraintSet(cid, tx, rx, base.pairs, ignored, fault)
    source = Distribution(tuple(doc["source"])) if doc.get("source") is not None else None
    noise = JointDistribution(doc["noise"]) if doc.get("noise") is not None else None
    return ChannelSpec(cs, source, noise)


def parse_system(doc) -> SystemOfConstraints:
    sid = str(_require(doc, "id", "system"))
    layers = _require(doc, "layers", sid)
    if not isinstance(layers, list):
        raise ValidationError(f"system {sid!r}: layers must be a list")
    return SystemOfConstraints(
        sid, tuple(parse_channel(layer, f"layer{i}").cs for i, layer in enumerate(layers))
    )


def parse_node(doc) -> Node:
    mode = doc.get("mode")
    return Node(
        tag=int(_require(doc, "tag", "node")),
        children=tuple(parse_node(c) for c in doc.get("children", [])),
        mode=None if mode is None else ModeDescriptor(
            mode_id=str(_require(mode, "mode_id", "mode")),
            role=_require(mode, "role", "mode"),
            states=int(_require(mode, "states", "mode")),
            revision=int(mode.get("revision", 0)),
            layer_tags=tuple(mode.get("layer_tags", ())),
        ),
    )


def parse_caps(doc) -> CapabilityTree:
    return CapabilityTree(
        version=int(doc.get("version", 0)),
        nodes=tuple(parse_node(n) for n in doc.get("nodes", [])),
        bug_list=tuple((b[0], int(b[1])) for b in doc.get("bug_list", [])),
    )


def caps_to_json(tree: CapabilityTree) -> dict:
    def node(n: Node) -> dict:
        out: dict = {"tag": n.tag}
        if n.mode is not None:
            m = n.mode
            out["mode"] = {
                "mode_id": m.mode_id, "role": m.role.name.lower(), "states": m.states,
                "revision": m.revision, "layer_tags": list(m.layer_tags),
            }
        if n.children:
            out["children"] = [node(c) for c in n.children]
        return out

    return {
        "version": tree.version,
        "nodes": [node(n) for n in tree.nodes],
        "bug_list": [list(b) for b in tree.bug_list],
    }
