"""Implementation variation per constraint set and across a layered system."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .channel import ConstraintSet, validate
from .errors import DomainError, ValidationError
from .info_core import entropy_bound


def variation_bits(t: int, r: int) -> float:
    """|log2 r - log2 t|: the bound mismatch left by unpaired elements."""
    for name, v in (("t", t), ("r", r)):
        if isinstance(v, bool) or int(v) != v or v < 1:
            raise DomainError(f"{name} must be a positive integer, got {v!r}")
    if t == r:
        return 0.0
    return abs(math.log2(r) - math.log2(t))


@dataclass(frozen=True)
class SystemOfConstraints:
    id: str
    layers: tuple[ConstraintSet, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise ValidationError(f"system {self.id!r} has no layers")
        ids = [layer.id for layer in layers]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise ValidationError(f"system {self.id!r}: duplicate layer ids {dupes}")


@dataclass(frozen=True)
class LayerVariation:
    layer_id: str
    t: int
    r: int
    n: int
    v_bits: float
    s_bound_bits: float
    included: bool


@dataclass(frozen=True)
class VariationReport:
    system_id: str
    per_layer: tuple[LayerVariation, ...]
    total_v_bits: float
    excluded_count: int

    @property
    def per_layer_s_bound_bits(self) -> tuple[float, ...]:
        return tuple(row.s_bound_bits for row in self.per_layer)

    def to_csv(self, precision: str = "fixed6") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["layer_id", "t", "r", "n", "v_bits", "s_bound_bits", "included"])
        for row in self.per_layer:
            w.writerow([
                row.layer_id, row.t, row.r, row.n,
                _fmt(row.v_bits, precision), _fmt(row.s_bound_bits, precision),
                "true" if row.included else "false",
            ])
        return buf.getvalue()

    def to_table(self, precision: str = "fixed6") -> str:
        lines = [f"system {self.system_id}"]
        lines.append(f"{'layer':<16} {'t':>6} {'r':>6} {'n':>6} {'v_bits':>12} {'s_bound':>12}  status")
        for row in self.per_layer:
            status = "included" if row.included else "excluded"
            lines.append(
                f"{row.layer_id:<16} {row.t:>6} {row.r:>6} {row.n:>6} "
                f"{_fmt(row.v_bits, precision):>12} {_fmt(row.s_bound_bits, precision):>12}  {status}"
            )
        lines.append(f"total_v={_fmt(self.total_v_bits, precision)} excluded={self.excluded_count}")
        return "\n".join(lines) + "\n"


def _fmt(x: float, precision: str) -> str:
    return repr(float(x)) if precision == "full" else f"{x:.6f}"


def system_variation(system: SystemOfConstraints) -> VariationReport:
    """Per-layer variation and the total over layers that are neither ignored nor faulty.

    The per-layer ``log2 n`` bounds are reported alongside; no combined
    bound is derived from them.
    """
    rows = []
    for layer in system.layers:
        problems = validate(layer)
        if problems:
            raise ValidationError(f"layer {layer.id!r}: " + "; ".join(problems))
        rows.append(LayerVariation(
            layer_id=layer.id, t=layer.t, r=layer.r, n=layer.n,
            v_bits=variation_bits(layer.t, layer.r),
            s_bound_bits=entropy_bound(layer.n),
            included=layer.included,
        ))
    total = math.fsum(row.v_bits for row in rows if row.included)
    return VariationReport(
        system_id=system.id,
        per_layer=tuple(rows),
        total_v_bits=total,
        excluded_count=sum(1 for row in rows if not row.included),
    )
