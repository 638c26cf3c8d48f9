"""Switching-activity stimuli, an energy proxy and transistor estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..algebra import BaseItem, Chain
from .sim import ACTIVITY_CLASSES, Copu, CopuConfig, CopuStats, OpCommand, OpKind

__all__ = [
    "ActivityReport",
    "worst_case_commands",
    "worst_case_activity",
    "energy_proxy",
    "TransistorReport",
    "estimate_transistors",
    "REFERENCE_BITS",
]

# Reference design: l=8, y=1, d=8.
REFERENCE_BITS = (8, 1, 8)
ALU_PER_BIT = 42
MUX_PER_BIT = 68
CONTROL_TRANSISTORS = 2304
REGISTER_TRANSISTORS = 1198


@dataclass(frozen=True)
class ActivityReport:
    kind: OpKind
    rank_a: int
    rank_b: int
    input_bits: int
    output_bits: int
    stats: CopuStats

    @property
    def toggles(self) -> dict:
        return self.stats.toggles

    @property
    def register_share(self) -> float:
        total = self.stats.total_toggles
        return self.stats.toggles["register"] / total if total else 0.0

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "rank_a": self.rank_a,
            "rank_b": self.rank_b,
            "input_bits": self.input_bits,
            "output_bits": self.output_bits,
            "register_share": self.register_share,
            "stats": self.stats.as_dict(),
        }


def worst_case_commands(cfg: CopuConfig, kind: OpKind | str, fill: bool = True) -> OpCommand:
    """The all-ones stimulus that flips the most nodes from a zeroed unit.

    Superposition fills all ``d`` output slots from two halves; binding uses
    a ``(d/2) x 2`` product, which is ``4 x 2`` on the reference design.
    ``fill=False`` gives the same shapes with all-zero items.
    """
    kind = OpKind(kind)
    params = cfg.params
    value = params.p - 1 if fill else 0
    item = BaseItem((value,) * params.y, params.p)
    d = params.d
    if kind is OpKind.SUPERPOSE:
        ra, rb = (d + 1) // 2, d // 2
    else:
        ra = max(1, d // 2)
        rb = d // ra
    return OpCommand(kind, Chain(params, (item,) * ra), Chain(params, (item,) * rb))


def worst_case_activity(cfg: CopuConfig, kind: OpKind | str, fill: bool = True) -> ActivityReport:
    cmd = worst_case_commands(cfg, kind, fill)
    _, stats = Copu(cfg).run_op(cmd)
    return ActivityReport(
        kind=cmd.kind,
        rank_a=cmd.a.rank,
        rank_b=cmd.b.rank,
        input_bits=stats.input_bit_flips,
        output_bits=stats.output_bit_flips,
        stats=stats,
    )


def energy_proxy(stats: CopuStats, cfg: CopuConfig) -> float:
    """Weighted toggle count, arbitrary units."""
    return float(sum(stats.toggles[c] * cfg.toggle_weights[c] for c in ACTIVITY_CLASSES))


@dataclass(frozen=True)
class TransistorReport:
    alu: int
    mux_demux: int
    control: int
    registers: int
    extrapolated: bool

    @property
    def datapath(self) -> int:
        return self.alu + self.mux_demux

    @property
    def total(self) -> int:
        return self.datapath + self.control + self.registers

    def as_dict(self) -> dict:
        return {
            "alu": self.alu,
            "mux_demux": self.mux_demux,
            "datapath": self.datapath,
            "control": self.control,
            "registers": self.registers,
            "total": self.total,
            "extrapolated": self.extrapolated,
        }


def estimate_transistors(cfg: CopuConfig) -> TransistorReport:
    """Scale the reference transistor counts to another configuration.

    Datapath cost is linear in item bit-width. The MUX/DEMUX share also grows
    with tree depth ``log2(d)``; that scaling and the fixed control and
    register figures are only exact for the reference design, so any other
    configuration is flagged as extrapolated.
    """
    params = cfg.params
    bits = cfg.item_bits
    ref_depth = math.log2(REFERENCE_BITS[2])
    mux_per_bit = MUX_PER_BIT * params.m / ref_depth
    return TransistorReport(
        alu=ALU_PER_BIT * bits,
        mux_demux=round(mux_per_bit * bits),
        control=CONTROL_TRANSISTORS,
        registers=REGISTER_TRANSISTORS,
        extrapolated=(params.l, params.y, params.d) != REFERENCE_BITS,
    )
