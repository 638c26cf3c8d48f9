"""Cycle-level behavioural model of the cognitive processing unit.

The datapath is a MUX/DEMUX pair around a bank of ``y`` ``l``-bit ADD/SUB
units. A controller FSM spends one cycle decoding the request (flag
arithmetic) and then one cycle per result item. Operand and output registers
are plain integers, ``d`` slots of ``l*y`` bits each, slot 0 in the low bits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..algebra import (
    BaseItem,
    Chain,
    RankOverflowError,
    SystemParams,
    UndefinedOperandError,
)

__all__ = [
    "ACTIVITY_CLASSES",
    "REGISTER_NODES_PER_BIT",
    "CopuConfig",
    "OpKind",
    "OpCommand",
    "Phase",
    "Signals",
    "CopuState",
    "CopuStats",
    "CopuBusyError",
    "Copu",
]

ACTIVITY_CLASSES = ("input", "datapath", "register", "control")

# Output cells are master-slave flip-flops: a data change flips both latches.
REGISTER_NODES_PER_BIT = 2


class CopuBusyError(RuntimeError):
    pass


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class CopuConfig:
    params: SystemParams = field(default_factory=lambda: SystemParams(256, 1, 8))
    clock_period_ns: float = 20.0
    toggle_weights: dict = field(
        default_factory=lambda: {c: 1.0 for c in ACTIVITY_CLASSES}
    )
    # controller netlist is not modelled; its activity is a flat per-cycle charge
    control_toggles_per_cycle: int = 2

    def __post_init__(self):
        if not self.params.power_of_two:
            raise ValueError(f"simulator needs power-of-two p, y, d; got {self.params}")
        missing = set(ACTIVITY_CLASSES) - set(self.toggle_weights)
        if missing:
            raise ValueError(f"toggle_weights lacks classes {sorted(missing)}")

    @classmethod
    def from_bits(cls, l: int, y: int, d: int, **kw) -> CopuConfig:
        return cls(SystemParams(1 << l, y, d), **kw)

    @property
    def l(self) -> int:
        return self.params.l

    @property
    def item_bits(self) -> int:
        return self.params.l * self.params.y

    @property
    def operand_bits(self) -> int:
        return self.item_bits * self.params.d

    @property
    def flag_bits(self) -> int:
        return self.params.x

    @property
    def clock_frequency_mhz(self) -> float:
        return 1e3 / self.clock_period_ns


class OpKind(enum.Enum):
    SUPERPOSE = "superpose"
    BIND = "bind"
    BIND_INVERSE = "bind-inverse"


@dataclass(frozen=True)
class OpCommand:
    """One request to the unit. ``BIND_INVERSE`` subtracts ``b`` items from ``a``."""

    kind: OpKind
    a: Chain
    b: Chain

    def __post_init__(self):
        object.__setattr__(self, "kind", OpKind(self.kind))
        if self.a.params != self.b.params:
            raise ValueError("operands use different params")
        d = self.a.params.d
        if self.kind is OpKind.SUPERPOSE:
            if self.a.rank + self.b.rank > d:
                raise RankOverflowError(
                    f"superposition of ranks {self.a.rank}+{self.b.rank} exceeds d={d}"
                )
        else:
            if self.a.rank == 0 or self.b.rank == 0:
                raise UndefinedOperandError("binding is undefined for empty chains")
            if self.a.rank * self.b.rank > d:
                raise RankOverflowError(
                    f"binding of ranks {self.a.rank}x{self.b.rank} exceeds d={d}"
                )

    @property
    def result_rank(self) -> int:
        if self.kind is OpKind.SUPERPOSE:
            return self.a.rank + self.b.rank
        return self.a.rank * self.b.rank


class Phase(enum.Enum):
    IDLE = "IDLE"
    DECODE = "DECODE"
    EXEC = "EXEC"


@dataclass
class Signals:
    RQ: bool = False
    EN: bool = False
    ADDSUB: bool = False  # True selects SUB
    EQ: bool = False
    done: bool = False


@dataclass
class CopuState:
    opA: int = 0
    opB: int = 0
    flagA: int = 0
    flagB: int = 0
    out: int = 0
    out_flag: int = 0
    phase: Phase = Phase.IDLE
    cycle_count: int = 0
    signals: Signals = field(default_factory=Signals)
    activity: dict = field(default_factory=lambda: {c: 0 for c in ACTIVITY_CLASSES})
    # datapath nodes
    bus_a: int = 0
    bus_b: int = 0
    bus_out: int = 0
    carries: int = 0
    # controller internals
    kind: OpKind | None = None
    slot: int = 0
    result_rank: int = 0
    # plain bit-flip tallies (not node-weighted), for reporting
    input_bit_flips: int = 0
    output_bit_flips: int = 0


@dataclass(frozen=True)
class CopuStats:
    kind: OpKind | None
    cycles: int
    toggles: dict
    input_bit_flips: int
    output_bit_flips: int
    eq: bool
    result_rank: int

    @property
    def total_toggles(self) -> int:
        return sum(self.toggles.values())

    def merge(self, other: CopuStats) -> CopuStats:
        return CopuStats(
            kind=self.kind if self.kind == other.kind else None,
            cycles=self.cycles + other.cycles,
            toggles={c: self.toggles[c] + other.toggles[c] for c in ACTIVITY_CLASSES},
            input_bit_flips=self.input_bit_flips + other.input_bit_flips,
            output_bit_flips=self.output_bit_flips + other.output_bit_flips,
            eq=self.eq and other.eq,
            result_rank=self.result_rank + other.result_rank,
        )

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value if self.kind else None,
            "cycles": self.cycles,
            "toggles": dict(self.toggles),
            "input_bit_flips": self.input_bit_flips,
            "output_bit_flips": self.output_bit_flips,
            "eq": self.eq,
            "result_rank": self.result_rank,
        }


class Copu:
    """One simulated unit. Not thread-safe; run independent instances instead.

    ``load`` stages a command and raises RQ, ``step`` advances one clock and
    ``run_op`` does both until ``done``. With ``trace=True`` every cycle is
    recorded in :attr:`trace` (see :meth:`format_trace`).
    """

    def __init__(self, cfg: CopuConfig | None = None, trace: bool = False):
        self.cfg = cfg or CopuConfig()
        self.state = CopuState()
        self.tracing = trace
        self.trace: list[str] = []
        self._last_activity = dict(self.state.activity)
        p = self.cfg.params
        self._l = p.l
        self._y = p.y
        self._w = self.cfg.item_bits
        self._elem_mask = (1 << p.l) - 1
        self._item_mask = (1 << self._w) - 1

    # -- encoding -------------------------------------------------------
    def encode_item(self, item: BaseItem) -> int:
        v = 0
        for k, e in enumerate(item.elems):
            v |= e << (k * self._l)
        return v

    def decode_item(self, v: int) -> BaseItem:
        elems = tuple((v >> (k * self._l)) & self._elem_mask for k in range(self._y))
        return BaseItem(elems, self.cfg.params.p)

    def encode_chain(self, c: Chain) -> int:
        v = 0
        for i, it in enumerate(c.items):
            v |= self.encode_item(it) << (i * self._w)
        return v

    def _slot(self, reg: int, i: int) -> int:
        return (reg >> (i * self._w)) & self._item_mask

    def output_chain(self) -> Chain:
        s = self.state
        items = tuple(self.decode_item(self._slot(s.out, i)) for i in range(s.out_flag))
        return Chain(self.cfg.params, items)

    # -- control --------------------------------------------------------
    def load(self, cmd: OpCommand) -> None:
        """Stage operands and flags, then raise RQ."""
        s = self.state
        if s.phase is not Phase.IDLE or s.signals.RQ:
            raise CopuBusyError("controller is busy")
        if cmd.a.params != self.cfg.params:
            raise ValueError(f"command params {cmd.a.params} != unit params {self.cfg.params}")
        new_a, new_b = self.encode_chain(cmd.a), self.encode_chain(cmd.b)
        data = _popcount(s.opA ^ new_a) + _popcount(s.opB ^ new_b)
        flags = _popcount(s.flagA ^ cmd.a.rank) + _popcount(s.flagB ^ cmd.b.rank)
        s.activity["input"] += data + flags
        s.input_bit_flips += data
        s.opA, s.opB = new_a, new_b
        s.flagA, s.flagB = cmd.a.rank, cmd.b.rank
        s.kind = cmd.kind
        s.signals.RQ = True
        s.signals.done = False

    def step(self) -> None:
        """Advance one clock cycle."""
        s = self.state
        s.cycle_count += 1
        if s.phase is Phase.IDLE and not s.signals.RQ:
            self._record(Phase.IDLE)
            return
        s.activity["control"] += self.cfg.control_toggles_per_cycle
        if s.phase is Phase.IDLE:
            self._decode()
            self._record(Phase.DECODE)
        else:
            self._execute_slot()
            self._record(Phase.EXEC)

    def _decode(self) -> None:
        s = self.state
        sig = s.signals
        sig.RQ = False
        sig.EN = False
        sig.ADDSUB = s.kind is OpKind.BIND_INVERSE
        if s.kind is OpKind.SUPERPOSE:
            s.result_rank = s.flagA + s.flagB
        else:
            s.result_rank = s.flagA * s.flagB
        self._write_out_flag(s.result_rank)
        sig.EQ = s.flagA == s.flagB
        s.slot = 0
        if s.result_rank == 0:
            sig.done = True
            s.phase = Phase.IDLE
        else:
            s.phase = Phase.EXEC

    def _execute_slot(self) -> None:
        s = self.state
        sig = s.signals
        k = s.slot
        # comparator is addressed by the slot counter, one item pair per cycle
        sig.EQ = sig.EQ and self._slot(s.opA, k) == self._slot(s.opB, k)
        if s.kind is OpKind.SUPERPOSE:
            sig.EN = False
            if k < s.flagA:
                src = self._slot(s.opA, k)
            else:
                src = self._slot(s.opB, k - s.flagA)
            self._drive_bus_out(src)
        else:
            sig.EN = True
            a = self._slot(s.opA, k % s.flagA)
            b = self._slot(s.opB, k // s.flagA)
            self._drive_alu(a, b, sub=sig.ADDSUB)
        self._write_out_slot(k, s.bus_out)
        s.slot += 1
        if s.slot == s.result_rank:
            sig.EN = False
            sig.done = True
            s.phase = Phase.IDLE

    # -- datapath -------------------------------------------------------
    def alu(self, a: int, b: int, sub: bool) -> tuple[int, int]:
        """``y`` parallel ``l``-bit ADD/SUB units; returns (result, carry nodes).

        SUB inverts ``b`` and sets carry-in, i.e. adds its 2's complement.
        Carry-outs are dropped, which makes the arithmetic mod ``2**l``.
        The carry word holds, per element, the carries into bits 1..l.
        """
        l, m = self._l, self._elem_mask
        result = 0
        carries = 0
        for k in range(self._y):
            ea = (a >> (k * l)) & m
            eb = (b >> (k * l)) & m
            if sub:
                eb ^= m
            total = ea + eb + int(sub)
            result |= (total & m) << (k * l)
            # carry into bit j+1 is bit j+1 of (a ^ b ^ sum) for the full-width sum
            c = ((ea ^ eb ^ total) >> 1) & m
            carries |= c << (k * l)
        return result, carries

    def _drive_bus_out(self, v: int) -> None:
        s = self.state
        s.activity["datapath"] += _popcount(s.bus_out ^ v)
        s.bus_out = v

    def _drive_alu(self, a: int, b: int, sub: bool) -> None:
        s = self.state
        res, carries = self.alu(a, b, sub)
        s.activity["datapath"] += (
            _popcount(s.bus_a ^ a) + _popcount(s.bus_b ^ b) + _popcount(s.carries ^ carries)
        )
        s.bus_a, s.bus_b, s.carries = a, b, carries
        self._drive_bus_out(res)

    def _write_out_slot(self, k: int, v: int) -> None:
        s = self.state
        shift = k * self._w
        old = (s.out >> shift) & self._item_mask
        flips = _popcount(old ^ v)
        s.output_bit_flips += flips
        s.activity["register"] += REGISTER_NODES_PER_BIT * flips
        s.out = (s.out & ~(self._item_mask << shift)) | (v << shift)

    def _write_out_flag(self, rank: int) -> None:
        s = self.state
        s.activity["register"] += REGISTER_NODES_PER_BIT * _popcount(s.out_flag ^ rank)
        s.out_flag = rank

    # -- driving --------------------------------------------------------
    def run_op(self, cmd: OpCommand, max_cycles: int = 10_000) -> tuple[Chain, CopuStats]:
        s = self.state
        start_cycle = s.cycle_count
        start_act = dict(s.activity)
        start_in, start_out = s.input_bit_flips, s.output_bit_flips
        self.load(cmd)
        while True:
            self.step()
            if s.signals.done and s.phase is Phase.IDLE:
                break
            if s.cycle_count - start_cycle > max_cycles:
                raise RuntimeError("operation did not terminate")
        stats = CopuStats(
            kind=cmd.kind,
            cycles=s.cycle_count - start_cycle,
            toggles={c: s.activity[c] - start_act[c] for c in ACTIVITY_CLASSES},
            input_bit_flips=s.input_bit_flips - start_in,
            output_bit_flips=s.output_bit_flips - start_out,
            eq=s.signals.EQ,
            result_rank=s.out_flag,
        )
        return self.output_chain(), stats

    # -- tracing --------------------------------------------------------
    def _record(self, phase: Phase) -> None:
        if not self.tracing:
            return
        s = self.state
        delta = {c: s.activity[c] - self._last_activity[c] for c in ACTIVITY_CLASSES}
        self._last_activity = dict(s.activity)
        self.trace.append(self.format_trace_line(phase, delta))

    def format_trace_line(self, phase: Phase, delta: dict) -> str:
        s, sig = self.state, self.state.signals
        hw = (self.cfg.operand_bits + 3) // 4
        hw_item = (self._w + 3) // 4
        return (
            f"{s.cycle_count:06d} {phase.value:<6} "
            f"RQ={int(sig.RQ)} EN={int(sig.EN)} ADDSUB={int(sig.ADDSUB)} "
            f"EQ={int(sig.EQ)} done={int(sig.done)} "
            f"A={s.opA:0{hw}x}/{s.flagA} B={s.opB:0{hw}x}/{s.flagB} "
            f"BUS={s.bus_out:0{hw_item}x} OUT={s.out:0{hw}x}/{s.out_flag} "
            f"dIN={delta['input']} dDP={delta['datapath']} "
            f"dREG={delta['register']} dCTL={delta['control']}"
        )
