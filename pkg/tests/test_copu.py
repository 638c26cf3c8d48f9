import re

import numpy as np
import pytest

from semiholo.algebra import (
    BaseItem,
    Chain,
    RankOverflowError,
    SystemParams,
    UndefinedOperandError,
    bind,
    invert_chain,
    make_rng,
    random_item,
    superpose,
)
from semiholo.copu import (
    Copu,
    CopuBusyError,
    CopuConfig,
    CopuStats,
    OpCommand,
    OpKind,
    Phase,
    energy_proxy,
    estimate_transistors,
    worst_case_activity,
    worst_case_commands,
)

from oracles import hamming

REF = CopuConfig()
P = REF.params


def full(params, rank, value):
    return Chain(params, (BaseItem((value,) * params.y, params.p),) * rank)


def random_chain(params, rank, rng):
    return Chain(params, tuple(random_item(params, rng) for _ in range(rank)))


def golden(cmd):
    if cmd.kind is OpKind.SUPERPOSE:
        return superpose(cmd.a, cmd.b)
    if cmd.kind is OpKind.BIND:
        return bind(cmd.a, cmd.b)
    return bind(cmd.a, invert_chain(cmd.b))


def test_reference_config():
    assert (REF.l, REF.params.y, REF.params.d) == (8, 1, 8)
    assert REF.operand_bits == 64 and REF.flag_bits == 4
    assert REF.clock_frequency_mhz == pytest.approx(50.0)
    with pytest.raises(ValueError):
        CopuConfig(SystemParams(17, 1, 8))
    with pytest.raises(ValueError):
        CopuConfig(toggle_weights={"input": 1.0})


def test_encoding_round_trip():
    cfg = CopuConfig.from_bits(4, 4, 4)
    unit = Copu(cfg)
    rng = make_rng(2)
    for _ in range(50):
        it = random_item(cfg.params, rng)
        assert unit.decode_item(unit.encode_item(it)) == it
    it = BaseItem((1, 2, 3, 4), 16)
    assert unit.encode_item(it) == 0x4321


def test_command_validation():
    with pytest.raises(RankOverflowError):
        OpCommand(OpKind.SUPERPOSE, full(P, 5, 1), full(P, 4, 1))
    with pytest.raises(RankOverflowError):
        OpCommand(OpKind.BIND, full(P, 3, 1), full(P, 3, 1))
    with pytest.raises(UndefinedOperandError):
        OpCommand(OpKind.BIND, Chain(P), full(P, 1, 1))
    with pytest.raises(ValueError):
        OpCommand("nope", full(P, 1, 1), full(P, 1, 1))
    assert OpCommand("bind", full(P, 4, 1), full(P, 2, 1)).result_rank == 8


def test_load_counts_input_toggles_against_hamming_oracle():
    unit = Copu()
    a, b = full(P, 1, 255), full(P, 8, 255)
    unit.load(OpCommand(OpKind.BIND, a, b))
    s = unit.state
    expected = hamming(0, unit.encode_chain(a)) + hamming(0, unit.encode_chain(b))
    assert s.input_bit_flips == expected == 8 + 64
    # flag registers go 0 -> 1 and 0 -> 8
    assert s.activity["input"] == expected + hamming(0, 1) + hamming(0, 8)


def test_all_zero_to_all_one_load_flips_every_operand_bit():
    unit = Copu()
    unit.load(OpCommand(OpKind.SUPERPOSE, full(P, 4, 255), full(P, 4, 255)))
    # only the first four slots are written per operand; the rest stay zero
    assert unit.state.input_bit_flips == 64
    unit2 = Copu()
    unit2.state.opA = unit2.state.opB = 0
    cmd = OpCommand(OpKind.BIND, full(P, 8, 255), full(P, 1, 255))
    unit2.load(cmd)
    assert unit2.state.input_bit_flips == 64 + 8


def test_reloading_same_operands_costs_nothing():
    unit = Copu()
    cmd = OpCommand(OpKind.SUPERPOSE, full(P, 4, 7), full(P, 4, 9))
    unit.run_op(cmd)
    _, stats = unit.run_op(cmd)
    assert stats.toggles["input"] == 0
    assert stats.toggles["register"] == 0
    assert stats.output_bit_flips == 0


def test_busy_controller_rejects_new_request():
    unit = Copu()
    cmd = OpCommand(OpKind.SUPERPOSE, full(P, 1, 1), full(P, 1, 2))
    unit.load(cmd)
    with pytest.raises(CopuBusyError):
        unit.load(cmd)
    unit.step()
    assert unit.state.phase is Phase.EXEC
    with pytest.raises(CopuBusyError):
        unit.load(cmd)


@pytest.mark.parametrize("kind, ra, rb", [("superpose", 4, 4), ("bind", 4, 2)])
def test_reference_ops_take_nine_cycles(kind, ra, rb):
    unit = Copu()
    out, stats = unit.run_op(OpCommand(kind, full(P, ra, 3), full(P, rb, 5)))
    assert stats.cycles == 9
    assert stats.result_rank == 8 == out.rank


def test_cycle_count_is_one_plus_result_rank():
    unit = Copu()
    rng = make_rng(4)
    for ra, rb in [(0, 0), (1, 0), (2, 3), (0, 8)]:
        _, stats = unit.run_op(
            OpCommand("superpose", random_chain(P, ra, rng), random_chain(P, rb, rng)))
        assert stats.cycles == 1 + ra + rb
    for ra, rb in [(1, 1), (2, 4), (8, 1)]:
        _, stats = unit.run_op(
            OpCommand("bind", random_chain(P, ra, rng), random_chain(P, rb, rng)))
        assert stats.cycles == 1 + ra * rb


def test_idle_step_changes_nothing():
    unit = Copu()
    unit.run_op(OpCommand("bind", full(P, 2, 9), full(P, 2, 3)))
    before = dict(unit.state.activity), unit.state.out
    unit.step()
    assert unit.state.phase is Phase.IDLE
    assert (dict(unit.state.activity), unit.state.out) == before


@pytest.mark.parametrize("kind", list(OpKind))
@pytest.mark.parametrize("bits", [(8, 1, 8), (4, 2, 4), (1, 4, 8), (2, 2, 2)])
def test_golden_model_equivalence(kind, bits):
    cfg = CopuConfig.from_bits(*bits)
    params = cfg.params
    unit = Copu(cfg)
    rng = make_rng([list(OpKind).index(kind), *bits])
    d = params.d
    for _ in range(150):
        if kind is OpKind.SUPERPOSE:
            ra = int(rng.integers(0, d + 1))
            rb = int(rng.integers(0, d - ra + 1))
        else:
            ra = int(rng.integers(1, d + 1))
            rb = int(rng.integers(1, d // ra + 1))
        cmd = OpCommand(kind, random_chain(params, ra, rng), random_chain(params, rb, rng))
        out, _ = unit.run_op(cmd)
        assert out.to_lists() == golden(cmd).to_lists()


@pytest.mark.parametrize("sub", [False, True])
def test_alu_exhaustive_four_bit(sub):
    unit = Copu(CopuConfig.from_bits(4, 1, 1))
    for a in range(16):
        for b in range(16):
            res, carries = unit.alu(a, b, sub)
            assert res == ((a - b) if sub else (a + b)) % 16
            # ripple the carries bit by bit as a cross-check
            bb = (b ^ 15) if sub else b
            c, word = int(sub), 0
            for j in range(4):
                x, y = (a >> j) & 1, (bb >> j) & 1
                c = (x & y) | (x & c) | (y & c)
                word |= c << j
            assert carries == word


def test_alu_multi_element_lanes_are_independent():
    unit = Copu(CopuConfig.from_bits(4, 2, 1))
    res, _ = unit.alu(0xF1, 0x1F, False)
    assert res == 0x00  # 1+15 and 15+1 both wrap without leaking a carry


def test_eq_flag_iff_operands_equal():
    unit = Copu()
    rng = make_rng(8)
    for _ in range(200):
        ra = int(rng.integers(0, 5))
        a = random_chain(P, ra, rng)
        if rng.random() < 0.5:
            b = a
        else:
            b = random_chain(P, int(rng.integers(0, 5)), rng)
        _, stats = unit.run_op(OpCommand("superpose", a, b))
        assert stats.eq == (a.to_lists() == b.to_lists())


def test_trace_format_and_determinism():
    cmd = OpCommand("bind", full(P, 4, 0xAB), full(P, 2, 0x12))
    runs = []
    for _ in range(2):
        unit = Copu(trace=True)
        unit.run_op(cmd)
        runs.append(list(unit.trace))
    assert runs[0] == runs[1]
    lines = runs[0]
    assert len(lines) == 9
    pat = re.compile(
        r"^\d{6} (DECODE|EXEC  ) RQ=[01] EN=[01] ADDSUB=[01] EQ=[01] done=[01] "
        r"A=[0-9a-f]{16}/\d+ B=[0-9a-f]{16}/\d+ BUS=[0-9a-f]{2} OUT=[0-9a-f]{16}/\d+ "
        r"dIN=\d+ dDP=\d+ dREG=\d+ dCTL=\d+$"
    )
    assert all(pat.match(line) for line in lines)
    assert lines[0].startswith("000001 DECODE")
    assert "done=1" in lines[-1] and all("done=0" in line for line in lines[:-1])


def test_trace_deltas_sum_to_stats():
    unit = Copu(trace=True)
    _, stats = unit.run_op(OpCommand("superpose", full(P, 3, 0x5A), full(P, 2, 0xC3)))
    sums = {"input": 0, "datapath": 0, "register": 0, "control": 0}
    for line in unit.trace:
        for key, cls in [("dIN", "input"), ("dDP", "datapath"), ("dREG", "register"),
                         ("dCTL", "control")]:
            sums[cls] += int(re.search(rf"{key}=(\d+)", line).group(1))
    assert sums == stats.toggles


# -- activity and power ------------------------------------------------------

def test_worst_case_shapes():
    cmd = worst_case_commands(REF, "superpose")
    assert (cmd.a.rank, cmd.b.rank) == (4, 4)
    cmd = worst_case_commands(REF, "bind")
    assert (cmd.a.rank, cmd.b.rank) == (4, 2)


def test_worst_case_values_reference():
    sup = worst_case_activity(REF, "superpose")
    bnd = worst_case_activity(REF, "bind")
    assert sup.stats.cycles == bnd.stats.cycles == 9
    assert sup.toggles == {"input": 66, "datapath": 8, "register": 130, "control": 18}
    assert bnd.toggles == {"input": 50, "datapath": 31, "register": 114, "control": 18}
    assert sup.register_share > 0.5 and bnd.register_share > 0.5


def test_four_bit_bind_flips():
    rep = worst_case_activity(CopuConfig.from_bits(4, 1, 1), "bind")
    assert (rep.input_bits, rep.output_bits) == (8, 3)


def test_zero_stimulus_has_no_data_activity():
    rep = worst_case_activity(REF, "bind", fill=False)
    assert rep.input_bits == 0 and rep.output_bits == 0
    assert rep.toggles["datapath"] == 0


def test_energy_proxy_weights():
    stats = worst_case_activity(REF, "bind").stats
    assert energy_proxy(stats, REF) == stats.total_toggles
    doubled = CopuConfig(toggle_weights={c: 2.0 for c in stats.toggles})
    assert energy_proxy(stats, doubled) == 2 * stats.total_toggles
    reg_only = CopuConfig(toggle_weights={"input": 0, "datapath": 0, "register": 1, "control": 0})
    assert energy_proxy(stats, reg_only) == stats.toggles["register"]
    zero = CopuStats(None, 0, {c: 0 for c in stats.toggles}, 0, 0, True, 0)
    assert energy_proxy(zero, REF) == 0.0


def test_stats_merge():
    unit = Copu()
    rng = make_rng(1)
    parts = [unit.run_op(OpCommand("bind", random_chain(P, 2, rng), random_chain(P, 2, rng)))[1]
             for _ in range(3)]
    left = parts[0].merge(parts[1]).merge(parts[2])
    right = parts[0].merge(parts[1].merge(parts[2]))
    assert left == right
    assert left.cycles == sum(s.cycles for s in parts)
    assert left.kind is OpKind.BIND
    assert parts[0].merge(unit.run_op(OpCommand("superpose", Chain(P), Chain(P)))[1]).kind is None


def test_transistor_reference_table():
    rep = estimate_transistors(REF)
    assert rep.as_dict() == {
        "alu": 336, "mux_demux": 544, "datapath": 880, "control": 2304,
        "registers": 1198, "total": 4382, "extrapolated": False,
    }
    assert rep.alu / 8 == 42 and rep.mux_demux / 8 == 68


def test_transistor_extrapolation():
    rep = estimate_transistors(CopuConfig.from_bits(4, 1, 8))
    assert rep.datapath == 440 and rep.extrapolated
    wide = estimate_transistors(CopuConfig.from_bits(8, 2, 8))
    assert wide.datapath == 2 * 880
    deep = estimate_transistors(CopuConfig.from_bits(8, 1, 64))
    assert deep.mux_demux == 2 * 544 and deep.alu == 336


def test_bind_inverse_undoes_bind_on_unit():
    unit = Copu()
    rng = make_rng(6)
    for _ in range(50):
        a = random_chain(P, 1, rng)
        b = random_chain(P, int(rng.integers(1, 9)), rng)
        bound, _ = unit.run_op(OpCommand("bind", b, a))
        back, _ = unit.run_op(OpCommand("bind-inverse", bound, a))
        assert back.to_lists() == b.to_lists()
        assert unit.state.signals.ADDSUB
    assert np.all(np.asarray(back.to_lists()) < 256)
