import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiholo.algebra import (
    BaseItem,
    Chain,
    ParamsMismatchError,
    SystemParams,
    UndefinedOperandError,
    bind,
    inverse,
    make_rng,
    random_item,
    superpose,
)
from semiholo.memory import (
    Codebook,
    DenoiseMethod,
    QueryResult,
    chain_dist,
    circ_dist,
    cleanup_query,
    denoise_avg,
    denoise_item,
    item_dist,
    unbind_query,
)

from oracles import circ_walk, geodesic_midpoint_walk

P424 = SystemParams(4, 2, 4)
REDCAR = {"red": [0, 1], "green": [2, 2], "car": [1, 1], "obj": [3, 2], "col": [2, 0]}


def item(*elems, p=4):
    return BaseItem(elems, p)


# -- distances ------------------------------------------------------------

def test_circ_dist_worked_example():
    assert circ_dist(4, 0, 5) == 1


@pytest.mark.parametrize("p", [2, 3, 4, 5, 8, 17])
def test_circ_dist_matches_walk(p):
    for a, b in itertools.product(range(p), repeat=2):
        d = circ_dist(a, b, p)
        assert d == circ_walk(a, b, p)
        assert d == circ_dist(b, a, p)
        assert 0 <= d <= p // 2


def test_circ_dist_examples_and_range_check():
    assert circ_dist(1, 3, 4) == 2
    assert circ_dist(3, 3, 9) == 0
    with pytest.raises(ValueError):
        circ_dist(5, 0, 5)
    with pytest.raises(ValueError):
        circ_dist(-1, 0, 5)


def test_item_dist_examples():
    assert item_dist(item(1, 2), item(3, 1)) == 3
    assert item_dist(item(0, 0), item(2, 2)) == 4
    a = item(3, 1)
    assert item_dist(a, a) == 0
    with pytest.raises(ParamsMismatchError):
        item_dist(item(1, 2), item(1, 2, p=5))


def test_item_dist_matches_walk_oracle():
    rng = make_rng(3)
    params = SystemParams(11, 5, 1)
    for _ in range(200):
        a, b = random_item(params, rng), random_item(params, rng)
        assert item_dist(a, b) == sum(circ_walk(s, t, 11) for s, t in zip(a, b))


@pytest.mark.parametrize("p, y", [(2, 8), (4, 2), (16, 4), (17, 3)])
def test_item_dist_metric_axioms(p, y):
    params = SystemParams(p, y, 1)
    rng = make_rng(p * 100 + y)
    for _ in range(10_000):
        a, b, c = (random_item(params, rng) for _ in range(3))
        ab = item_dist(a, b)
        assert ab >= 0
        assert (ab == 0) == (a == b)
        assert ab == item_dist(b, a)
        assert item_dist(a, c) <= ab + item_dist(b, c)


def test_chain_dist_examples():
    a = item(1, 3)
    c = item(2, 2)
    chain = superpose(Chain(P424, (a,)), Chain(P424, (c,)))
    assert chain_dist(a, chain) == 0
    probe = Chain.of(P424, [2, 3], [0, 1])
    assert chain_dist(item(0, 1), probe) == 0
    assert chain_dist(item(2, 2), probe) == 1
    with pytest.raises(UndefinedOperandError):
        chain_dist(a, Chain(P424))


# -- de-noising -------------------------------------------------------------

def test_denoise_avg_examples():
    assert denoise_avg(1, 5, 8) == 3
    assert denoise_avg(7, 1, 8) == 0
    assert denoise_avg(6, 6, 8) == 6


@pytest.mark.parametrize("p", [2, 3, 7, 8, 16, 31])
def test_denoise_avg_matches_walk_and_lies_on_geodesic(p):
    for a, b in itertools.product(range(p), repeat=2):
        m = denoise_avg(a, b, p)
        assert m == geodesic_midpoint_walk(a, b, p)
        assert circ_dist(a, m, p) + circ_dist(m, b, p) == circ_dist(a, b, p)


def test_denoise_item_methods():
    assert denoise_item([item(2), item(2), item(3)], "majority").elems == (2,)
    same = item(1, 3)
    for method in DenoiseMethod:
        assert denoise_item([same, same], method) == same
    assert denoise_item([item(1, p=8), item(5, p=8)], "geodesic").elems == (3,)
    assert denoise_item([item(1), item(3), item(0), item(2)], "median").elems == (1,)
    assert denoise_item([item(1), item(3), item(2)], "median").elems == (2,)
    # ties go to the smallest residue
    assert denoise_item([item(3), item(1)], "majority").elems == (1,)


def test_denoise_item_errors():
    with pytest.raises(ValueError):
        denoise_item([], "majority")
    with pytest.raises(ValueError):
        denoise_item([item(1), item(2), item(3)], "geodesic")
    with pytest.raises(ParamsMismatchError):
        denoise_item([item(1), item(1, p=5)], "median")


@settings(max_examples=200)
@given(st.data())
def test_majority_vote_dominance(data):
    p, y = 7, 4
    k = data.draw(st.integers(1, 6))
    vec = st.lists(st.integers(0, p - 1), min_size=y, max_size=y)
    target = BaseItem(tuple(data.draw(vec)), p)
    noise = [BaseItem(tuple(data.draw(vec)), p) for _ in range(k - 1)]
    samples = data.draw(st.permutations([target] * k + noise))
    assert denoise_item(samples, DenoiseMethod.MAJORITY_VOTE) == target


# -- codebook & queries -----------------------------------------------------

@pytest.fixture
def redcar():
    return Codebook(P424, REDCAR)


def _exhaustive(cb, probe):
    return {
        name: min(sum(circ_walk(s, t, cb.params.p) for s, t in zip(cb[name], it)) for it in probe)
        for name in cb
    }


def test_codebook_validation():
    with pytest.raises(ValueError):
        Codebook(P424, [("a", [0, 0]), ("a", [1, 1])])
    with pytest.raises(ParamsMismatchError):
        Codebook(P424, {"a": [0, 0, 0]})
    tiny = SystemParams(2, 1, 1)
    with pytest.raises(ValueError):
        Codebook(tiny, {"a": [0], "b": [1], "c": [1]})


def test_codebook_is_read_only(redcar):
    with pytest.raises(TypeError):
        redcar.entries["blue"] = item(0, 0)
    assert redcar.names == ("red", "green", "car", "obj", "col")


def test_redcar_query_against_exhaustive_oracle(redcar):
    s = superpose(bind(redcar.chain("obj"), redcar.chain("car")),
                  bind(redcar.chain("col"), redcar.chain("red")))
    assert s.to_lists() == [[0, 3], [2, 1]]
    probe = bind(Chain(P424, (inverse(redcar["col"]),)), s)
    assert probe.to_lists() == [[2, 3], [0, 1]]
    oracle = _exhaustive(redcar, probe.to_lists())
    assert oracle == {"red": 0, "green": 1, "car": 1, "obj": 2, "col": 1}
    res = cleanup_query(redcar, probe)
    assert res == QueryResult("red", 0, "green", 1, False)
    assert unbind_query(redcar, s, "col") == res


def test_query_verbatim_entry(redcar):
    res = cleanup_query(redcar, redcar.chain("obj"))
    assert res.name == "obj" and res.distance == 0


def test_query_tie_sets_ambiguous_and_keeps_insertion_order():
    cb = Codebook(P424, {"a": [0, 0], "b": [2, 2]})
    res = cleanup_query(cb, Chain.of(P424, [1, 1]))
    assert res.ambiguous and res.name == "a" and res.runner_up_name == "b"
    assert res.distance == res.runner_up_distance == 2


def test_query_single_entry_and_errors(redcar):
    cb = Codebook(P424, {"only": [1, 1]})
    res = cleanup_query(cb, Chain.of(P424, [1, 2]))
    assert res == QueryResult("only", 1)
    with pytest.raises(ValueError):
        cleanup_query(Codebook(P424, {}), Chain.of(P424, [1, 1]))
    with pytest.raises(UndefinedOperandError):
        cleanup_query(redcar, Chain(P424))
    with pytest.raises(KeyError):
        unbind_query(redcar, Chain.of(P424, [1, 1]), "size")


def test_unbind_single_binding_returns_filler(redcar):
    s = bind(redcar.chain("col"), redcar.chain("green"))
    res = unbind_query(redcar, s, "col")
    assert res.name == "green" and res.distance == 0


@pytest.mark.parametrize("seed", range(5))
def test_unbind_with_noise_terms(seed):
    # random role/filler pairs; the filler must come back at distance 0, and any
    # clash with a cross term has to show up as ambiguous or a deterministic pick
    params = SystemParams(16, 4, 4)
    rng = make_rng(seed)
    cb = Codebook(params, {f"e{i}": random_item(params, rng).elems for i in range(12)})
    role, filler, r2, f2 = (cb.chain(f"e{i}") for i in (0, 1, 2, 3))
    s = superpose(bind(role, filler), bind(r2, f2))
    res = unbind_query(cb, s, "e0")
    assert res.distance == 0
    if not res.ambiguous:
        assert res.name == "e1"
    assert unbind_query(cb, s, "e0") == res


@settings(max_examples=100)
@given(st.data())
def test_chain_dist_zero_for_members(data):
    params = SystemParams(9, 3, 6)
    vec = st.lists(st.integers(0, 8), min_size=3, max_size=3)
    vecs = data.draw(st.lists(vec, min_size=1, max_size=6))
    c = Chain.of(params, *vecs)
    for it in c:
        assert chain_dist(it, c) == 0
