import json
import random

import pytest
from hypothesis import given, strategies as st

from alpc.errors import ModelError, UnknownSymbolError
from alpc.model import Partition, fixture, fixture_text, indist, join, load_model, reach_c, save_model, validate
from alpc.search import random_model
from alpc.syntax import Chain, canon

from helpers import FUZZ_PARAMS, THETA

C = Chain.parse


def P(*blocks):
    return Partition([b.split() for b in blocks])


@pytest.fixture(scope="module")
def fig2():
    return fixture("fig2")


def fig2_raw():
    return json.loads(fixture_text("fig2"))


def test_fig2_contents(fig2):
    assert fig2.worlds == ("w1", "w2", "w3", "w4", "w5")
    assert fig2.valuation["w1"] == {"pa", "pb", "q"}
    assert fig2.valuation["w5"] == set()
    assert fig2.access["a"] == P("w1", "w2 w3", "w4 w5")
    assert fig2.access["b"] == P("w1", "w2 w4", "w3 w5")
    assert fig2.awareness[C("a,b")] == {"pa", "pb", "q"}
    assert fig2.awareness[C("a,b,a")] == {"pa", "pb"}


def test_fixture_round_trips_byte_for_byte(fig2, tmp_path):
    path = tmp_path / "fig2.json"
    save_model(fig2, path)
    assert path.read_text() == fixture_text("fig2")
    assert load_model(path) == fig2


def test_monotonicity_violation_reported():
    raw = fig2_raw()
    raw["awareness"]["a,b"] = ["pa", "pb"]
    raw["awareness"]["a,b,a"] = ["pa", "pb", "q"]
    with pytest.raises(ModelError) as info:
        validate(raw)
    assert any("a,b,a" in v and "monoton" in v for v in info.value.violations)


def test_empty_awareness_rejected():
    raw = fig2_raw()
    raw["awareness"]["a"] = []
    with pytest.raises(ModelError):
        validate(raw)


def test_all_violations_collected():
    raw = fig2_raw()
    raw["valuation"]["w9"] = ["pa"]
    raw["valuation"]["w1"] = ["zz"]
    raw["access"]["a"] = [["w1"], ["w2"]]
    raw["awareness"]["b"] = []
    with pytest.raises(ModelError) as info:
        validate(raw)
    assert len(info.value.violations) >= 4


def test_empty_world_set_rejected():
    with pytest.raises(ModelError):
        validate({"worlds": [], "agents": [], "atoms": [], "valuation": {}, "access": {}, "awareness": {}})


def test_equivalent_chains_must_agree():
    raw = fig2_raw()
    raw["awareness"]["a,a,b"] = ["pa"]
    with pytest.raises(ModelError):
        validate(raw)


def test_pair_list_access_rejected():
    raw = fig2_raw()
    raw["access"]["a"] = [["w1", "w1"], ["w2", "w3"]]
    with pytest.raises(ModelError):
        validate(raw)


def test_indist_examples(fig2):
    assert indist(fig2, C("b")) == P("w1 w2", "w3", "w4", "w5")
    assert indist(fig2, C("b,a")) == indist(fig2, C("a,b,a")) == indist(fig2, C("b"))
    assert indist(fig2, C("a,b")) == Partition.identity(fig2.worlds)
    assert indist(fig2, C("a,b,b")) == indist(fig2, C("a,b"))


def test_indist_unknown_chain(fig2):
    with pytest.raises(UnknownSymbolError):
        indist(fig2, C("b,a,b"))


def test_join_examples(fig2):
    a = fig2.access["a"]
    assert join(a, P("w1 w2", "w3", "w4", "w5")) == P("w1 w2 w3", "w4 w5")
    assert join(a, Partition.identity(fig2.worlds)) == a
    assert join(a, a) == a
    with pytest.raises(ValueError):
        join(a, P("w1"))


def test_reach_c_examples(fig2):
    assert reach_c(fig2, C("a,b,a")) == P("w1 w2 w3", "w4 w5")
    assert reach_c(fig2, C("a")) == P("w1", "w2 w3", "w4 w5")
    assert reach_c(fig2, C("b")) == P("w1 w2 w4", "w3 w5")


worlds = ["u", "v", "w", "x", "y"]
partitions = st.lists(st.integers(0, 4), min_size=5, max_size=5).map(
    lambda labels: Partition.from_labels(dict(zip(worlds, labels)))
)


@given(partitions, partitions, partitions)
def test_join_laws(p, q, r):
    assert join(p, q) == join(q, p)
    assert join(join(p, q), r) == join(p, join(q, r))
    assert join(p, p) == p
    assert join(p, Partition.identity(worlds)) == p
    assert p.refines(join(p, q)) and q.refines(join(p, q))


def test_partition_rejects_overlap():
    with pytest.raises(ValueError):
        Partition([["w1", "w2"], ["w2"]])


@pytest.mark.parametrize("seed", range(60))
def test_indist_properties_on_random_models(seed):
    m = random_model(seed, FUZZ_PARAMS)
    for t in THETA:
        part = indist(m, t)
        # equivalence relation by construction: blocks cover W exactly once
        assert sorted(w for b in part.blocks for w in b) == sorted(m.worlds)
        for u in THETA:
            if m.awareness[canon(t)] <= m.awareness[canon(u)]:
                assert indist(m, u).refines(part)
        stutter = Chain(t.members + (t.last,))
        assert indist(m, stutter) == part
        assert reach_c(m, stutter) == reach_c(m, t)


def test_random_models_are_valid():
    rng = random.Random(0)
    for _ in range(50):
        m = random_model(rng.randrange(10**6), FUZZ_PARAMS)
        assert validate(json.loads(m.to_json())) == m
