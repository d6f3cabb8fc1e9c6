import itertools
from pathlib import Path

import pytest

from alpc.errors import BoundsError
from alpc.model import Partition
from alpc.search import (
    RandomModelParams,
    SearchBounds,
    Sampled,
    awareness_assignments,
    count_awareness,
    enumerate_models,
    estimate_size,
    find_countermodel,
    load_countermodel,
    parse_theta,
    random_model,
    set_partitions,
)
from alpc.semantics import holds
from alpc.syntax import Chain, chain_leq, parse

from helpers import INVALID_SCHEMAS

DATA = Path(__file__).parent / "data"


def test_set_partitions_are_bell_numbers():
    assert [sum(1 for _ in set_partitions(n)) for n in range(6)] == [1, 1, 2, 5, 15, 52]


def test_smallest_space():
    b = SearchBounds(1, ("a",), ("p",), (Chain.parse("a"),))
    models = list(enumerate_models(b))
    assert len(models) == 2
    assert {m.valuation["w1"] for m in models} == {frozenset(), frozenset({"p"})}


def _brute_awareness(theta, atoms):
    subsets = [frozenset(c) for r in range(1, len(atoms) + 1) for c in itertools.combinations(atoms, r)]
    out = []
    for choice in itertools.product(subsets, repeat=len(theta)):
        aw = dict(zip(theta, choice))
        if all(aw[t] <= aw[s] for s in theta for t in theta if chain_leq(s, t)):
            out.append(aw)
    return out


@pytest.mark.parametrize("theta", ["a;b;a,b", "a;a,b;a,b,a;b", "a;a,b;a,c", "a,b;b,a"])
def test_awareness_assignments_exactly_once(theta):
    chains = tuple(sorted(parse_theta(theta), key=lambda c: (len(c.members), str(c))))
    atoms = ("p", "q", "r")
    ours = list(awareness_assignments(chains, atoms))
    keys = [tuple(sorted((str(c), tuple(sorted(s))) for c, s in aw.items())) for aw in ours]
    assert len(keys) == len(set(keys))
    brute = _brute_awareness(chains, atoms)
    assert len(ours) == len(brute) == count_awareness(chains, atoms)
    assert sorted(keys) == sorted(tuple(sorted((str(c), tuple(sorted(s))) for c, s in aw.items())) for aw in brute)


def test_enumeration_is_deterministic_and_counted():
    b = SearchBounds(2, ("a", "b"), ("p",), parse_theta("a;b;a,b"))
    first = [m.to_json() for m in enumerate_models(b)]
    assert first == [m.to_json() for m in enumerate_models(b)]
    assert len(first) == estimate_size(b)


def test_symmetry_flag_only_drops_permuted_copies():
    reduced = SearchBounds(2, ("a",), ("p",), parse_theta("a"))
    full = SearchBounds(2, ("a",), ("p",), parse_theta("a"), symmetry=False)
    assert len(list(enumerate_models(full))) > len(list(enumerate_models(reduced)))
    phi = parse("I[a] p -> p")
    assert find_countermodel(phi, reduced) is None and find_countermodel(phi, full) is None


def test_ceiling_guard():
    b = SearchBounds(5, ("a", "b", "c"), ("p", "q"), parse_theta("a;b;c;a,b"), ceiling=1000)
    with pytest.raises(BoundsError):
        next(enumerate_models(b))


def test_bounds_validation():
    with pytest.raises(BoundsError):
        SearchBounds(0, ("a",), ("p",), parse_theta("a"))
    with pytest.raises(BoundsError):
        SearchBounds(1, ("a",), (), parse_theta("a"))
    with pytest.raises(BoundsError):
        SearchBounds(1, ("a",), ("p",), parse_theta("a,b"))
    with pytest.raises(BoundsError):
        find_countermodel(parse("E[b] p"), SearchBounds(1, ("a", "b"), ("p",), parse_theta("a")))


def test_ijk_example_refuted_within_four_worlds():
    phi = parse("E[i,j,k] p -> E[i,j] p")
    found = find_countermodel(phi, SearchBounds.for_formula(phi, 4))
    assert found is not None
    assert len(found.model.worlds) <= 4
    assert not holds(found.model, found.world, phi)
    assert found.to_json() == (DATA / "witness_ijk.json").read_text()


def test_frozen_witness_still_refutes():
    cm = load_countermodel(DATA / "witness_ijk.json")
    assert not holds(cm.model, cm.world, cm.formula)


@pytest.mark.parametrize("text", INVALID_SCHEMAS)
def test_invalid_schemas_have_countermodels(text):
    phi = parse(text)
    found = find_countermodel(phi, SearchBounds.for_formula(phi, 5, atoms=("p", "q"), ceiling=10**12))
    assert found is not None and len(found.model.worlds) <= 5
    assert not holds(found.model, found.world, phi)


def test_one_atom_hides_the_third_non_theorem():
    # with a single atom every awareness set is {p}, which makes the schema valid
    phi = parse("E[a] E[a,b] p -> E[b] p")
    assert find_countermodel(phi, SearchBounds.for_formula(phi, 3)) is None


def test_valid_formula_has_no_countermodel():
    phi = parse("E[a] p -> p")
    assert find_countermodel(phi, SearchBounds.for_formula(phi, 3, atoms=("p", "q"))) is None


def test_parallel_search_returns_serial_witness():
    phi = parse("E[a,b] p -> E[a] E[a,b] p")
    b = SearchBounds.for_formula(phi, 3, atoms=("p", "q"))
    serial = find_countermodel(phi, b)
    parallel = find_countermodel(phi, b, jobs=3)
    assert serial.index == parallel.index
    assert serial.to_json() == parallel.to_json()


def test_sampled_awareness_mode():
    phi = parse("E[a,b] p -> E[a] E[a,b] p")
    b = SearchBounds.for_formula(phi, 3, atoms=("p", "q"), awareness_mode=Sampled(3, seed=1))
    found = find_countermodel(phi, b)
    assert found is not None and not holds(found.model, found.world, phi)
    assert estimate_size(b) < estimate_size(SearchBounds.for_formula(phi, 3, atoms=("p", "q")))


def test_random_model_reproducible():
    params = RandomModelParams((2, 5), ("a", "b"), ("p", "q"), parse_theta("a;b;a,b"))
    assert random_model(7, params) == random_model(7, params)
    m = random_model(8, params)
    assert 2 <= len(m.worlds) <= 5
    assert all(isinstance(p, Partition) for p in m.access.values())
