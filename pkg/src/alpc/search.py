"""Bounded model enumeration, countermodel search and random model generation.

The search only refutes: failing to find a countermodel within the bounds says
nothing about validity ("no countermodel up to N worlds").
"""
from __future__ import annotations

import itertools
import json
import random
from math import comb
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .errors import BoundsError
from .model import Model, Partition, dump_json, validate
from .semantics import Evaluator
from .syntax import (
    Atom,
    Chain,
    Formula,
    ImplicitK,
    agents_of,
    as_chain,
    canon,
    chain_leq,
    chain_sort_key,
    chains_of,
    check_well_formed,
    parse,
    to_text,
    walk,
)

DEFAULT_CEILING = 5_000_000


@dataclass(frozen=True)
class Sampled:
    count: int
    seed: int = 0


@dataclass(frozen=True)
class SearchBounds:
    max_worlds: int
    agents: tuple
    atoms: tuple
    theta_set: tuple
    awareness_mode: Union[str, Sampled] = "exhaustive"
    symmetry: bool = True
    ceiling: int = DEFAULT_CEILING

    def __post_init__(self):
        if self.max_worlds < 1:
            raise BoundsError("max_worlds must be at least 1")
        object.__setattr__(self, "agents", tuple(sorted(set(self.agents))))
        object.__setattr__(self, "atoms", tuple(sorted(set(self.atoms))))
        theta = tuple(sorted({canon(as_chain(t)) for t in self.theta_set}, key=chain_sort_key))
        object.__setattr__(self, "theta_set", theta)
        if not self.atoms:
            raise BoundsError("at least one atom is needed (awareness sets are non-empty)")
        stray = sorted({a for t in theta for a in t.members} - set(self.agents))
        if stray:
            raise BoundsError(f"chains use agents outside the bounds: {stray}")
        if self.awareness_mode != "exhaustive" and not isinstance(self.awareness_mode, Sampled):
            raise BoundsError(f"unknown awareness mode {self.awareness_mode!r}")

    @classmethod
    def for_formula(cls, phi: Formula, max_worlds: int, **kw) -> "SearchBounds":
        """Bounds covering exactly the atoms, agents and chains phi mentions."""
        atoms = {n.name for n in walk(phi) if isinstance(n, Atom)} or {"p"}
        return cls(max_worlds, kw.pop("agents", agents_of(phi)), kw.pop("atoms", atoms),
                   kw.pop("theta_set", chains_of(phi)), **kw)


@dataclass(frozen=True)
class Countermodel:
    model: Model
    world: str
    formula: Formula
    index: int = field(default=-1, compare=False)

    def to_dict(self) -> dict:
        out = self.model.to_dict()
        out["world"] = self.world
        out["formula"] = to_text(self.formula)
        return out

    def to_json(self) -> str:
        return dump_json(self.to_dict())


# --------------------------------------------------------------------------
# combinatorial building blocks
# --------------------------------------------------------------------------


def set_partitions(n: int) -> Iterator[tuple]:
    """All partitions of range(n) as restricted-growth label tuples."""
    if n == 0:
        yield ()
        return

    def grow(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for lab in range(top + 2):
            prefix.append(lab)
            yield from grow(prefix, max(top, lab))
            prefix.pop()

    yield from grow([0], 0)


def _parents(theta: tuple) -> dict:
    """Longest strict ⪯-predecessor in theta of each chain (None for minimal ones)."""
    out = {}
    for t in theta:
        below = [s for s in theta if s != t and chain_leq(s, t)]
        out[t] = max(below, key=len) if below else None
    return out


def _nonempty_subsets(items) -> list:
    items = sorted(items)
    return [frozenset(c) for r in range(1, len(items) + 1) for c in itertools.combinations(items, r)]


def awareness_assignments(theta: tuple, atoms) -> Iterator[dict]:
    """Every monotone assignment of non-empty awareness sets to the chains in theta.

    Chains are processed shortest first; each picks a non-empty subset of its
    longest predecessor's set, which is exactly the monotonicity condition since
    the predecessors of a chain are totally ordered.
    """
    parents = _parents(theta)
    order = list(theta)

    def rec(k, chosen):
        if k == len(order):
            yield dict(chosen)
            return
        t = order[k]
        pool = chosen[parents[t]] if parents[t] is not None else atoms
        for s in _nonempty_subsets(pool):
            chosen[t] = s
            yield from rec(k + 1, chosen)
        del chosen[t]

    yield from rec(0, {})


def count_awareness(theta: tuple, atoms) -> int:
    parents = _parents(theta)
    kids = {t: [s for s in theta if parents[s] == t] for t in theta}
    memo = {}

    def count(t, size):
        # assignments for the subtree rooted at t given |parent set| = size
        if (t, size) in memo:
            return memo[(t, size)]
        total = 0
        for k in range(1, size + 1):
            ways = comb(size, k)
            for c in kids[t]:
                ways *= count(c, k)
            total += ways
        memo[(t, size)] = total
        return total

    out = 1
    for t in theta:
        if parents[t] is None:
            out *= count(t, len(atoms))
    return out


def _bell(n):
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[-1] if n else 1


def estimate_size(b: SearchBounds) -> int:
    n_vals = 1 << len(b.atoms)
    per_aw = count_awareness(b.theta_set, b.atoms) if b.awareness_mode == "exhaustive" else b.awareness_mode.count
    total = 0
    for n in range(1, b.max_worlds + 1):
        vals = comb(n_vals + n - 1, n) if b.symmetry else n_vals**n
        total += vals * _bell(n) ** len(b.agents) * per_aw
    return total


# --------------------------------------------------------------------------
# enumeration
# --------------------------------------------------------------------------


def _valuations(atoms, n, symmetry):
    """Per-world true-atom sets; with symmetry, only non-decreasing sequences."""
    all_vals = [frozenset(a for k, a in enumerate(atoms) if mask >> k & 1) for mask in range(1 << len(atoms))]
    if symmetry:
        return itertools.combinations_with_replacement(all_vals, n)
    return itertools.product(all_vals, repeat=n)


def _sample_awareness(rng: random.Random, theta, atoms) -> dict:
    parents = _parents(theta)
    chosen = {}
    for t in theta:
        pool = sorted(chosen[parents[t]] if parents[t] is not None else atoms)
        k = rng.randint(1, len(pool))
        chosen[t] = frozenset(rng.sample(pool, k))
    return chosen


def enumerate_models(b: SearchBounds) -> Iterator[Model]:
    """Deterministic stream of models within the bounds, smallest world count first."""
    size = estimate_size(b)
    if size > b.ceiling:
        raise BoundsError(f"bounds describe about {size} models, above the ceiling of {b.ceiling}")
    exhaustive = b.awareness_mode == "exhaustive"
    aw_all = list(awareness_assignments(b.theta_set, b.atoms)) if exhaustive else None
    rng = None if exhaustive else random.Random(b.awareness_mode.seed)
    for n in range(1, b.max_worlds + 1):
        worlds = [f"w{k + 1}" for k in range(n)]
        parts = [
            Partition.from_labels(dict(zip(worlds, labels))) for labels in set_partitions(n)
        ]
        for vals in _valuations(b.atoms, n, b.symmetry):
            valuation = dict(zip(worlds, vals))
            for access in itertools.product(parts, repeat=len(b.agents)):
                access_map = dict(zip(b.agents, access))
                if exhaustive:
                    aws = aw_all
                else:
                    aws = [_sample_awareness(rng, b.theta_set, b.atoms) for _ in range(b.awareness_mode.count)]
                for aw in aws:
                    yield Model(worlds, b.agents, b.atoms, valuation, access_map, aw)


def _check_target(phi: Formula, b: SearchBounds):
    check_well_formed(phi)
    missing = {canon(c) for c in chains_of(phi)} - set(b.theta_set)
    if missing:
        raise BoundsError("formula uses chains outside theta_set: " + ", ".join(f"[{c}]" for c in missing))
    agents = {n.agent for n in walk(phi) if isinstance(n, ImplicitK)} | {c.last for c in chains_of(phi)}
    stray = sorted(agents - set(b.agents))
    if stray:
        raise BoundsError(f"formula uses agents outside the bounds: {stray}")


def _scan(phi, b, start=0, step=1):
    for idx, m in enumerate(enumerate_models(b)):
        if idx % step != start:
            continue
        ext = Evaluator(m).extension(phi)
        if ext != m.full:
            bad = m.full & ~ext
            world = m.worlds[(bad & -bad).bit_length() - 1]
            return Countermodel(m, world, phi, idx)
    return None


def _scan_worker(args):
    phi, b, start, step = args
    return _scan(phi, b, start, step)


def find_countermodel(phi: Formula, b: SearchBounds, jobs: int = 1) -> Optional[Countermodel]:
    """First (model, world) in enumeration order where phi fails, or None.

    With jobs > 1 the stream is split by index across processes and the lowest
    falsifying index wins, so the witness matches the serial search.
    """
    _check_target(phi, b)
    if jobs <= 1:
        return _scan(phi, b)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        found = [r for r in pool.map(_scan_worker, [(phi, b, k, jobs) for k in range(jobs)]) if r]
    return min(found, key=lambda c: c.index) if found else None


# --------------------------------------------------------------------------
# random models
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomModelParams:
    worlds: Union[int, tuple]  # fixed count or inclusive (lo, hi) range
    agents: tuple
    atoms: tuple
    theta_set: tuple


def _random_partition(rng, worlds):
    # coarseness drawn uniformly so both fine and coarse partitions appear
    k = rng.randint(1, len(worlds))
    return Partition.from_labels({w: rng.randrange(k) for w in worlds})


def random_model(seed, params: RandomModelParams) -> Model:
    rng = random.Random(seed)
    if isinstance(params.worlds, int):
        n = params.worlds
    else:
        n = rng.randint(*params.worlds)
    worlds = [f"w{k + 1}" for k in range(n)]
    atoms = tuple(sorted(set(params.atoms)))
    agents = tuple(sorted(set(params.agents)))
    theta = tuple(sorted({canon(as_chain(t)) for t in params.theta_set}, key=chain_sort_key))
    valuation = {w: frozenset(p for p in atoms if rng.random() < 0.5) for w in worlds}
    access = {a: _random_partition(rng, worlds) for a in agents}
    awareness = _sample_awareness(rng, theta, atoms)
    return Model(worlds, agents, atoms, valuation, access, awareness)


def parse_theta(text: str) -> tuple:
    """``"a;b;a,b"`` -> chains."""
    return tuple(Chain.parse(part) for part in text.split(";") if part.strip())


def load_countermodel(path):
    with open(path) as fh:
        raw = json.load(fh)
    world, formula = raw.pop("world"), raw.pop("formula")
    return Countermodel(validate(raw), world, parse(formula))
