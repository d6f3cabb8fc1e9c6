"""Epistemic models with awareness, partitions, and the relations derived from them."""
from __future__ import annotations

import json
from functools import cached_property
from importlib import resources
from pathlib import Path

from .errors import ModelError, UnknownSymbolError
from .syntax import Chain, as_chain, canon, chain_equiv, chain_leq, chain_sort_key, check_name


class Partition:
    """An equivalence relation over a finite set of world ids, kept as its blocks.

    Blocks and the worlds inside them are stored sorted, so two partitions of the
    same relation compare equal and print identically.
    """

    __slots__ = ("blocks", "worlds", "_index")

    def __init__(self, blocks):
        blocks = [tuple(sorted(set(b))) for b in blocks]
        seen = {}
        for n, block in enumerate(blocks):
            if not block:
                raise ValueError("partition blocks must be non-empty")
            for w in block:
                if w in seen:
                    raise ValueError(f"world {w!r} appears in more than one block")
                seen[w] = n
        self.blocks = tuple(sorted(blocks))
        self.worlds = frozenset(seen)
        self._index = {w: n for n, block in enumerate(self.blocks) for w in block}

    @classmethod
    def identity(cls, worlds):
        return cls([(w,) for w in worlds])

    @classmethod
    def total(cls, worlds):
        return cls([tuple(worlds)])

    @classmethod
    def from_labels(cls, labels: dict):
        groups = {}
        for w, lab in labels.items():
            groups.setdefault(lab, []).append(w)
        return cls(groups.values())

    def block_of(self, world) -> tuple:
        try:
            return self.blocks[self._index[world]]
        except KeyError:
            raise UnknownSymbolError(f"unknown world {world!r}") from None

    def related(self, w, v) -> bool:
        return self._index[w] == self._index[v]

    def pairs(self) -> frozenset:
        return frozenset((w, v) for b in self.blocks for w in b for v in b)

    def refines(self, other: "Partition") -> bool:
        """True if every block of self lies inside a block of other."""
        return all(len({other._index[w] for w in b}) == 1 for b in self.blocks)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __len__(self):
        return len(self.blocks)

    def __repr__(self):
        return "Partition(" + " ".join("{" + ",".join(b) + "}" for b in self.blocks) + ")"

    def to_json(self):
        return [list(b) for b in self.blocks]


def join(p: Partition, q: Partition) -> Partition:
    """Finest partition coarser than both p and q (union-find over shared worlds)."""
    if p.worlds != q.worlds:
        raise ValueError("cannot join partitions over different world sets")
    parent = {w: w for w in p.worlds}

    def find(w):
        root = w
        while parent[root] != root:
            root = parent[root]
        while parent[w] != root:
            parent[w], w = root, parent[w]
        return root

    for part in (p, q):
        for block in part.blocks:
            head = find(block[0])
            for w in block[1:]:
                r = find(w)
                if r != head:
                    parent[r] = head
    return Partition.from_labels({w: find(w) for w in p.worlds})


class Model:
    """A checked epistemic model with awareness.

    Build one with :func:`validate`; the constructor assumes its inputs already
    satisfy every model condition.  Worlds are indexed in lexicographic order and
    world sets are handled internally as int bitmasks over that order.
    """

    def __init__(self, worlds, agents, atoms, valuation, access, awareness):
        self.worlds = tuple(sorted(worlds))
        self.agents = frozenset(agents)
        self.atoms = frozenset(atoms)
        self.valuation = {w: frozenset(valuation.get(w, ())) for w in self.worlds}
        self.access = dict(access)
        # keyed by canonical chain
        self.awareness = {canon(c): frozenset(s) for c, s in awareness.items()}
        self.index = {w: n for n, w in enumerate(self.worlds)}
        self.full = (1 << len(self.worlds)) - 1
        self._partition_cache = {}

    @property
    def theta_set(self) -> frozenset:
        return frozenset(self.awareness)

    def lookup_chain(self, theta: Chain) -> Chain:
        c = canon(theta)
        if c not in self.awareness:
            raise UnknownSymbolError(f"chain [{theta}] is not in the model's chain set")
        return c

    def aware_of(self, theta: Chain) -> frozenset:
        return self.awareness[self.lookup_chain(theta)]

    def check_agent(self, agent: str) -> str:
        if agent not in self.access:
            raise UnknownSymbolError(f"unknown agent {agent!r}")
        return agent

    def check_world(self, world: str) -> str:
        if world not in self.index:
            raise UnknownSymbolError(f"unknown world {world!r}")
        return world

    # bitmask views -------------------------------------------------------

    def mask(self, worlds) -> int:
        out = 0
        for w in worlds:
            out |= 1 << self.index[w]
        return out

    def unmask(self, bits: int) -> tuple:
        return tuple(w for n, w in enumerate(self.worlds) if bits >> n & 1)

    @cached_property
    def atom_masks(self) -> dict:
        out = {p: 0 for p in self.atoms}
        for w, true_atoms in self.valuation.items():
            bit = 1 << self.index[w]
            for p in true_atoms:
                out[p] = out.get(p, 0) | bit
        return out

    def block_masks(self, partition: Partition) -> tuple:
        return tuple(self.mask(b) for b in partition.blocks)

    def cached_partition(self, key, build):
        hit = self._partition_cache.get(key)
        if hit is None:
            part = build()
            hit = self._partition_cache[key] = (part, self.block_masks(part))
        return hit

    # serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "worlds": list(self.worlds),
            "agents": sorted(self.agents),
            "atoms": sorted(self.atoms),
            "valuation": {w: sorted(self.valuation[w]) for w in self.worlds},
            "access": {a: self.access[a].to_json() for a in sorted(self.access)},
            "awareness": {
                str(c): sorted(self.awareness[c]) for c in sorted(self.awareness, key=chain_sort_key)
            },
        }

    def to_json(self) -> str:
        return dump_json(self.to_dict())

    def __eq__(self, other):
        return isinstance(other, Model) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"Model(worlds={len(self.worlds)}, agents={sorted(self.agents)}, chains={len(self.awareness)})"


def dump_json(data: dict) -> str:
    """Stable, diff-friendly JSON: one top-level field per line, mappings one entry per line."""
    lines = []
    for key, value in data.items():
        if isinstance(value, dict) and value:
            inner = [f"    {json.dumps(k)}: {json.dumps(v)}" for k, v in value.items()]
            lines.append(f"  {json.dumps(key)}: {{\n" + ",\n".join(inner) + "\n  }")
        else:
            lines.append(f"  {json.dumps(key)}: {json.dumps(value)}")
    return "{\n" + ",\n".join(lines) + "\n}\n"


def _names(raw, key, what, problems):
    value = raw.get(key)
    if not isinstance(value, (list, tuple)):
        problems.append(f"'{key}' must be a list of {what} names")
        return []
    out = []
    for item in value:
        try:
            out.append(check_name(item, what) if what != "world" else _world_name(item))
        except ValueError as exc:
            problems.append(str(exc))
    if len(set(out)) != len(out):
        problems.append(f"duplicate {what} names in '{key}'")
    return out


def _world_name(w):
    if not isinstance(w, str) or not w:
        raise ValueError(f"invalid world id: {w!r}")
    return w


def validate(raw) -> Model:
    """Check a raw model description (dict or Model) and return a :class:`Model`.

    Every violated condition is collected and reported together in a
    :class:`ModelError`.
    """
    if isinstance(raw, Model):
        raw = raw.to_dict()
    if not isinstance(raw, dict):
        raise ModelError(["model description must be a JSON object"])
    problems = []
    worlds = _names(raw, "worlds", "world", problems)
    agents = _names(raw, "agents", "agent", problems)
    atoms = _names(raw, "atoms", "atom", problems)
    if not worlds:
        problems.append("the world set is empty")
    world_set, atom_set = set(worlds), set(atoms)

    valuation = {}
    raw_val = raw.get("valuation", {})
    if not isinstance(raw_val, dict):
        problems.append("'valuation' must map worlds to lists of atoms")
        raw_val = {}
    for w, true_atoms in raw_val.items():
        if w not in world_set:
            problems.append(f"valuation mentions unknown world {w!r}")
            continue
        if not isinstance(true_atoms, (list, tuple)):
            problems.append(f"valuation of {w!r} must be a list of atoms")
            continue
        for p in true_atoms:
            if p not in atom_set:
                problems.append(f"valuation of {w!r} mentions unknown atom {p!r}")
        valuation[w] = [p for p in true_atoms if p in atom_set]

    access = {}
    raw_access = raw.get("access", {})
    if not isinstance(raw_access, dict):
        problems.append("'access' must map agents to lists of blocks")
        raw_access = {}
    for a in agents:
        if a not in raw_access:
            problems.append(f"no accessibility partition for agent {a!r}")
    for a, blocks in raw_access.items():
        if a not in agents:
            problems.append(f"access given for unknown agent {a!r}")
            continue
        if isinstance(blocks, Partition):
            blocks = blocks.to_json()
        if not isinstance(blocks, (list, tuple)) or not all(isinstance(b, (list, tuple)) for b in blocks):
            problems.append(f"access of {a!r} must be a list of blocks (lists of worlds)")
            continue
        bad = [w for b in blocks for w in b if w not in world_set]
        if bad:
            problems.append(f"access of {a!r} mentions unknown worlds {sorted(set(map(str, bad)))}")
            continue
        try:
            part = Partition(blocks)
        except ValueError as exc:
            problems.append(f"access of {a!r} is not a partition: {exc}")
            continue
        if part.worlds != world_set:
            missing = sorted(world_set - part.worlds)
            problems.append(f"access of {a!r} does not cover worlds {missing}")
            continue
        access[a] = part

    awareness = {}
    raw_aw = raw.get("awareness", {})
    if not isinstance(raw_aw, dict):
        problems.append("'awareness' must map chains to lists of atoms")
        raw_aw = {}
    if not raw_aw:
        problems.append("no chains given: 'awareness' is empty")
    for key, aware in raw_aw.items():
        try:
            theta = as_chain(key)
        except ValueError as exc:
            problems.append(f"bad chain {key!r}: {exc}")
            continue
        unknown_agents = [m for m in theta.members if m not in agents]
        if unknown_agents:
            problems.append(f"chain [{theta}] uses unknown agents {sorted(set(unknown_agents))}")
        if not isinstance(aware, (list, tuple, set, frozenset)):
            problems.append(f"awareness of [{theta}] must be a list of atoms")
            continue
        aware = frozenset(aware)
        if not aware:
            problems.append(f"awareness set of [{theta}] is empty")
        stray = sorted(aware - atom_set)
        if stray:
            problems.append(f"awareness set of [{theta}] mentions unknown atoms {stray}")
        awareness[theta] = aware

    chains = sorted(awareness, key=lambda c: (chain_sort_key(c), str(c)))
    for n, t1 in enumerate(chains):
        for t2 in chains[n + 1:]:
            if chain_equiv(t1, t2) and awareness[t1] != awareness[t2]:
                problems.append(f"equivalent chains [{t1}] and [{t2}] have different awareness sets")
    for lo in chains:
        for hi in chains:
            if lo != hi and chain_leq(lo, hi) and not chain_equiv(lo, hi):
                if not awareness[hi] <= awareness[lo]:
                    extra = sorted(awareness[hi] - awareness[lo])
                    problems.append(
                        f"monotonicity: [{lo}] ⪯ [{hi}] but the awareness of [{hi}] "
                        f"has atoms {extra} missing from [{lo}]"
                    )

    if problems:
        raise ModelError(problems)
    return Model(worlds, agents, atoms, valuation, access, awareness)


def indist(m: Model, theta: Chain) -> Partition:
    """Worlds grouped by their valuation restricted to the awareness set of theta."""
    return _indist(m, m.lookup_chain(theta))[0]


def _indist(m: Model, c: Chain):
    def build():
        aware = m.awareness[c]
        return Partition.from_labels({w: m.valuation[w] & aware for w in m.worlds})

    return m.cached_partition(("indist", c), build)


def reach_c(m: Model, theta: Chain) -> Partition:
    """Join of the last agent's accessibility partition with indist(theta)."""
    return _reach_c(m, m.lookup_chain(theta))[0]


def _reach_c(m: Model, c: Chain):
    agent = m.check_agent(c.last)
    return m.cached_partition(("reach", c), lambda: join(m.access[agent], _indist(m, c)[0]))


# fixtures -----------------------------------------------------------------

# bundled files: the running-example model and the E[a]p -> p proof
FIXTURES = ("fig2", "ethm")
MODEL_FIXTURES = ("fig2",)


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    return resources.files("alpc.fixtures").joinpath(f"{name}.json").read_text()


def fixture(name: str) -> Model:
    if name not in MODEL_FIXTURES:
        raise KeyError(f"{name!r} is not a model fixture; available: {', '.join(MODEL_FIXTURES)}")
    return validate(json.loads(fixture_text(name)))


def load_model(path) -> Model:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError([f"{path}: not valid JSON ({exc})"]) from None
    return validate(raw)


def save_model(m: Model, path) -> None:
    Path(path).write_text(m.to_json())
