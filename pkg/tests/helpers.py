"""Generators shared by the test modules: random formulas, axiom instances and
concrete instances of the known valid schemas."""
from __future__ import annotations

import random

from alpc.proof import AxiomName, instantiate_axiom
from alpc.search import RandomModelParams
from alpc.syntax import (
    And,
    Atom,
    Aware,
    BoxIndist,
    Chain,
    CKnow,
    ExplicitK,
    Iff,
    ImplicitK,
    Implies,
    Not,
    Or,
    canon,
    chain_leq,
    parse,
)

AGENTS = ("a", "b", "c")
ATOMS = ("p", "q")
THETA = tuple(Chain.parse(t) for t in ("a", "b", "c", "a,b", "b,a", "a,b,a", "a,b,c", "b,a,c"))
POOL = tuple(parse(s) for s in ("p", "q", "p & q", "!p"))

FUZZ_PARAMS = RandomModelParams(worlds=(1, 6), agents=AGENTS, atoms=ATOMS + ("r",), theta_set=THETA)


def random_formula(rng: random.Random, depth: int, atoms=ATOMS, agents=AGENTS, theta=THETA, scope=None):
    """Random well-formed formula; `scope` is the innermost enclosing A/E chain."""
    if depth <= 0 or rng.random() < 0.25:
        return Atom(rng.choice(atoms))
    kind = rng.randrange(10)
    sub = lambda s=scope: random_formula(rng, depth - 1, atoms, agents, theta, s)  # noqa: E731
    if kind == 0:
        return Not(sub())
    if kind <= 4:
        op = (And, Or, Implies, Iff)[kind - 1]
        return op(sub(), sub())
    if kind == 5:
        return ImplicitK(rng.choice(agents), sub())
    if kind in (6, 7):
        op = BoxIndist if kind == 6 else CKnow
        return op(rng.choice(theta), sub())
    ok = [t for t in theta if scope is None or chain_leq(scope, t)]
    if not ok:
        return Not(sub())
    t = rng.choice(ok)
    op = Aware if kind == 8 else ExplicitK
    return op(t, sub(t))


TAUT_SHAPES = tuple(
    parse(s)
    for s in (
        "phi -> phi",
        "phi | !phi",
        "!(phi & !phi)",
        "phi & psi -> psi",
        "phi -> psi -> phi",
        "(phi -> psi) -> !psi -> !phi",
        "(phi <-> psi) <-> (psi <-> phi)",
        "!!phi <-> phi",
        "!(phi | psi) <-> !phi & !psi",
        "(phi -> psi) & phi -> psi",
    )
)


def random_bindings(rng: random.Random, name: AxiomName, theta=THETA, depth: int = 2) -> dict:
    pick_formula = lambda: rng.choice(POOL) if rng.random() < 0.5 else random_formula(rng, depth)  # noqa: E731
    b = {
        "phi": pick_formula(),
        "psi": pick_formula(),
        "theta": rng.choice(theta),
        "theta2": rng.choice(theta),
        "i": rng.choice(AGENTS),
        "j": rng.choice(AGENTS),
        "p": rng.choice(ATOMS),
    }
    if name is AxiomName.TAUT:
        return {"shape": rng.choice(TAUT_SHAPES), "phi": b["phi"], "psi": b["psi"]}
    if name is AxiomName.AI:
        below = [t for t in theta if chain_leq(t, b["theta"])]
        b["theta2"] = rng.choice(below)
    return b


def axiom_instances(rng: random.Random, name: AxiomName, count: int, theta=THETA) -> list:
    """`count` distinct well-formed instances of a schema (ill-formed draws are retried)."""
    out = []
    for _ in range(count * 200):
        try:
            phi = instantiate_axiom(name, random_bindings(rng, name, theta), theta)
        except ValueError:
            continue
        if phi not in out:
            out.append(phi)
        if len(out) == count:
            return out
    raise AssertionError(f"could not build {count} instances of {name.value}")


# --------------------------------------------------------------------------
# concrete instances of the validity list
# --------------------------------------------------------------------------


def _chains(agents):
    seen = set()
    for n in (1, 2, 3):
        for k in range(len(agents) ** n):
            members = tuple(agents[(k // len(agents) ** d) % len(agents)] for d in range(n))
            c = canon(Chain(members))
            if c not in seen:
                seen.add(c)
                yield c


def valid_schema_instances(agents=("a", "b")) -> dict:
    """Schema label -> list of instances, over the formula pool and chains on `agents`."""
    chains = list(_chains(agents))
    out = {}

    def add(label, phi):
        out.setdefault(label, []).append(phi)

    for phi in POOL:
        for t in chains:
            A = lambda f, t=t: Aware(t, f)  # noqa: E731
            add("A neg", Iff(A(phi), A(Not(phi))))
            for psi in POOL:
                add("A and", Iff(A(And(phi, psi)), And(A(phi), A(psi))))
            for t2 in chains:
                add("A [≈]", Iff(A(phi), A(BoxIndist(t2, phi))))
                add("A C", Iff(A(phi), A(CKnow(t2, phi))))
                if chain_leq(t, t2):
                    add("A A", Iff(A(phi), A(Aware(t2, phi))))
                    add("A E", Iff(A(phi), A(ExplicitK(t2, phi))))
            for i in agents:
                add("A I", Iff(A(phi), A(ImplicitK(i, phi))))
            add("unaware not known", Not(ExplicitK(t, Not(Aware(t, phi)))))
            add("C implies I", Implies(CKnow(t, phi), ImplicitK(t.last, phi)))
        for i in agents:
            I = lambda f, i=i: ImplicitK(i, f)  # noqa: E731
            add("I T", Implies(I(phi), phi))
            add("I 4", Implies(I(phi), I(I(phi))))
            add("I 5", Implies(Not(I(phi)), I(Not(I(phi)))))
            for psi in POOL:
                add("I K", Implies(I(Implies(phi, psi)), Implies(I(phi), I(psi))))
            for j in agents:
                ij, ijj = Chain((i, j)), Chain((i, j, j))
                add("collapse A", Iff(Aware(ijj, phi), Aware(ij, phi)))
                add("collapse [≈]", Iff(BoxIndist(ijj, phi), BoxIndist(ij, phi)))
                add("collapse E", Iff(ExplicitK(ijj, phi), ExplicitK(ij, phi)))
                add("E T", Implies(ExplicitK(Chain((i,)), ExplicitK(ij, phi)), ExplicitK(ij, phi)))
                add("E not-known", Implies(Not(ExplicitK(Chain((i,)), phi)), Not(ExplicitK(Chain((i, j, i)), phi))))
                for k in agents:
                    ijk = Chain((i, j, k))
                    add("A prefix", Implies(Aware(ijk, phi), Aware(ij, phi)))
                    add("[≈] prefix", Implies(BoxIndist(ijk, phi), BoxIndist(ij, phi)))
    return out


# Instances of the non-valid entries, all with phi = p.  The second atom q is in
# the bounds so that awareness sets of unrelated chains can differ.
INVALID_SCHEMAS = (
    "E[a,b,c] p -> E[a,b] p",
    "E[a,b] p -> E[a] E[a,b] p",
    "E[a] E[a,b] p -> E[b] p",
)


def all_chains(agents=("a", "b")):
    return tuple(_chains(agents))
