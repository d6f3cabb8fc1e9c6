"""Closure sets cl(φ) over a fixed chain set Θ, computed as a least fixpoint.

Rule numbers follow the standard eleven closure conditions:

1. φ itself                        7. [≈]θ[≈]θψ, [≈]θ¬[≈]θψ for [≈]θψ in sub(φ)
2. subformulas                     8. [≈]θ I_i Cθψ for Cθψ, i = last(θ)
3. ¬ψ for non-negations ψ          9. I_i I_i Cθψ, I_i¬I_i Cθψ for I_i Cθψ
4. Cθ'Aθψ, Cθ'¬Aθψ for θ' in Θ    10. [≈]θ[≈]θ I_i Cθψ, [≈]θ¬[≈]θ I_i Cθψ
5. [≈]θ p, Aθχ (χ in sub ψ), Aθ'ψ  11. Aθψ, Cθψ for Eθψ
6. I_i I_iψ, I_i¬I_iψ for I_iψ in sub(φ)

Chains are canonicalised throughout.  Candidates outside the language (those
breaking the awareness nesting rule, which rule 5 can produce) are not members.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .syntax import (
    Atom,
    Aware,
    BoxIndist,
    CKnow,
    ExplicitK,
    Formula,
    ImplicitK,
    Not,
    as_chain,
    canon,
    canon_formula,
    chain_sort_key,
    chains_of,
    check_well_formed,
    modal_depth,
    subformulas,
    to_text,
    well_formed,
)


@dataclass(frozen=True)
class ClosureResult:
    root: Formula
    theta: tuple
    formulas: frozenset
    # formula -> frozenset of rule numbers that yield it
    generator: dict

    def sorted(self) -> list:
        return sorted(self.formulas, key=lambda f: (modal_depth(f), to_text(f)))

    def __len__(self):
        return len(self.formulas)

    def __contains__(self, phi):
        return canon_formula(phi) in self.formulas


def _rules(psi: Formula, theta: tuple, atoms, root_subs):
    """Yield (rule, formula) for every one-step consequence of psi."""
    for chi in subformulas(psi):
        if chi != psi:
            yield 2, chi
    if not isinstance(psi, Not):
        yield 3, Not(psi)
    if isinstance(psi, Aware):
        for t in theta:
            yield 4, CKnow(t, psi)
            yield 4, CKnow(t, Not(psi))
        for p in atoms:
            yield 5, BoxIndist(psi.chain, Atom(p))
        for chi in subformulas(psi.sub):
            yield 5, Aware(psi.chain, chi)
        for t in theta:
            yield 5, Aware(t, psi.sub)
    if isinstance(psi, ImplicitK) and psi in root_subs:
        yield 6, ImplicitK(psi.agent, psi)
        yield 6, ImplicitK(psi.agent, Not(psi))
    if isinstance(psi, BoxIndist) and psi in root_subs:
        yield 7, BoxIndist(psi.chain, psi)
        yield 7, BoxIndist(psi.chain, Not(psi))
    if isinstance(psi, CKnow):
        yield 8, BoxIndist(psi.chain, ImplicitK(psi.chain.last, psi))
    if isinstance(psi, ImplicitK) and isinstance(psi.sub, CKnow):
        yield 9, ImplicitK(psi.agent, psi)
        yield 9, ImplicitK(psi.agent, Not(psi))
    if (
        isinstance(psi, BoxIndist)
        and isinstance(psi.sub, ImplicitK)
        and isinstance(psi.sub.sub, CKnow)
        and psi.sub.sub.chain == psi.chain
    ):
        yield 10, BoxIndist(psi.chain, psi)
        yield 10, BoxIndist(psi.chain, Not(psi))
    if isinstance(psi, ExplicitK):
        yield 11, Aware(psi.chain, psi.sub)
        yield 11, CKnow(psi.chain, psi.sub)


def _theta(theta) -> tuple:
    chains = {canon(as_chain(t)) for t in theta}
    return tuple(sorted(chains, key=chain_sort_key))


def closure(phi: Formula, theta, *, limit: int = 1_000_000) -> ClosureResult:
    """Least set containing phi and closed under the eleven rules.

    `theta` must contain (up to chain equivalence) every chain used in phi.
    """
    check_well_formed(phi)
    theta = _theta(theta)
    missing = {canon(c) for c in chains_of(phi)} - set(theta)
    if missing:
        raise ValueError("chains not in theta: " + ", ".join(f"[{c}]" for c in sorted(missing, key=chain_sort_key)))
    root = canon_formula(phi)
    root_subs = subformulas(root)

    members = {root}
    atoms = set()
    todo = [root]
    # Rule 5 depends on the atoms present; atoms only enter through rule 2, so
    # rerun the awareness formulas whenever a new atom shows up.
    aware_seen = []
    while todo:
        psi = todo.pop()
        if isinstance(psi, Atom) and psi.name not in atoms:
            atoms.add(psi.name)
            todo.extend(aware_seen)
        if isinstance(psi, Aware):
            aware_seen.append(psi)
        for _, chi in _rules(psi, theta, sorted(atoms), root_subs):
            if chi not in members and well_formed(chi):
                members.add(chi)
                todo.append(chi)
                if len(members) > limit:
                    raise RuntimeError(f"closure exceeded {limit} formulas")
    formulas = frozenset(members)

    generator = {f: set() for f in formulas}
    generator[root].add(1)
    for psi in formulas:
        for rule, chi in _rules(psi, theta, sorted(atoms), root_subs):
            if chi in generator:
                generator[chi].add(rule)
    return ClosureResult(root, theta, formulas, {f: frozenset(r) for f, r in generator.items()})


def missing_consequences(result: ClosureResult) -> list:
    """Well-formed one-step consequences of members that are absent (empty at a fixpoint)."""
    atoms = sorted(n.name for n in result.formulas if isinstance(n, Atom))
    root_subs = subformulas(result.root)
    out = []
    for psi in result.formulas:
        for rule, chi in _rules(psi, result.theta, atoms, root_subs):
            if chi not in result.formulas and well_formed(chi):
                out.append((rule, psi, chi))
    return out


def closure_stats(result: ClosureResult) -> dict:
    per_rule = Counter()
    for rules in result.generator.values():
        for r in rules:
            per_rule[r] += 1
    return {
        "cardinality": len(result.formulas),
        "max_modal_depth": max(modal_depth(f) for f in result.formulas),
        "per_rule": {r: per_rule[r] for r in range(1, 12)},
    }

