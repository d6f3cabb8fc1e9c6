"""Satisfaction and model validity.

Formulas are evaluated by extension: each subformula maps to the bitmask of worlds
where it holds, so a box over a partition keeps exactly the blocks contained in
the operand's extension.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .model import Model, _indist, _reach_c
from .syntax import (
    And,
    Atom,
    Aware,
    BoxIndist,
    CKnow,
    ExplicitK,
    Formula,
    FormulaLike,
    Iff,
    ImplicitK,
    Implies,
    Not,
    Or,
    as_formula,
    atoms_of,
    canon,
    check_well_formed,
    to_text,
    walk,
)


def _box(blocks, ext):
    out = 0
    for b in blocks:
        if b & ext == b:
            out |= b
    return out


def check_formula(m: Model, phi: Formula) -> Formula:
    """Raise unless phi is well-formed and every chain/agent it uses is known to m."""
    check_well_formed(phi)
    for node in walk(phi):
        if isinstance(node, ImplicitK):
            m.check_agent(node.agent)
        elif isinstance(node, (Aware, BoxIndist, CKnow, ExplicitK)):
            c = m.lookup_chain(node.chain)
            if not isinstance(node, (Aware, BoxIndist)):
                m.check_agent(c.last)
    return phi


class Evaluator:
    """Evaluation session over one model; memoises extensions of subformulas."""

    def __init__(self, model: Model):
        self.model = model
        self._ext = {}

    def extension(self, phi: Formula) -> int:
        hit = self._ext.get(phi)
        if hit is not None:
            return hit
        m = self.model
        if isinstance(phi, Atom):
            out = m.atom_masks.get(phi.name, 0)
        elif isinstance(phi, Not):
            out = m.full & ~self.extension(phi.sub)
        elif isinstance(phi, And):
            out = self.extension(phi.left) & self.extension(phi.right)
        elif isinstance(phi, Or):
            out = self.extension(phi.left) | self.extension(phi.right)
        elif isinstance(phi, Implies):
            out = (m.full & ~self.extension(phi.left)) | self.extension(phi.right)
        elif isinstance(phi, Iff):
            out = m.full & ~(self.extension(phi.left) ^ self.extension(phi.right))
        elif isinstance(phi, Aware):
            out = m.full if self.aware(phi.chain, phi.sub) else 0
        elif isinstance(phi, ImplicitK):
            out = _box(m.cached_partition(("access", phi.agent), lambda: m.access[phi.agent])[1],
                       self.extension(phi.sub))
        elif isinstance(phi, BoxIndist):
            out = _box(_indist(m, canon(phi.chain))[1], self.extension(phi.sub))
        elif isinstance(phi, CKnow):
            out = _box(_reach_c(m, canon(phi.chain))[1], self.extension(phi.sub))
        elif isinstance(phi, ExplicitK):
            if self.aware(phi.chain, phi.sub):
                out = _box(_reach_c(m, canon(phi.chain))[1], self.extension(phi.sub))
            else:
                out = 0
        else:
            raise TypeError(f"not a formula: {phi!r}")
        self._ext[phi] = out
        return out

    def aware(self, chain, sub) -> bool:
        return atoms_of(sub) <= self.model.awareness[canon(chain)]

    def holds(self, world: str, phi: Formula) -> bool:
        return bool(self.extension(phi) >> self.model.index[world] & 1)


def truth_set(m: Model, phi: FormulaLike) -> tuple:
    """Worlds of m where phi holds, in world order."""
    phi = check_formula(m, as_formula(phi))
    return m.unmask(Evaluator(m).extension(phi))


def holds(m: Model, world: str, phi: FormulaLike) -> bool:
    phi = check_formula(m, as_formula(phi))
    m.check_world(world)
    return Evaluator(m).holds(world, phi)


class Validity(NamedTuple):
    valid: bool
    falsifying: tuple

    def __bool__(self):
        return self.valid


def model_valid(m: Model, phi: FormulaLike) -> Validity:
    """Whether phi holds at every world of m; `falsifying` lists the worlds where it fails."""
    phi = check_formula(m, as_formula(phi))
    bad = m.full & ~Evaluator(m).extension(phi)
    return Validity(bad == 0, m.unmask(bad))


@dataclass
class EvalTrace:
    formula: Formula
    world: str
    verdict: bool
    children: list = field(default_factory=list)
    # worlds the operator quantifies over (modal nodes only)
    quantified: Optional[tuple] = None
    note: str = ""

    def to_dict(self) -> dict:
        out = {"formula": to_text(self.formula), "world": self.world, "verdict": self.verdict}
        if self.quantified is not None:
            out["quantified"] = list(self.quantified)
        if self.note:
            out["note"] = self.note
        if self.children:
            out["children"] = [c.to_dict() for c in self.children]
        return out

    def render(self, indent: int = 0) -> str:
        head = f"{'  ' * indent}{'T' if self.verdict else 'F'} {self.world} ⊨ {to_text(self.formula)}"
        if self.quantified is not None:
            head += "  over {" + ", ".join(self.quantified) + "}"
        if self.note:
            head += f"  ({self.note})"
        return "\n".join([head] + [c.render(indent + 1) for c in self.children])


def explain(m: Model, world: str, phi: FormulaLike) -> EvalTrace:
    """Evaluation tree whose root verdict equals holds(m, world, phi)."""
    phi = check_formula(m, as_formula(phi))
    m.check_world(world)
    ev = Evaluator(m)

    def node(f, w):
        verdict = ev.holds(w, f)
        if isinstance(f, Atom):
            return EvalTrace(f, w, verdict)
        if isinstance(f, Not):
            return EvalTrace(f, w, verdict, [node(f.sub, w)])
        if isinstance(f, (And, Or, Implies, Iff)):
            return EvalTrace(f, w, verdict, [node(f.left, w), node(f.right, w)])
        if isinstance(f, Aware):
            aware = m.awareness[canon(f.chain)]
            missing = sorted(atoms_of(f.sub) - aware)
            note = f"unaware of {missing}" if missing else "all atoms aware"
            return EvalTrace(f, w, verdict, note=note)
        if isinstance(f, ImplicitK):
            worlds = m.access[f.agent].block_of(w)
        elif isinstance(f, BoxIndist):
            worlds = _indist(m, canon(f.chain))[0].block_of(w)
        elif isinstance(f, CKnow):
            worlds = _reach_c(m, canon(f.chain))[0].block_of(w)
        else:
            a_child = node(Aware(f.chain, f.sub), w)
            c_child = node(CKnow(f.chain, f.sub), w)
            return EvalTrace(f, w, verdict, [a_child, c_child])
        return EvalTrace(f, w, verdict, [node(f.sub, v) for v in worlds], quantified=tuple(worlds))

    return node(phi, world)

