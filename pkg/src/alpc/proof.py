"""Axiom schemas, rule checking and proof-object verification for the Hilbert system.

Each schema is a formula template containing metavariables.  Matching a concrete
formula unifies it against the template (chains compared up to equivalence) and
then checks side conditions; instantiating substitutes bindings into the same
template.  Propositional tautologies are recognised by truth tables over the
formula's propositional skeleton, with maximal modal subformulas as opaque atoms.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, fields
from typing import Optional, Union

from .errors import AlpcError, ProofFormatError
from .syntax import (
    BINARY,
    And,
    Atom,
    Aware,
    BoxIndist,
    Chain,
    CKnow,
    ExplicitK,
    Formula,
    Iff,
    ImplicitK,
    Implies,
    Not,
    Or,
    as_chain,
    as_formula,
    canon,
    canon_formula,
    chain_leq,
    chains_of,
    check_name,
    conj,
    ill_formed_pair,
    parse,
    rebuild,
    to_text,
)


class AxiomName(enum.Enum):
    TAUT = "TAUT"
    AN = "AN"
    ACN = "ACN"
    AA = "AA"
    AL = "AL"
    AIndist = "AIndist"
    ACM = "ACM"
    AK = "AK"
    ANIndist = "ANIndist"
    AI = "AI"
    KA = "KA"
    NKA = "NKA"
    K_L = "K_L"
    T_L = "T_L"
    Five_L = "Five_L"
    K_Indist = "K_Indist"
    T_Indist = "T_Indist"
    Five_Indist = "Five_Indist"
    K_C = "K_C"
    MIX = "MIX"
    IND = "IND"
    KAC = "KAC"

    @classmethod
    def lookup(cls, name: Union[str, "AxiomName"]) -> "AxiomName":
        if isinstance(name, AxiomName):
            return name
        key = _ALIASES.get(name, name)
        try:
            return cls(key)
        except ValueError:
            raise KeyError(f"unknown axiom {name!r}") from None


_ALIASES = {
    "A[≈]": "AIndist",
    "A[~]": "AIndist",
    "AN[≈]": "ANIndist",
    "AN[~]": "ANIndist",
    "5_L": "Five_L",
    "K_[≈]": "K_Indist",
    "T_[≈]": "T_Indist",
    "5_[≈]": "Five_Indist",
}


# --------------------------------------------------------------------------
# metavariables and templates
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Meta:
    kind: str  # formula | chain | agent | atom | last
    name: str


PHI, PSI = Meta("formula", "phi"), Meta("formula", "psi")
TH, TH2 = Meta("chain", "theta"), Meta("chain", "theta2")
I_, J_ = Meta("agent", "i"), Meta("agent", "j")
P_ = Meta("atom", "p")
LAST = Meta("last", "theta")


def theta_order(theta) -> tuple:
    """Canonical chains of theta, deduplicated, sorted by their text form."""
    return tuple(sorted({canon(as_chain(t)) for t in theta}, key=str))


def _aware_law(op, inner_meta):
    return lambda theta: Iff(Aware(TH, PHI), Aware(TH, op(inner_meta, PHI)))


_TEMPLATES = {
    AxiomName.AN: lambda theta: Iff(Aware(TH, PHI), Aware(TH, Not(PHI))),
    AxiomName.ACN: lambda theta: Iff(Aware(TH, And(PHI, PSI)), And(Aware(TH, PHI), Aware(TH, PSI))),
    AxiomName.AA: _aware_law(Aware, TH2),
    AxiomName.AL: _aware_law(ImplicitK, J_),
    AxiomName.AIndist: _aware_law(BoxIndist, TH2),
    AxiomName.ACM: _aware_law(CKnow, TH2),
    AxiomName.AK: _aware_law(ExplicitK, TH2),
    AxiomName.ANIndist: lambda theta: Implies(And(Aware(TH, P_), P_), BoxIndist(TH, P_)),
    AxiomName.AI: lambda theta: Implies(Aware(TH, PHI), Aware(TH2, PHI)),
    AxiomName.KA: lambda theta: Implies(
        Aware(TH, PHI), conj(*[CKnow(t, Aware(TH, PHI)) for t in theta_order(theta)])
    ),
    AxiomName.NKA: lambda theta: Implies(
        Not(Aware(TH, PHI)), conj(*[CKnow(t, Not(Aware(TH, PHI))) for t in theta_order(theta)])
    ),
    AxiomName.K_L: lambda theta: Implies(
        ImplicitK(I_, Implies(PHI, PSI)), Implies(ImplicitK(I_, PHI), ImplicitK(I_, PSI))
    ),
    AxiomName.T_L: lambda theta: Implies(ImplicitK(I_, PHI), PHI),
    AxiomName.Five_L: lambda theta: Implies(Not(ImplicitK(I_, PHI)), ImplicitK(I_, Not(ImplicitK(I_, PHI)))),
    AxiomName.K_Indist: lambda theta: Implies(
        BoxIndist(TH, Implies(PHI, PSI)), Implies(BoxIndist(TH, PHI), BoxIndist(TH, PSI))
    ),
    AxiomName.T_Indist: lambda theta: Implies(BoxIndist(TH, PHI), PHI),
    AxiomName.Five_Indist: lambda theta: Implies(
        Not(BoxIndist(TH, PHI)), BoxIndist(TH, Not(BoxIndist(TH, PHI)))
    ),
    AxiomName.K_C: lambda theta: Implies(CKnow(TH, Implies(PHI, PSI)), Implies(CKnow(TH, PHI), CKnow(TH, PSI))),
    AxiomName.MIX: lambda theta: Implies(CKnow(TH, PHI), And(PHI, BoxIndist(TH, ImplicitK(LAST, CKnow(TH, PHI))))),
    AxiomName.IND: lambda theta: Implies(
        CKnow(TH, Implies(PHI, BoxIndist(TH, ImplicitK(LAST, PHI)))), Implies(PHI, CKnow(TH, PHI))
    ),
    AxiomName.KAC: lambda theta: Iff(ExplicitK(TH, PHI), And(Aware(TH, PHI), CKnow(TH, PHI))),
}


def _side_conditions(name, b):
    if name is AxiomName.AI and not chain_leq(b["theta2"], b["theta"]):
        return f"AI needs [{b['theta2']}] ⪯ [{b['theta']}]"
    return None


def _node_fields(node):
    return [f.name for f in fields(node) if f.init]


def _unify(template, target, b) -> bool:
    if isinstance(template, Meta):
        if template.kind == "last":
            return isinstance(target, str) and template.name in b and b[template.name].last == target
        if template.name in b:
            return b[template.name] == target
        ok = {
            "formula": lambda x: isinstance(x, Formula),
            "chain": lambda x: isinstance(x, Chain),
            "agent": lambda x: isinstance(x, str),
            "atom": lambda x: isinstance(x, Atom),
        }[template.kind](target)
        if ok:
            b[template.name] = target
        return ok
    if isinstance(template, Formula):
        if type(template) is not type(target):
            return False
        return all(_unify(getattr(template, n), getattr(target, n), b) for n in _node_fields(template))
    return template == target


def _substitute(template, b):
    if isinstance(template, Meta):
        if template.kind == "last":
            return b[template.name].last
        if template.name not in b:
            raise KeyError(template.name)
        return b[template.name]
    if isinstance(template, Formula):
        return type(template)(*(_substitute(getattr(template, n), b) for n in _node_fields(template)))
    return template


# --------------------------------------------------------------------------
# tautologies
# --------------------------------------------------------------------------

TAUT_MAX_ATOMS = 20


def skeleton(phi: Formula, table=None):
    """Propositional skeleton: maximal non-boolean subformulas become atoms ``v0, v1, ...``.

    Returns (skeleton formula, list of abstracted subformulas in index order).
    """
    table = {} if table is None else table

    def go(f):
        if isinstance(f, Not):
            return Not(go(f.sub))
        if isinstance(f, BINARY):
            return type(f)(go(f.left), go(f.right))
        key = canon_formula(f)
        if key not in table:
            table[key] = len(table)
        return Atom(f"v{table[key]}")

    sk = go(phi)
    return sk, sorted(table, key=table.get)


def _truth_table(phi: Formula, n: int) -> int:
    """Bit-parallel truth table over n skeleton atoms (bit k = assignment k)."""
    size = 1 << n
    full = (1 << size) - 1
    patterns = []
    for k in range(n):
        run = 1 << k
        pat = ((1 << run) - 1) << run
        length = 2 * run
        while length < size:
            pat |= pat << length
            length *= 2
        patterns.append(pat & full)

    def ev(f):
        if isinstance(f, Atom):
            return patterns[int(f.name[1:])]
        if isinstance(f, Not):
            return full & ~ev(f.sub)
        a, c = ev(f.left), ev(f.right)
        if isinstance(f, And):
            return a & c
        if isinstance(f, Or):
            return a | c
        if isinstance(f, Implies):
            return (full & ~a) | c
        return full & ~(a ^ c)

    return ev(phi), full


def is_tautology(phi: Formula) -> bool:
    sk, opaque = skeleton(phi)
    if len(opaque) > TAUT_MAX_ATOMS:
        raise ValueError(f"tautology check limited to {TAUT_MAX_ATOMS} opaque subformulas, got {len(opaque)}")
    table, full = _truth_table(sk, len(opaque))
    return table == full


# --------------------------------------------------------------------------
# matching and instantiation
# --------------------------------------------------------------------------


def _context_problem(phi: Formula, theta) -> Optional[str]:
    bad = ill_formed_pair(phi)
    if bad:
        return f"ill-formed: [{bad[1]}] inside the scope of [{bad[0]}]"
    allowed = set(theta_order(theta))
    stray = sorted({str(canon(c)) for c in chains_of(phi)} - {str(c) for c in allowed})
    if stray:
        return "chains not in theta: " + ", ".join(f"[{c}]" for c in stray)
    return None


def axiom_mismatch(name, phi, theta) -> Optional[str]:
    """Why phi is not an instance of the named schema, or None if it is."""
    name = AxiomName.lookup(name)
    phi = as_formula(phi)
    problem = _context_problem(phi, theta)
    if problem:
        return problem
    if name is AxiomName.TAUT:
        try:
            return None if is_tautology(phi) else "not a propositional tautology"
        except ValueError as exc:
            return str(exc)
    target = canon_formula(phi)
    bindings = {}
    if not _unify(_TEMPLATES[name](theta), target, bindings):
        return f"does not have the shape of {name.value}"
    return _side_conditions(name, bindings)


def match_axiom(name, phi, theta) -> bool:
    return axiom_mismatch(name, phi, theta) is None


def instantiate_axiom(name, bindings: dict, theta) -> Formula:
    """Instance of a schema from metavariable bindings.

    Keys: ``phi``, ``psi`` (formulas or text), ``theta``, ``theta2`` (chains),
    ``i``, ``j`` (agents), ``p`` (atom).  For TAUT pass ``shape``, a propositional
    formula whose atoms named like other binding keys are replaced by them.
    """
    name = AxiomName.lookup(name)
    b = {}
    for key, value in bindings.items():
        if key in ("phi", "psi", "shape"):
            b[key] = as_formula(value)
        elif key in ("theta", "theta2"):
            b[key] = as_chain(value)
        elif key in ("i", "j"):
            b[key] = check_name(value)
        elif key == "p":
            b[key] = value if isinstance(value, Atom) else Atom(check_name(value, "atom"))
        else:
            raise ValueError(f"unknown metavariable {key!r}")
    if name is AxiomName.TAUT:
        if "shape" not in b:
            raise ValueError("TAUT needs a 'shape' binding")
        out = _replace_atoms(b["shape"], {k: v for k, v in b.items() if k != "shape"})
    else:
        try:
            out = _substitute(_TEMPLATES[name](theta), b)
        except KeyError as exc:
            raise ValueError(f"{name.value} needs a binding for {exc.args[0]!r}") from None
        side = _side_conditions(name, b)
        if side:
            raise ValueError(side)
    reason = axiom_mismatch(name, out, theta)
    if reason:
        raise ValueError(f"{name.value} instance {to_text(out)!r} rejected: {reason}")
    return out


def _replace_atoms(f, sub):
    if isinstance(f, Atom):
        return sub.get(f.name, f)
    if isinstance(f, (Not,) + BINARY):
        kids = [f.sub] if isinstance(f, Not) else [f.left, f.right]
        return rebuild(f, [_replace_atoms(k, sub) for k in kids])
    return f


# --------------------------------------------------------------------------
# proofs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Axiom:
    name: AxiomName


@dataclass(frozen=True)
class MP:
    """From line `minor` (φ) and line `major` (φ -> ψ) conclude ψ."""

    minor: int
    major: int


@dataclass(frozen=True)
class LG:
    line: int
    agent: str


@dataclass(frozen=True)
class IndistG:
    line: int
    chain: Chain


@dataclass(frozen=True)
class CG:
    line: int
    chain: Chain


Justification = Union[Axiom, MP, LG, IndistG, CG]


@dataclass(frozen=True)
class ProofLine:
    index: int
    formula: Formula
    by: Justification


@dataclass
class Proof:
    theta: tuple
    lines: list = field(default_factory=list)

    @property
    def theorem(self) -> Formula:
        return self.lines[-1].formula

    def add(self, formula, by) -> "Proof":
        self.lines.append(ProofLine(len(self.lines) + 1, as_formula(formula), by))
        return self

    def to_dict(self) -> dict:
        return {
            "theta": [str(t) for t in self.theta],
            "lines": [{"formula": to_text(l.formula), "by": _by_to_json(l.by)} for l in self.lines],
        }

    def to_json(self) -> str:
        body = ",\n".join("    " + json.dumps(x, ensure_ascii=False) for x in self.to_dict()["lines"])
        return '{\n  "theta": ' + json.dumps(self.to_dict()["theta"]) + ',\n  "lines": [\n' + body + "\n  ]\n}\n"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    n_lines: int
    line: Optional[int] = None
    reason: str = ""

    def __bool__(self):
        return self.accepted

    def __str__(self):
        if self.accepted:
            return f"accepted ({self.n_lines} lines)"
        return f"rejected at line {self.line}: {self.reason}"


def _same(a: Formula, b: Formula) -> bool:
    return canon_formula(a) == canon_formula(b)


def _cited(k, refs):
    for r in refs:
        if not isinstance(r, int) or isinstance(r, bool) or not 1 <= r < k:
            return f"line {k} cites line {r}, which is not an earlier line"
    return None


def check_line(proof: Proof, k: int) -> Optional[str]:
    """Reason line k (1-based) is not justified, or None."""
    line = proof.lines[k - 1]
    phi, by = line.formula, line.by
    problem = _context_problem(phi, proof.theta)
    if problem:
        return problem
    allowed = set(theta_order(proof.theta))
    earlier = lambda n: proof.lines[n - 1].formula  # noqa: E731
    if isinstance(by, Axiom):
        reason = axiom_mismatch(by.name, phi, proof.theta)
        return f"not an instance of {by.name.value}: {reason}" if reason else None
    if isinstance(by, MP):
        bad = _cited(k, (by.minor, by.major))
        if bad:
            return bad
        if not _same(earlier(by.major), Implies(earlier(by.minor), phi)):
            return f"MP: line {by.major} is not (line {by.minor}) -> (line {k})"
        return None
    bad = _cited(k, (by.line,))
    if bad:
        return bad
    premise = earlier(by.line)
    if isinstance(by, LG):
        expected, rule = ImplicitK(by.agent, premise), "LG"
    else:
        if canon(by.chain) not in allowed:
            return f"chain [{by.chain}] is not in theta"
        if isinstance(by, IndistG):
            expected, rule = BoxIndist(by.chain, premise), "[≈]G"
        else:
            expected, rule = CKnow(by.chain, premise), "CG"
    if not _same(phi, expected):
        return f"{rule}: expected {to_text(expected)}"
    return None


def verify(proof: Proof) -> Verdict:
    """Accept iff every line is an axiom instance or follows by a rule from earlier lines."""
    n = len(proof.lines)
    if n == 0:
        return Verdict(False, 0, None, "empty proof")
    for k in range(1, n + 1):
        reason = check_line(proof, k)
        if reason:
            return Verdict(False, n, k, reason)
    return Verdict(True, n)


# --------------------------------------------------------------------------
# proof files
# --------------------------------------------------------------------------


def _by_to_json(by):
    if isinstance(by, Axiom):
        return by.name.value
    if isinstance(by, MP):
        return {"mp": [by.minor, by.major]}
    if isinstance(by, LG):
        return {"lg": {"line": by.line, "agent": by.agent}}
    if isinstance(by, IndistG):
        return {"xg": {"line": by.line, "chain": str(by.chain)}}
    return {"cg": {"line": by.line, "chain": str(by.chain)}}


def _by_from_json(raw, k):
    try:
        if isinstance(raw, str):
            return Axiom(AxiomName.lookup(raw))
        if isinstance(raw, dict) and len(raw) == 1:
            (kind, arg), = raw.items()
            if kind == "mp":
                minor, major = arg
                return MP(int(minor), int(major))
            if kind == "lg":
                return LG(int(arg["line"]), check_name(arg["agent"]))
            if kind == "xg":
                return IndistG(int(arg["line"]), as_chain(arg["chain"]))
            if kind == "cg":
                return CG(int(arg["line"]), as_chain(arg["chain"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ProofFormatError(f"line {k}: bad justification {raw!r} ({exc})") from None
    raise ProofFormatError(f"line {k}: bad justification {raw!r}")


def proof_from_json(data) -> Proof:
    """Build a Proof from a decoded proof file.

    Accepts ``{"theta": [...], "lines": [...]}`` or a bare list of lines, in
    which case theta is taken from the chains the formulas use.
    """
    if isinstance(data, list):
        theta, raw_lines = None, data
    elif isinstance(data, dict) and isinstance(data.get("lines"), list):
        theta, raw_lines = data.get("theta"), data["lines"]
    else:
        raise ProofFormatError("proof file must be a list of lines or an object with 'lines'")
    lines = []
    for k, raw in enumerate(raw_lines, 1):
        if not isinstance(raw, dict) or "formula" not in raw or "by" not in raw:
            raise ProofFormatError(f"line {k}: expected an object with 'formula' and 'by'")
        try:
            phi = parse(raw["formula"])
        except AlpcError as exc:
            raise ProofFormatError(f"line {k}: {exc}") from None
        lines.append(ProofLine(k, phi, _by_from_json(raw["by"], k)))
    if theta is None:
        theta = {c for l in lines for c in chains_of(l.formula)}
    try:
        theta = theta_order(theta)
    except (TypeError, ValueError) as exc:
        raise ProofFormatError(f"bad theta: {exc}") from None
    return Proof(theta, lines)


def load_proof(path) -> Proof:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProofFormatError(f"{path}: not valid JSON ({exc})") from None
    return proof_from_json(data)


def explicit_truth_proof(agent: str = "a", atom: str = "p") -> Proof:
    """Five-line derivation of E[agent] atom -> atom."""
    th = Chain((agent,))
    p = Atom(atom)
    e, a, c = ExplicitK(th, p), Aware(th, p), CKnow(th, p)
    kac = Iff(e, And(a, c))
    mix_rhs = And(p, BoxIndist(th, ImplicitK(agent, c)))
    mix = Implies(c, mix_rhs)
    bridge = Implies(mix, Implies(e, p))
    proof = Proof(theta_order([th]))
    proof.add(kac, Axiom(AxiomName.KAC))
    proof.add(Implies(kac, bridge), Axiom(AxiomName.TAUT))
    proof.add(bridge, MP(1, 2))
    proof.add(mix, Axiom(AxiomName.MIX))
    proof.add(Implies(e, p), MP(4, 3))
    return proof
