"""The Skolemized deriver: inference schemas MP_s, C_s, E_s (and the
set-semantics variant E_s'), their admissibility checker, and helpers that
assemble proofs from chase provenance."""
from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Sequence

from .chase import ChaseConfig, Derivation, chase, default_depth_bound
from .graph import Proof, ProofGraph, is_axiom, prune_to
from .logic import (_canon_atom_key, Atom, Conjunction, CQ, Constant, KnowledgeBase, SkolemRule,
                    Substitution, Term, Variable, as_cq, iter_matches, match_atom)

MPS, CS, ES, ES_PRIME = "MPs", "Cs", "Es", "EsPrime"


class InferenceError(ValueError):
    """Raised when an inference's side conditions do not hold."""


def _conj_atoms(conj) -> tuple:
    if isinstance(conj, Atom):
        return (conj,)
    if isinstance(conj, Conjunction):
        return conj.atoms
    if isinstance(conj, CQ) and conj.is_ground():
        return conj.atoms
    raise InferenceError(f"expected a ground conjunction, got {conj}")


def infer_mps(premises: Sequence[Atom], rule: SkolemRule, pi: Mapping[Variable, Term]) -> List[Atom]:
    if not all(isinstance(p, Atom) and p.is_ground() for p in premises):
        raise InferenceError("MP_s premises must be ground atoms")
    body = {a.substitute(pi) for a in rule.body}
    if body != set(premises):
        raise InferenceError("substitution does not map the rule body onto the premises")
    head = [a.substitute(pi) for a in rule.head]
    if not all(a.is_ground() for a in head):
        raise InferenceError("substitution leaves head variables unbound")
    return head


def infer_cs(atoms: Sequence[Atom]) -> Conjunction:
    if not atoms:
        raise InferenceError("C_s needs at least one premise")
    if not all(isinstance(a, Atom) and a.is_ground() for a in atoms):
        raise InferenceError("C_s premises must be ground atoms")
    return Conjunction(tuple(atoms))


def _positional_sigma(conj_atoms, target: CQ) -> Optional[Substitution]:
    if len(conj_atoms) != len(target.atoms):
        return None
    sub: Substitution = {}
    for p, f in zip(target.atoms, conj_atoms):
        sub = match_atom(p, f, sub)
        if sub is None:
            return None
    return sub


def infer_es(conj, target: CQ, sigma: Mapping[Variable, Term]) -> CQ:
    atoms = _conj_atoms(conj)
    if not all(a.is_ground() for a in atoms):
        raise InferenceError("E_s premise must be ground")
    target = as_cq(target)
    if len(atoms) != len(target.atoms) or any(
            t.substitute(sigma) != a for t, a in zip(target.atoms, atoms)):
        raise InferenceError("target does not positionally abstract the conjunction")
    return target


def infer_es_prime(conj, target: CQ, sigma: Mapping[Variable, Term]) -> CQ:
    atoms = _conj_atoms(conj)
    if not all(a.is_ground() for a in atoms):
        raise InferenceError("E_s' premise must be ground")
    target = as_cq(target)
    if {t.substitute(sigma) for t in target.atoms} != set(atoms):
        raise InferenceError("target does not abstract the conjunction's atom set")
    return target


def es_admissible(conj, target, prime: bool = False) -> bool:
    try:
        atoms = _conj_atoms(conj)
    except InferenceError:
        return False
    if not all(a.is_ground() for a in atoms):
        return False
    target = as_cq(target)
    if not prime:
        return _positional_sigma(atoms, target) is not None
    want = set(atoms)
    return any({t.substitute(s) for t in target.atoms} == want
               for s in iter_matches(target.atoms, want))


class SkSchemaChecker:
    """Admissibility oracle for MP_s, C_s and E_s (or E_s' when ``prime``)."""

    def __init__(self, kb: KnowledgeBase, prime: bool = False):
        self.kb = kb
        self.prime = prime
        self._rules = {ax: r for ax, r in zip(kb.tbox, kb.skolem_rules())}

    def is_grounded(self, label) -> bool:
        if is_axiom(label):
            return label in self._rules
        return isinstance(label, Atom) and label in self.kb.abox

    def admissible(self, premises: Sequence, conclusion, rule: str = "", params=None) -> bool:
        kinds = [rule] if rule else [MPS, CS, ES_PRIME if self.prime else ES]
        return any(self._check(k, list(premises), conclusion) for k in kinds)

    def _check(self, kind, premises, conclusion) -> bool:
        if kind == MPS:
            axioms = [p for p in premises if is_axiom(p)]
            atoms = [p for p in premises if not is_axiom(p)]
            if len(axioms) != 1 or axioms[0] not in self._rules or not isinstance(conclusion, Atom):
                return False
            if not all(isinstance(a, Atom) and a.is_ground() for a in atoms) or not conclusion.is_ground():
                return False
            srule = self._rules[axioms[0]]
            want = set(atoms)
            for pi in iter_matches(srule.body, want):
                if {b.substitute(pi) for b in srule.body} == want and \
                        conclusion in {h.substitute(pi) for h in srule.head}:
                    return True
            return False
        if kind == CS:
            if not premises or not all(isinstance(p, Atom) and p.is_ground() for p in premises):
                return False
            if isinstance(conclusion, Conjunction):
                return conclusion.atoms == tuple(premises)
            # a one-atom conjunction is the atom itself
            return len(premises) == 1 and conclusion == premises[0]
        if kind in (ES, ES_PRIME):
            if kind == ES_PRIME and not self.prime:
                return False
            if len(premises) != 1 or not isinstance(conclusion, (CQ, Atom, Conjunction)):
                return False
            return es_admissible(premises[0], conclusion, prime=(kind == ES_PRIME))
        return False


def sk_schema_checker(kb: KnowledgeBase, prime: bool = False) -> SkSchemaChecker:
    return SkSchemaChecker(kb, prime)


# ---------------------------------------------------------------------------
# Proof assembly
# ---------------------------------------------------------------------------

def _ground_order(a: Atom) -> tuple:
    # the order canonical forms give to ground atoms
    return _canon_atom_key(a, set(), {})


def final_shape(goal: CQ, image: Sequence[Atom], prime: bool):
    """Describe how the last steps of a proof of ``goal`` look once each goal
    atom has been mapped to the ground atom ``image[i]``.

    Returns (kind, premise atoms) where kind is ``"atom"`` (the goal is a
    single ground atom, so the premise itself is the conclusion), ``"C"``
    (C_s alone), ``"E"`` (E_s straight from one atom) or ``"CE"``.
    """
    if goal.is_ground():
        atoms = sorted(set(goal.atoms), key=_ground_order)
        # canonical order is deterministic; map back onto image atoms
        return ("atom", atoms) if len(atoms) == 1 else ("C", atoms)
    if prime:
        distinct = list(dict.fromkeys(image))
        if len(distinct) == 1:
            return "E", distinct
        return "CE", distinct
    if len(goal.atoms) == 1:
        return "E", list(image)
    return "CE", list(image)


def final_cost(goal: CQ, image: Sequence[Atom], cost: Mapping[Atom, int], prime: bool) -> int:
    """Tree size of the final steps plus the subproofs of their premises."""
    kind, prem = final_shape(goal, image, prime)
    base = {"atom": 0, "C": 1, "E": 1, "CE": 2}[kind]
    return base + sum(cost[a] for a in prem)


def attach_final(g: ProofGraph, vertex_of: Mapping[Atom, int], goal: CQ,
                 image: Sequence[Atom], prime: bool) -> int:
    """Add the closing C_s/E_s steps; returns the sink vertex."""
    kind, prem = final_shape(goal, image, prime)
    es = ES_PRIME if prime else ES
    if kind == "atom":
        return vertex_of[prem[0]]
    if kind == "C":
        v = g.add_vertex(Conjunction(tuple(prem)))
        g.add_edge([vertex_of[a] for a in prem], v, CS)
        return v
    if kind == "E":
        v = g.add_vertex(goal)
        g.add_edge([vertex_of[prem[0]]], v, es)
        return v
    c = g.add_vertex(Conjunction(tuple(prem)))
    g.add_edge([vertex_of[a] for a in prem], c, CS)
    v = g.add_vertex(goal)
    g.add_edge([c], v, es)
    return v


def build_dag_proof(kb: KnowledgeBase, choice: Mapping[Atom, Optional[Derivation]],
                    goal: CQ, image: Sequence[Atom], prime: bool = False) -> Proof:
    """Assemble a proof sharing one vertex per ground atom and per axiom.

    ``choice`` maps each needed atom to the derivation used for it (None for
    ABox leaves).
    """
    g = ProofGraph()
    vertex_of: Dict = {}

    def axiom_vertex(i: int) -> int:
        key = ("axiom", i)
        if key not in vertex_of:
            vertex_of[key] = g.add_vertex(kb.tbox[i])
        return vertex_of[key]

    order = _premise_order(choice, image)
    for a in order:
        vertex_of[a] = g.add_vertex(a)
    for a in order:
        d = choice[a]
        if d is not None:
            srcs = [vertex_of[p] for p in d.premises] + [axiom_vertex(d.rule_index)]
            g.add_edge(srcs, vertex_of[a], MPS)
    sink = attach_final(g, vertex_of, goal, image, prime)
    return prune_to(g, sink)


def _premise_order(choice, roots) -> List[Atom]:
    order: List[Atom] = []
    done = set()
    visiting = set()

    def visit(a):
        if a in done:
            return
        if a in visiting:
            raise ValueError("cyclic derivation choice")
        visiting.add(a)
        d = choice[a]
        if d is not None:
            for p in d.premises:
                visit(p)
        visiting.discard(a)
        done.add(a)
        order.append(a)

    for a in roots:
        visit(a)
    return order


def witness_proof(kb: KnowledgeBase, q: CQ, answers: Sequence[Constant],
                  cfg: Optional[ChaseConfig] = None, prime: bool = False) -> Proof:
    """A (not necessarily minimal) proof from first-derivation provenance."""
    cfg = cfg or ChaseConfig(default_depth_bound(kb, q))
    res = chase(kb, cfg=cfg)
    goal = q.instantiate(answers)
    sub = next(iter_matches(goal.atoms, res.as_set()), None)
    if sub is None:
        raise InferenceError("query answer not entailed within the depth bound")
    image = [a.substitute(sub) for a in goal.atoms]
    choice = {}
    stack = list(image)
    while stack:
        a = stack.pop()
        if a in choice:
            continue
        choice[a] = res.witness.get(a)
        if choice[a] is not None:
            stack.extend(choice[a].premises)
    p = build_dag_proof(kb, choice, goal, image, prime)
    p.minimal = False
    return p
