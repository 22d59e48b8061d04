"""Generators for the hardness gadgets: the lengthened-chain instances and the
SAT encodings over a fixed ABox."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .deriver_cq import C, MP, T, infer_c, infer_t
from .graph import Proof, ProofGraph
from .logic import (Atom, ConceptInclusion, ConceptName, Constant, CQ, KnowledgeBase, Role,
                    RoleInclusion, Variable, freeze_cq)

CHAIN, SAT_SK, SAT_CQ = "chain", "sat_sk", "sat_cq"


@dataclass(frozen=True)
class Fixture:
    kind: str
    kb: KnowledgeBase
    query: CQ
    answer: Tuple[Constant, ...]
    bound: int
    expected: Optional[bool] = None
    deriver: str = "sk"
    measure: str = "tree_size"


# ---------------------------------------------------------------------------
# Chain gadget
# ---------------------------------------------------------------------------

def level_name(pred: str, i: int) -> str:
    return f"{pred}_{i}"


def gen_chain(query: CQ, n: int, answers: Optional[Sequence[Constant]] = None) -> Fixture:
    """Instance in which every proof of ``query(answers)`` climbs a chain of
    n+1 inclusions per predicate.

    The ABox is the frozen query over the predicates ``P_0``; the TBox holds
    ``P_i sub P_{i+1}`` for ``0 <= i < n`` and ``P_n sub P``.  Answer
    variables are frozen too when ``answers`` is omitted.  ``bound`` is n:
    no proof has measure n or less.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if answers is None:
        taken = {c.name for c in query.constants()}
        answers = []
        for v in query.answer_vars:
            name = f"c_{v.name}"
            while name in taken:
                name += "_"
            taken.add(name)
            answers.append(Constant(name))
    answers = tuple(answers)
    abox = [Atom(level_name(a.predicate, 0), a.args) for a in freeze_cq(query, answers)]
    tbox = []
    for pred in dict.fromkeys(a.predicate for a in query.atoms):
        binary = any(a.predicate == pred and a.arity == 2 for a in query.atoms)
        names = [level_name(pred, i) for i in range(n + 1)] + [pred]
        for lo, hi in zip(names, names[1:]):
            tbox.append(RoleInclusion(Role(lo), Role(hi)) if binary
                        else ConceptInclusion(ConceptName(lo), ConceptName(hi)))
    kb = KnowledgeBase(tuple(tbox), tuple(abox))
    return Fixture(CHAIN, kb, query, answers, n, expected=False)


def extend_chain(fx: Fixture, kb: KnowledgeBase) -> Fixture:
    """T1 = T0 + T and A1 = A0 + A; a proof within the bound exists exactly
    when T and A already entail the answer."""
    merged = KnowledgeBase(tuple(fx.kb.tbox) + tuple(kb.tbox), tuple(fx.kb.abox) + tuple(kb.abox))
    return replace(fx, kb=merged, expected=None)


# ---------------------------------------------------------------------------
# SAT gadget
# ---------------------------------------------------------------------------

Clause = Tuple[int, ...]


def literal_name(lit: int) -> str:
    return f"p{lit}" if lit > 0 else f"np{-lit}"


def normalize_clauses(clauses: Sequence[Sequence[int]]) -> Tuple[List[Clause], List[int]]:
    """Clauses as literal tuples plus one tautology ``p or not p`` per
    variable that lacks one; returns (clauses, variables)."""
    out: List[Clause] = []
    for c in clauses:
        lits = tuple(dict.fromkeys(int(x) for x in c))
        if not lits:
            raise ValueError("empty clause")
        if 0 in lits:
            raise ValueError("0 is not a literal")
        out.append(lits)
    if not out:
        raise ValueError("at least one clause is needed")
    variables = sorted({abs(x) for c in out for x in c})
    present = {frozenset(c) for c in out}
    for v in variables:
        if frozenset((v, -v)) not in present:
            out.append((v, -v))
    return out, variables


def satisfiable(clauses: Sequence[Sequence[int]]) -> bool:
    """Brute-force satisfiability over all assignments."""
    return satisfying_assignment(clauses) is not None


def _sat_instance(clauses):
    cls, variables = normalize_clauses(clauses)
    m, n = len(cls), len(variables)
    abox: List[Atom] = []
    for v in variables:
        abox.append(Atom("T", (Constant(literal_name(v)),)))
        abox.append(Atom("T", (Constant(literal_name(-v)),)))
    cc = [Constant(f"c{i + 1}") for i in range(m)]
    for i, c in enumerate(cls):
        for lit in c:
            abox.append(Atom("c", (cc[i], Constant(literal_name(lit)))))
        if i + 1 < m:
            abox.append(Atom("r", (cc[i], cc[i + 1])))
    xc = [Variable(f"xc{i + 1}") for i in range(m)]
    xp = [Variable(f"xp{i + 1}") for i in range(m)]
    atoms: List[Atom] = []
    for i in range(m):
        atoms += [Atom("c", (xc[i], xp[i])), Atom("T", (xp[i],))]
        if i + 1 < m:
            atoms.append(Atom("r", (xc[i], xc[i + 1])))
    kb = KnowledgeBase((), tuple(abox))
    return kb, CQ((), tuple(atoms)), cls, m, n


def gen_sat(clauses: Sequence[Sequence[int]], measure: str = "tree_size") -> Fixture:
    """SAT encoding for the Skolemized derivers.

    ``measure="tree_size"`` pairs with the set-semantics deriver sk' and
    ``measure="size"`` with sk; both use the bound 2 + m + (m-1) + n.
    Literals are nonzero integers, negative for negated variables.
    """
    kb, q, cls, m, n = _sat_instance(clauses)
    deriver = "sk'" if measure == "tree_size" else "sk"
    return Fixture(SAT_SK, kb, q, (), 2 + m + (m - 1) + n, satisfiable(cls), deriver, measure)


def gen_sat_cq(clauses: Sequence[Sequence[int]]) -> Fixture:
    """SAT encoding for the CQ deriver and tree size.

    Collecting the 2m-1+n needed assertions with binary C steps takes
    2(2m-1+n)-1 vertices; the tautology and the closing MP add two more, so
    the bound is 4m + 2n - 1.
    """
    kb, q, cls, m, n = _sat_instance(clauses)
    return Fixture(SAT_CQ, kb, q, (), 4 * m + 2 * n - 1, satisfiable(cls), "cq", "tree_size")


def sat_cq_witness(fx: Fixture, assignment: Dict[int, bool]) -> Proof:
    """The tree proof of a satisfiable SAT_CQ fixture for ``assignment``:
    one leaf per needed assertion joined by C, then the tautology
    q -> exists x. q applied with MP."""
    q = fx.query
    abox = set(fx.kb.abox)
    m = sum(1 for a in q.atoms if a.predicate == "c")
    chosen: Dict[Variable, Constant] = {}
    for i in range(m):
        ci = Constant(f"c{i + 1}")
        lits = [a.args[1] for a in fx.kb.abox if a.predicate == "c" and a.args[0] == ci]
        good = [t for t in lits if _true(t.name, assignment)]
        if not good:
            raise ValueError("assignment does not satisfy the clauses")
        chosen[Variable(f"xc{i + 1}")] = ci
        chosen[Variable(f"xp{i + 1}")] = good[0]
    ground = list(dict.fromkeys(a.substitute(chosen) for a in q.atoms))
    assert set(ground) <= abox
    g = ProofGraph()
    cur = g.add_vertex(CQ((), (ground[0],)))
    for a in ground[1:]:
        leaf = g.add_vertex(CQ((), (a,)))
        nxt = g.add_vertex(infer_c(g.labels[cur], g.labels[leaf]))
        g.add_edge([cur, leaf], nxt, C)
        cur = nxt
    taut = infer_t(q.atoms, q.variables())
    tv = g.add_vertex(taut)
    g.add_edge([], tv, T)
    sink = g.add_vertex(q)
    g.add_edge([cur, tv], sink, MP, pi=dict(chosen))
    return Proof(g, sink)


def _true(name: str, assignment: Dict[int, bool]) -> bool:
    if name.startswith("np"):
        return not assignment[int(name[2:])]
    return assignment[int(name[1:])]


def satisfying_assignment(clauses: Sequence[Sequence[int]]) -> Optional[Dict[int, bool]]:
    variables = sorted({abs(x) for c in clauses for x in c})
    for bits in itertools.product((False, True), repeat=len(variables)):
        val = dict(zip(variables, bits))
        if all(any(val[abs(x)] == (x > 0) for x in c) for c in clauses):
            return val
    return None
