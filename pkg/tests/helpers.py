"""Random instance generators and shared fixtures for the test suite."""
from __future__ import annotations

import random
from importlib import resources
from typing import List, Optional, Tuple

from cqproof.chase import ChaseConfig, chase
from cqproof.logic import (Atom, ConceptInclusion, ConceptName, Constant, CQ, Exists,
                           KnowledgeBase, Role, RoleInclusion, SkolemTerm, Variable)
from cqproof.search import SearchGoal, Structure
from cqproof.syntax import parse_kb, parse_query
from cqproof.temporal import (And, BoxMinus, BoxPlus, CQLeaf, Interval, MTCQ, Next, Or, Prev,
                              Since, TemporalABox, TemporalFact, Until)

CONCEPTS = ("A", "B", "C", "D")
ROLES = ("P", "R", "S")
INDIVIDUALS = ("a", "b", "c")
DEPTH = 2

# criterion number -> PASS/FAIL line, filled by the acceptance tests
ACCEPTANCE_RESULTS = {}


def example1() -> Tuple[KnowledgeBase, CQ, Tuple[Constant, ...]]:
    data = resources.files("cqproof") / "data"
    kb = parse_kb((data / "example1.kb").read_text(encoding="utf-8"))
    q, answers = parse_query((data / "example1.q").read_text(encoding="utf-8"))
    return kb, q, answers


def example1_text() -> Tuple[str, str]:
    data = resources.files("cqproof") / "data"
    return ((data / "example1.kb").read_text(encoding="utf-8"),
            (data / "example1.q").read_text(encoding="utf-8"))


def _role(rng: random.Random) -> Role:
    return Role(rng.choice(ROLES), rng.random() < 0.3)


def _basic(rng: random.Random):
    return ConceptName(rng.choice(CONCEPTS)) if rng.random() < 0.5 else Exists(_role(rng))


def random_tbox(rng: random.Random, max_axioms: int = 8) -> List:
    out = []
    for _ in range(rng.randint(0, max_axioms)):
        if rng.random() < 0.2:
            r1, r2 = _role(rng), _role(rng)
            if r1.name != r2.name:
                out.append(RoleInclusion(r1, r2))
        else:
            lhs, rhs = _basic(rng), _basic(rng)
            if lhs != rhs:
                out.append(ConceptInclusion(lhs, rhs))
    return list(dict.fromkeys(out))


def random_abox(rng: random.Random, max_atoms: int = 6) -> List[Atom]:
    out = []
    for _ in range(rng.randint(1, max_atoms)):
        if rng.random() < 0.5:
            out.append(Atom(rng.choice(CONCEPTS), (Constant(rng.choice(INDIVIDUALS)),)))
        else:
            out.append(Atom(rng.choice(ROLES), (Constant(rng.choice(INDIVIDUALS)),
                                                Constant(rng.choice(INDIVIDUALS)))))
    return list(dict.fromkeys(out))


def random_entailed_query(rng: random.Random, kb: KnowledgeBase, max_atoms: int = 5,
                          depth: int = DEPTH) -> Optional[Tuple[CQ, Tuple[Constant, ...]]]:
    """A connected query read off the bounded chase, so it is entailed.

    Skolem terms become variables, constants become variables with
    probability 1/2 and some of those are answer variables."""
    model = list(chase(kb, cfg=ChaseConfig(depth)).atoms)
    if not model:
        return None
    derived = [a for a in model if a not in set(kb.abox)]
    picked = [rng.choice(derived if derived and rng.random() < 0.8 else model)]
    for _ in range(rng.randint(1, max_atoms) - 1):
        terms = {t for a in picked for t in a.args}
        near = [a for a in model if a not in picked and terms & set(a.args)]
        if not near:
            break
        picked.append(rng.choice(near))
    naming = {}
    answers = {}
    for a in picked:
        for t in a.args:
            if t in naming:
                continue
            if isinstance(t, SkolemTerm) or rng.random() < 0.5:
                v = Variable(f"x{len(naming)}")
                naming[t] = v
                if isinstance(t, Constant) and rng.random() < 0.5:
                    answers[v] = t
            else:
                naming[t] = t
    atoms = tuple(Atom(a.predicate, tuple(naming[t] for t in a.args)) for a in picked)
    return CQ(tuple(answers), atoms), tuple(answers.values())


def random_goal(rng: random.Random, deriver: str = "sk", measure: str = "tree_size",
                max_query: int = 5, max_axioms: int = 8, max_abox: int = 6) -> SearchGoal:
    while True:
        kb = KnowledgeBase(tuple(random_tbox(rng, max_axioms)), tuple(random_abox(rng, max_abox)))
        made = random_entailed_query(rng, kb, max_query)
        if made is None:
            continue
        q, answers = made
        goal = SearchGoal(kb, q, answers, deriver, measure, depth_bound=DEPTH)
        if Structure.build(goal).entailed():
            return goal


# ---------------------------------------------------------------------------
# Temporal
# ---------------------------------------------------------------------------

T_CONCEPTS = ("A", "B", "C")


def random_interval(rng: random.Random, lo: int = -8, hi: int = 8, inf: float = 0.0) -> Interval:
    a, b = sorted(rng.randint(lo, hi) for _ in range(2))
    left = -float("inf") if rng.random() < inf else a
    right = float("inf") if rng.random() < inf else b
    return Interval(left, right)


def random_tabox(rng: random.Random, max_facts: int = 5, inf: float = 0.1) -> TemporalABox:
    facts = []
    for _ in range(rng.randint(1, max_facts)):
        atom = Atom(rng.choice(T_CONCEPTS), (Constant("a"),))
        facts.append(TemporalFact(atom, random_interval(rng, inf=inf)))
    return TemporalABox(tuple(facts))


def _op_interval(rng: random.Random) -> Interval:
    a = rng.randint(0, 2)
    return Interval(a, a + rng.randint(0, 2))


def random_formula(rng: random.Random, depth: int = 3, leaf_concepts=T_CONCEPTS):
    if depth == 0 or rng.random() < 0.25:
        return CQLeaf(CQ((), (Atom(rng.choice(leaf_concepts), (Constant("a"),)),)))
    op = rng.choice(("and", "or", "boxp", "boxm", "until", "since", "next", "prev"))
    sub = lambda: random_formula(rng, depth - 1, leaf_concepts)  # noqa: E731
    if op == "and":
        return And(sub(), sub())
    if op == "or":
        return Or(sub(), sub())
    if op == "boxp":
        return BoxPlus(_op_interval(rng), sub())
    if op == "boxm":
        return BoxMinus(_op_interval(rng), sub())
    if op == "next":
        return Next(sub())
    if op == "prev":
        return Prev(sub())
    iv = _op_interval(rng)
    return (Until if op == "until" else Since)(iv, sub(), sub())


def boolean_mtcq(f) -> MTCQ:
    return MTCQ((), f)


# ---------------------------------------------------------------------------
# A hand-built CQ-deriver proof of the example query, vertex by vertex
# ---------------------------------------------------------------------------

def cq_example_proof():
    """Proof of q(b) with MP, T, E steps over the CQ deriver (18 vertices)."""
    from cqproof.deriver_cq import E, MP, T, infer_t
    from cqproof.graph import Proof, ProofGraph

    kb, q, answers = example1()
    A = lambda p, *args: Atom(p, tuple(args))  # noqa: E731
    b = Constant("b")
    x, x1, x2, y, y1, z, z1 = (Variable(n) for n in ("x", "x1", "x2", "y", "y1", "z", "z1"))

    def cq(*atoms):
        return CQ((), atoms)

    g = ProofGraph()
    bb = g.add_vertex(A("B", b))
    ax = {i: g.add_vertex(kb.tbox[i]) for i in range(1, 5)}
    v3 = g.add_vertex(cq(A("P", b, x2)))
    g.add_edge([bb, ax[2]], v3, MP)
    v4 = g.add_vertex(cq(A("P", b, x2), A("S", x2, z1)))
    g.add_edge([v3, ax[3]], v4, MP)
    v5 = g.add_vertex(cq(A("P", b, x2), A("S", x2, z1), A("R", x2, b)))
    g.add_edge([v4, ax[4]], v5, MP)
    v6 = g.add_vertex(cq(A("P", b, x2), A("S", x2, z1), A("R", x2, b), A("T", b, z)))
    g.add_edge([v5, ax[1]], v6, MP)
    t1 = g.add_vertex(infer_t([A("R", x, y), A("T", y, z)], [y]))
    g.add_edge([], t1, T)
    v7 = g.add_vertex(cq(A("P", b, x2), A("S", x2, z1), A("R", x2, b), A("T", b, z),
                         A("R", x2, y1), A("T", y1, z)))
    g.add_edge([v6, t1], v7, MP)
    t2 = g.add_vertex(infer_t([A("S", x, z)], []))
    g.add_edge([], t2, T)
    v8 = g.add_vertex(g.labels[v7])
    g.add_edge([v7, t2], v8, MP)
    t3 = g.add_vertex(infer_t([A("R", x2, y1), A("S", x2, z1)], [x2]))
    g.add_edge([], t3, T)
    v9 = g.add_vertex(cq(A("P", b, x2), A("S", x2, z1), A("R", x2, b), A("T", b, z),
                         A("R", x1, y1), A("T", y1, z), A("S", x1, z1)))
    g.add_edge([v8, t3], v9, MP)
    t4 = g.add_vertex(infer_t([A("R", x2, y)], [x2]))
    g.add_edge([], t4, T)
    v10 = g.add_vertex(cq(A("P", b, x2), A("S", x2, z1), A("R", x, b), A("T", b, z),
                          A("R", x1, y1), A("T", y1, z), A("S", x1, z1)))
    g.add_edge([v9, t4], v10, MP)
    v11 = g.add_vertex(q.instantiate(answers))
    g.add_edge([v10], v11, E)
    return Proof(g, v11)


def sk_example_proof():
    """The minimal tree-size Skolemized proof of the example query."""
    from cqproof.search import min_tree_size
    kb, q, answers = example1()
    return min_tree_size(SearchGoal(kb, q, answers))
