import random

import pytest
from hypothesis import given, settings, strategies as st

from cqproof.deriver_sk import sk_schema_checker
from cqproof.graph import (Proof, ProofGraph, check_homomorphism, depth, is_tree, prune_to, size,
                           tree_size, unravel, validate_proof)
from cqproof.logic import Atom, ConceptInclusion, ConceptName, Constant, KnowledgeBase

from helpers import example1, sk_example_proof


class AnyRule:
    """Checker that accepts every step and grounds every leaf."""

    def admissible(self, premises, conclusion, rule="", params=None):
        return True

    def is_grounded(self, label):
        return True


def test_example_proof_measures():
    p = sk_example_proof()
    assert size(p) == 11
    assert tree_size(p) == 39
    assert depth(p) == 5
    assert not is_tree(p)


def test_example_proof_valid_and_unravels():
    kb, _, _ = example1()
    p = sk_example_proof()
    assert validate_proof(p, kb, sk_schema_checker(kb)).ok
    t, hom = unravel(p.graph, p.sink)
    assert size(t) == 39 and is_tree(t)
    assert check_homomorphism(t, p.graph, hom)
    assert validate_proof(t, kb, sk_schema_checker(kb)).ok


def test_two_sinks_rejected():
    g = ProofGraph()
    u = g.add_vertex("u")
    v = g.add_vertex("v")
    w = g.add_vertex("w")
    g.add_edge([u], v)
    rep = validate_proof(Proof(g, v), None, AnyRule())
    assert not rep.ok and not rep.single_sink
    assert w in g.sinks()


def test_cycle_and_double_incoming_rejected():
    g = ProofGraph()
    u, v, s = g.add_vertex("u"), g.add_vertex("v"), g.add_vertex("s")
    g.add_edge([u], v)
    g.add_edge([v], u)
    g.add_edge([v], s)
    assert not validate_proof(Proof(g, s), None, AnyRule()).acyclic
    h = ProofGraph()
    a, b, t = h.add_vertex("a"), h.add_vertex("b"), h.add_vertex("t")
    h.add_edge([a], t)
    h.add_edge([b], t)
    assert not validate_proof(Proof(h, t), None, AnyRule()).at_most_one_incoming


def test_relabelled_axiom_not_grounded():
    kb, _, _ = example1()
    p = sk_example_proof()
    g = p.graph.copy()
    leaf = next(v for v in g.leaves() if g.labels[v] in kb.tbox)
    g.labels[leaf] = ConceptInclusion(ConceptName("Zed"), ConceptName("B"))
    rep = validate_proof(Proof(g, p.sink), kb, sk_schema_checker(kb))
    assert not rep.grounded


def test_default_grounding_uses_theory():
    kb = KnowledgeBase((), (Atom("A", (Constant("a"),)),))
    g = ProofGraph()
    g.add_vertex(Atom("A", (Constant("a"),)))
    assert validate_proof(Proof(g, 0), kb, object()).ok
    g.labels[0] = Atom("A", (Constant("b"),))
    assert not validate_proof(Proof(g, 0), kb, object()).grounded


def _diamond():
    g = ProofGraph()
    leaf = g.add_vertex("l")
    left = g.add_vertex("x")
    right = g.add_vertex("y")
    top = g.add_vertex("t")
    g.add_edge([leaf], left)
    g.add_edge([leaf], right)
    g.add_edge([left, right], top)
    return g, top


def test_diamond_unravel():
    g, top = _diamond()
    p = Proof(g, top)
    assert size(p) == 4 and tree_size(p) == 5 and depth(p) == 2
    t, hom = unravel(g, top)
    assert size(t) == 5 and is_tree(t) and depth(t) == 2
    assert sorted(g.labels[hom[v]] for v in t.graph.vertices) == ["l", "l", "t", "x", "y"]
    assert check_homomorphism(t, g, hom)


def test_homomorphism_rejects_bad_maps():
    g, top = _diamond()
    t, hom = unravel(g, top)
    broken = dict(hom)
    root = t.sink
    broken[root] = 0
    assert not check_homomorphism(t, g, broken)
    partial = {k: v for k, v in hom.items() if k != root}
    assert not check_homomorphism(t, g, partial)


def test_unravel_rejects_cycle():
    g = ProofGraph()
    u, v = g.add_vertex("u"), g.add_vertex("v")
    g.add_edge([u], v)
    g.add_edge([v], u)
    with pytest.raises(ValueError):
        unravel(g, v)


def test_zero_premise_edge_counts_for_depth():
    g = ProofGraph()
    t = g.add_vertex("taut")
    g.add_edge([], t)
    assert depth(Proof(g, t)) == 0 and tree_size(Proof(g, t)) == 1


def test_prune_to_drops_unrelated_vertices():
    g, top = _diamond()
    extra = g.add_vertex("z")
    g.add_edge([extra], g.add_vertex("zz"))
    p = prune_to(g, top)
    assert size(p) == 4 and tree_size(p) == 5


def test_edge_endpoint_must_exist():
    g = ProofGraph()
    g.add_vertex("a")
    with pytest.raises(ValueError):
        g.add_edge([0], 5)


def _random_dag(rng, n):
    g = ProofGraph()
    for i in range(n):
        g.add_vertex(f"v{i}")
    for i in range(1, n):
        if rng.random() < 0.8:
            k = rng.randint(1, min(3, i))
            g.add_edge(rng.sample(range(i), k), i)
    return g


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 12))
def test_unravel_preserves_measures(seed, n):
    g = _random_dag(random.Random(seed), n)
    sink = n - 1
    p = prune_to(g, sink)
    t, hom = unravel(p.graph, p.sink)
    assert tree_size(p) == size(t) == tree_size(t)
    assert depth(p) == depth(t)
    assert is_tree(t)
    assert check_homomorphism(t, p.graph, hom)
    assert size(p) <= tree_size(p)
