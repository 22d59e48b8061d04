import itertools

import pytest

from cqproof.chase import ChaseConfig, entails
from cqproof.deriver_cq import cq_schema_checker
from cqproof.fixtures import (extend_chain, gen_chain, gen_sat, gen_sat_cq, normalize_clauses,
                              sat_cq_witness, satisfiable, satisfying_assignment)
from cqproof.graph import is_tree, tree_size, validate_proof
from cqproof.logic import (Atom, ConceptInclusion, ConceptName, Constant,
                           RoleInclusion, Role)
from cqproof.search import SearchGoal, decide_op, min_measure
from cqproof.syntax import parse_kb, parse_query
from cqproof.treeshaped import is_tree_shaped


def chain(text, n):
    q, answers = parse_query(text)
    return gen_chain(q, n, answers)


def test_chain_structure_unary():
    fx = chain("q(x) :- A(x).", 2)
    c = Constant("c_x")
    assert fx.answer == (c,) and fx.bound == 2 and fx.expected is False
    assert fx.kb.abox == (Atom("A_0", (c,)),)
    assert fx.kb.tbox == (ConceptInclusion(ConceptName("A_0"), ConceptName("A_1")),
                          ConceptInclusion(ConceptName("A_1"), ConceptName("A_2")),
                          ConceptInclusion(ConceptName("A_2"), ConceptName("A")))


def test_chain_zero_and_binary():
    fx = chain("q(x, y) :- R(x, y).", 0)
    assert fx.kb.tbox == (RoleInclusion(Role("R_0"), Role("R")),)
    assert len(fx.kb.abox) == 1
    with pytest.raises(ValueError):
        chain("q(x) :- A(x).", -1)


@pytest.mark.parametrize("n", range(4))
def test_chain_minimum_exceeds_bound(n):
    fx = chain("q(x) :- A(x).", n)
    for measure in ("tree_size", "size"):
        g = SearchGoal(fx.kb, fx.query, fx.answer, "sk", measure)
        assert min_measure(g) == 2 * (n + 1) + 1
        assert not decide_op(g, fx.bound)


def test_chain_extension():
    fx = chain("q(x) :- A(x).", 3)
    ext = extend_chain(fx, parse_kb("B sub A.\nB(c_x)."))
    assert ext.expected is None
    g = SearchGoal(ext.kb, ext.query, ext.answer, "sk", "tree_size")
    assert decide_op(g, ext.bound)


def test_normalize_adds_tautologies():
    cls, variables = normalize_clauses([[1, -2], [2]])
    assert variables == [1, 2]
    assert (1, -1) in cls and (2, -2) in cls
    with pytest.raises(ValueError):
        normalize_clauses([[]])
    with pytest.raises(ValueError):
        normalize_clauses([[0]])


def test_satisfiable_oracle():
    assert satisfiable([[1], [-1, 2]])
    assert not satisfiable([[1], [-1]])
    assert satisfying_assignment([[1], [-1, 2]]) == {1: True, 2: True}


def test_single_variable_sat_fixture():
    fx = gen_sat([[1]])
    # clauses {p1} and the tautology: m = 2, n = 1
    assert fx.bound == 2 + 2 + 1 + 1
    assert fx.expected is True
    assert is_tree_shaped(fx.query)
    assert entails(fx.kb, fx.query, (), ChaseConfig(0))


@pytest.mark.parametrize("measure", ["tree_size", "size"])
@pytest.mark.parametrize("clauses", [[[1]], [[1], [-1]], [[1, 2], [-1], [-2]], [[1, -2], [2]]])
def test_sat_fixture_decision_matches_satisfiability(measure, clauses):
    fx = gen_sat(clauses, measure)
    g = SearchGoal(fx.kb, fx.query, fx.answer, fx.deriver, fx.measure)
    assert decide_op(g, fx.bound) == satisfiable(clauses) == fx.expected


def test_unsat_fixture_still_entailed():
    fx = gen_sat([[1], [-1]])
    assert fx.expected is False
    assert entails(fx.kb, fx.query, (), ChaseConfig(0))


def test_sat_cq_witness():
    clauses = [[1, -2], [2, 3], [-1, -3]]
    fx = gen_sat_cq(clauses)
    assert fx.deriver == "cq" and fx.expected is True
    p = sat_cq_witness(fx, satisfying_assignment(clauses))
    assert validate_proof(p, fx.kb, cq_schema_checker(fx.kb)).ok
    assert is_tree(p)
    assert tree_size(p) <= fx.bound


def test_sat_cq_witness_rejects_bad_assignment():
    fx = gen_sat_cq([[1], [2]])
    with pytest.raises(ValueError):
        sat_cq_witness(fx, {1: False, 2: True})


def test_sat_cq_bound_tight_on_small_inputs():
    for bits in itertools.product((False, True), repeat=2):
        clauses = [[1 if bits[0] else -1], [2 if bits[1] else -2]]
        fx = gen_sat_cq(clauses)
        p = sat_cq_witness(fx, {1: bits[0], 2: bits[1]})
        assert tree_size(p) == fx.bound


def test_tautology_only_sat_fixture():
    fx = gen_sat([[1, -1]])
    assert fx.bound == 4 and fx.expected is True


@pytest.mark.parametrize("n", range(4))
def test_chain_proof_depth(n):
    from cqproof.graph import depth
    from cqproof.search import min_proof
    fx = chain("q(x) :- A(x).", n)
    p = min_proof(SearchGoal(fx.kb, fx.query, fx.answer))
    assert depth(p) == n + 1


def test_generated_fixtures_are_entailed():
    fixtures = [chain("q(x, y) :- R(x, y), A(y).", 2), gen_sat([[1, 2], [-2]]),
                gen_sat_cq([[1], [-1, 2]])]
    for fx in fixtures:
        assert entails(fx.kb, fx.query, fx.answer, ChaseConfig(1))
