import random

import pytest

from cqproof.chase import ChaseConfig, ResourceLimitExceeded, chase, entails
from cqproof.deriver_sk import (CS, ES, ES_PRIME, MPS, InferenceError, es_admissible, infer_cs,
                                infer_es, infer_es_prime, infer_mps, sk_schema_checker,
                                witness_proof)
from cqproof.graph import validate_proof
from cqproof.logic import (Atom, ConceptInclusion, ConceptName, Constant, CQ, Conjunction,
                           ExistentialRule, KnowledgeBase, SkolemTerm, Variable, skolemize)

from helpers import example1, random_goal

b = Constant("b")
x, y, u = Variable("x"), Variable("y"), Variable("u")


def at(p, *args):
    return Atom(p, tuple(args))


def test_chase_example_atoms():
    kb, q, answers = example1()
    res = chase(kb, cfg=ChaseConfig(2))
    f = SkolemTerm("fn_2_u", b)
    expected = {at("B", b), at("P", b, f), at("R", f, b), at("S", f, SkolemTerm("fn_3_u", f)),
                at("T", b, SkolemTerm("fn_1_u", b))}
    assert expected <= res.as_set()
    assert entails(kb, q, answers, ChaseConfig(2))


def test_chase_empty_tbox_is_abox():
    abox = (at("A", b), at("R", b, Constant("c")))
    res = chase(KnowledgeBase((), abox))
    assert set(res) == set(abox) and not res.witness


def test_chase_respects_depth_bound():
    # R(x, y) -> exists z. R(y, z): an infinite chain cut at the bound
    rule = ExistentialRule((at("R", x, y),), (at("R", y, Variable("z")),))
    kb = KnowledgeBase((), (at("R", Constant("a"), b),))
    res = chase(kb, rules=[skolemize(rule, 0)], cfg=ChaseConfig(3))
    assert len(res) == 4 and res.hit_depth_bound
    assert max(res.round_of.values()) == 3


def test_chase_fact_cap():
    rule = ExistentialRule((at("R", x, y),), (at("R", y, Variable("z")),))
    kb = KnowledgeBase((), (at("R", Constant("a"), b),))
    with pytest.raises(ResourceLimitExceeded):
        chase(kb, rules=[skolemize(rule, 0)], cfg=ChaseConfig(50, fact_cap=10))


def test_infer_mps():
    kb, _, _ = example1()
    rule = kb.skolem_rules()[2]  # B sub exists P
    (head,) = infer_mps([at("B", b)], rule, {rule.body[0].args[0]: b})
    assert head == at("P", b, SkolemTerm("fn_2_u", b))
    with pytest.raises(InferenceError):
        infer_mps([at("A", b)], rule, {rule.body[0].args[0]: b})


def test_infer_cs():
    c = infer_cs([at("A", b), at("B", b)])
    assert isinstance(c, Conjunction) and len(c.atoms) == 2
    with pytest.raises(InferenceError):
        infer_cs([])
    with pytest.raises(InferenceError):
        infer_cs([at("A", x)])


def test_infer_es_positional_vs_set():
    target = CQ((), (at("A", x), at("A", y)))
    single = at("A", b)
    with pytest.raises(InferenceError):
        infer_es(single, target, {x: b, y: b})
    assert infer_es_prime(single, target, {x: b, y: b}) == target
    assert not es_admissible(single, target)
    assert es_admissible(single, target, prime=True)
    pair = Conjunction((at("A", b), at("A", b)))
    assert es_admissible(pair, target)


def test_checker_rejections():
    kb, _, _ = example1()
    chk = sk_schema_checker(kb)
    ax = kb.tbox[2]
    f = SkolemTerm("fn_2_u", b)
    assert chk.admissible([at("B", b), ax], at("P", b, f), MPS)
    assert not chk.admissible([at("B", b), ax], at("P", b, SkolemTerm("fn_3_u", b)), MPS)
    assert not chk.admissible([at("B", b), kb.tbox[0]], at("P", b, f), MPS)
    foreign = ConceptInclusion(ConceptName("B"), ConceptName("Z"))
    assert not chk.admissible([at("B", b), foreign], at("Z", b), MPS)
    assert chk.admissible([at("B", b)], Conjunction((at("B", b),)), CS)
    assert not chk.admissible([at("B", x)], Conjunction((at("B", x),)), CS)
    target = CQ((), (at("B", x), at("B", y)))
    assert not chk.admissible([at("B", b)], target, ES)
    assert not chk.admissible([at("B", b)], target, ES_PRIME)
    assert sk_schema_checker(kb, prime=True).admissible([at("B", b)], target, ES_PRIME)


def test_grounding():
    kb, _, _ = example1()
    chk = sk_schema_checker(kb)
    assert chk.is_grounded(at("B", b)) and chk.is_grounded(kb.tbox[0])
    assert not chk.is_grounded(at("A", b))


def test_witness_proof_example():
    kb, q, answers = example1()
    p = witness_proof(kb, q, answers)
    assert validate_proof(p, kb, sk_schema_checker(kb)).ok
    assert not p.minimal


@pytest.mark.parametrize("seed", range(20))
def test_witness_proofs_valid_on_random_goals(seed):
    goal = random_goal(random.Random(seed))
    for prime in (False, True):
        p = witness_proof(goal.kb, goal.query, goal.answer, ChaseConfig(goal.depth_bound), prime)
        assert validate_proof(p, goal.kb, sk_schema_checker(goal.kb, prime)).ok


def test_witness_proof_not_entailed():
    kb, q, _ = example1()
    with pytest.raises(InferenceError):
        witness_proof(kb, q, (Constant("zz"),), ChaseConfig(2))
