import pytest

from cqproof.deriver_cq import (C, E, MP, T, InferenceError, cq_schema_checker, cq_to_sk, infer_c,
                                infer_e, infer_mp, infer_t, size_bound_bwd, size_bound_fwd,
                                sk_to_cq)
from cqproof.deriver_sk import sk_schema_checker
from cqproof.graph import Proof, ProofGraph, is_tree, size, unravel, validate_proof
from cqproof.logic import (Atom, Constant, CQ, SkolemTerm, Variable, cq_isomorphic, same_label,
                           translate_axiom)

from helpers import example1, cq_example_proof, sk_example_proof

a, b = Constant("a"), Constant("b")
x, y, z = Variable("x"), Variable("y"), Variable("z")


def at(p, *args):
    return Atom(p, tuple(args))


def bq(*atoms):
    return CQ((), atoms)


def test_infer_t_abstracts_chosen_variables():
    rule = infer_t([at("R", x, y), at("T", y, z)], [y])
    assert rule.body == (at("R", x, y), at("T", y, z))
    (h1, h2) = rule.head
    assert h1.args[0] == x and h2.args[1] == z
    assert h1.args[1] == h2.args[0] != y
    assert list(rule.existential_vars) == [h1.args[1]]
    with pytest.raises(InferenceError):
        infer_t([at("R", x, y)], [z])


def test_infer_t_without_abstraction_is_identity():
    rule = infer_t([at("S", x, z)])
    assert rule.body == rule.head and not rule.existential_vars


def test_infer_e():
    q = infer_e(bq(at("P", b, a), at("A", b)), [b])
    v = q.atoms[0].args[0]
    assert isinstance(v, Variable) and q.atoms == (at("P", v, a), at("A", v))
    with pytest.raises(InferenceError):
        infer_e(bq(at("A", b)), [a])


def test_infer_c_renames_apart():
    q = infer_c(bq(at("P", b, x)), bq(at("S", x, z)))
    assert len(q.atoms) == 2
    assert q.atoms[0] == at("P", b, x)
    assert q.atoms[1].args[0] != x and q.atoms[1].args[1] == z


def test_infer_mp_example():
    kb, _, _ = example1()
    rule = translate_axiom(kb.tbox[2])  # B sub exists P
    q = infer_mp(bq(at("B", b)), rule, {rule.body[0].args[0]: b})
    assert len(q.atoms) == 1 and q.atoms[0].predicate == "P" and q.atoms[0].args[0] == b
    kept = infer_mp(bq(at("B", b)), rule, {rule.body[0].args[0]: b}, drop=[])
    assert len(kept.atoms) == 2
    with pytest.raises(InferenceError):
        infer_mp(bq(at("A", b)), rule, {rule.body[0].args[0]: b})


def test_example_cq_proof_validates():
    kb, _, _ = example1()
    p = cq_example_proof()
    rep = validate_proof(p, kb, cq_schema_checker(kb))
    assert rep.ok, rep.errors
    assert size(p) == 18 and is_tree(p)


def test_example_cq_proof_translates_to_skolem_atoms():
    kb, _, _ = example1()
    sk = cq_to_sk(cq_example_proof(), kb)
    assert validate_proof(sk, kb, sk_schema_checker(kb)).ok
    f = SkolemTerm("fn_2_u", b)
    atoms = {l for l in sk.graph.labels.values() if isinstance(l, Atom)}
    assert {at("P", b, f), at("S", f, SkolemTerm("fn_3_u", f)), at("R", f, b),
            at("T", b, SkolemTerm("fn_1_u", b))} <= atoms


def test_skolem_proof_translates_back():
    kb, q, answers = example1()
    p = sk_example_proof()
    cq = sk_to_cq(p, kb)
    assert validate_proof(cq, kb, cq_schema_checker(kb)).ok
    assert same_label(cq.conclusion, p.conclusion)
    assert size(cq) <= size_bound_fwd(p, kb)
    tree, _ = unravel(p.graph, p.sink)
    cq_tree = sk_to_cq(tree, kb)
    assert is_tree(cq_tree)
    back = cq_to_sk(cq_tree, kb)
    assert validate_proof(back, kb, sk_schema_checker(kb)).ok
    assert size(back) <= size_bound_bwd(cq_tree, kb)


def test_wrong_substitution_rejected():
    kb, _, _ = example1()
    chk = cq_schema_checker(kb)
    ax = kb.tbox[2]
    rule = translate_axiom(ax)
    good = infer_mp(bq(at("B", b)), rule, {rule.body[0].args[0]: b})
    assert chk.admissible([bq(at("B", b)), ax], good, MP)
    wrong = bq(at("P", a, good.atoms[0].args[1]))
    assert not chk.admissible([bq(at("B", b)), ax], wrong, MP, {"pi": {rule.body[0].args[0]: a}})


def test_conjunction_must_rename_apart():
    kb, _, _ = example1()
    chk = cq_schema_checker(kb)
    q1, q2 = bq(at("P", b, x)), bq(at("S", x, z))
    assert chk.admissible([q1, q2], infer_c(q1, q2), C)
    assert not chk.admissible([q1, q2], bq(at("P", b, x), at("S", x, z)), C)


def test_tautology_and_exists_admissibility():
    kb, _, _ = example1()
    chk = cq_schema_checker(kb)
    assert chk.admissible([], infer_t([at("R", x, y)], [x]), T)
    from cqproof.logic import ExistentialRule
    bogus = ExistentialRule((at("R", x, y),), (at("R", y, x),))
    assert not chk.admissible([], bogus, T)
    assert chk.admissible([bq(at("B", b))], infer_e(bq(at("B", b)), [b]), E)
    assert not chk.admissible([bq(at("B", b))], bq(at("B", a)), E)


def test_grounding_of_query_leaves():
    kb, _, _ = example1()
    chk = cq_schema_checker(kb)
    assert chk.is_grounded(bq(at("B", b)))
    assert not chk.is_grounded(bq(at("B", b), at("B", b), at("A", b)))
    g = ProofGraph()
    g.add_vertex(bq(at("A", b)))
    assert not validate_proof(Proof(g, 0), kb, chk).grounded


def test_translation_rejects_invalid_input():
    kb, _, _ = example1()
    g = ProofGraph()
    g.add_vertex(bq(at("A", b)))
    with pytest.raises(InferenceError):
        cq_to_sk(Proof(g, 0), kb)
    assert cq_isomorphic(bq(at("B", x)), bq(at("B", y)))
