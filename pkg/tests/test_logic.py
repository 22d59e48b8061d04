import itertools

import pytest
from hypothesis import given, settings, strategies as st

from cqproof.logic import (Atom, ConceptInclusion, ConceptName, Constant, CQ, Exists,
                           ExistentialRule, KnowledgeBase, Role, RoleInclusion, SkolemRule,
                           SkolemTerm, Variable, abox_to_query, canonicalize_cq, cq_isomorphic,
                           deskolemize, freeze_cq, match, skolemize, term_depth, translate_axiom)

from helpers import example1

a, b, c = Constant("a"), Constant("b"), Constant("c")
x, y, z, w = Variable("x"), Variable("y"), Variable("z"), Variable("w")


def atom(p, *args):
    return Atom(p, tuple(args))


# -- terms and atoms ---------------------------------------------------------

def test_identifiers_are_checked():
    with pytest.raises(ValueError):
        Constant("")
    with pytest.raises(ValueError):
        Variable("x-y")


def test_atom_arity_limited():
    with pytest.raises(ValueError):
        Atom("P", (a, b, c))


def test_skolem_term_depth():
    assert term_depth(b) == 0
    assert term_depth(SkolemTerm("f", SkolemTerm("g", b))) == 2


# -- axiom translation -------------------------------------------------------

def test_role_inclusion_with_inverse_swaps_arguments():
    r = translate_axiom(RoleInclusion(Role("P"), Role("R", True)))
    (body,), (head,) = r.body, r.head
    assert body.predicate == "P" and head.predicate == "R"
    assert head.args == (body.args[1], body.args[0])


def test_concept_name_inclusion():
    r = translate_axiom(ConceptInclusion(ConceptName("A"), ConceptName("B")))
    assert r.body[0].predicate == "A" and r.head[0].predicate == "B"
    assert r.body[0].args == r.head[0].args
    assert not r.existential_vars


def test_inverse_exists_to_exists():
    r = translate_axiom(ConceptInclusion(Exists(Role("P", True)), Exists(Role("S"))))
    (body,), (head,) = r.body, r.head
    assert body.predicate == "P" and head.predicate == "S"
    assert head.args[0] == body.args[1]
    assert head.args[1] in r.existential_vars


def test_skolemize_matches_named_function():
    ax = ConceptInclusion(Exists(Role("P", True)), Exists(Role("S")))
    sr = skolemize(translate_axiom(ax), 3)
    (head,) = sr.head
    assert isinstance(head.args[1], SkolemTerm)
    assert head.args[1].function == "fn_3_u"
    assert head.args[1].argument == head.args[0] == sr.body[0].args[1]


def test_skolemize_without_existentials_keeps_head():
    r = translate_axiom(ConceptInclusion(ConceptName("A"), ConceptName("B")))
    assert skolemize(r, 0).head == r.head


def test_example_kb_skolem_functions_distinct():
    kb, _, _ = example1()
    names = [t.function for r in kb.skolem_rules() for h in r.head for t in h.args
             if isinstance(t, SkolemTerm)]
    assert len(names) == len(set(names)) == 4


SHAPES = [
    ConceptInclusion(ConceptName("A"), ConceptName("B")),
    ConceptInclusion(ConceptName("A"), Exists(Role("R"))),
    ConceptInclusion(ConceptName("A"), Exists(Role("R", True))),
    ConceptInclusion(Exists(Role("R")), ConceptName("A")),
    ConceptInclusion(Exists(Role("R", True)), ConceptName("A")),
    ConceptInclusion(Exists(Role("R")), Exists(Role("S", True))),
    RoleInclusion(Role("P"), Role("R")),
    RoleInclusion(Role("P"), Role("R", True)),
    RoleInclusion(Role("P", True), Role("R")),
]


@pytest.mark.parametrize("ax", SHAPES, ids=str)
def test_skolemize_round_trip(ax):
    r = translate_axiom(ax)
    back = deskolemize(skolemize(r, 7))
    assert len(back.body) == len(r.body) and len(back.head) == len(r.head)
    assert len(back.existential_vars) == len(r.existential_vars)
    # same rule up to renaming: compare the body+head pattern with head vars distinguished
    def shape(rule):
        order = list(dict.fromkeys(v for at in rule.body + rule.head for v in at.variables()))
        ren = {v: Variable(f"v{i}") for i, v in enumerate(order)}
        return [at.substitute(ren) for at in rule.body], [at.substitute(ren) for at in rule.head]
    assert shape(back) == shape(r)


# -- canonical forms ---------------------------------------------------------

def test_canonical_renaming_invariant():
    q1 = CQ((), (atom("P", b, z),))
    q2 = CQ((), (atom("P", b, w),))
    assert canonicalize_cq(q1) == canonicalize_cq(q2)


def test_canonical_atom_order_irrelevant():
    q1 = CQ((), (atom("P", x, y), atom("A", x)))
    q2 = CQ((), (atom("A", x), atom("P", x, y)))
    assert canonicalize_cq(q1) == canonicalize_cq(q2)


def test_canonical_keeps_distinct_variables():
    q = CQ((), (atom("P", b, z), atom("P", b, w)))
    cq = canonicalize_cq(q)
    assert len(cq.variables()) == 2 and len(cq.atoms) == 2


def test_canonical_keeps_answer_variables_and_constants():
    q = CQ((x,), (atom("R", x, y), atom("A", b)))
    cq = canonicalize_cq(q)
    assert cq.answer_vars == (x,)
    assert b in cq.constants()


var_names = st.sampled_from(["x", "y", "z", "u", "v"])
preds = st.sampled_from([("A", 1), ("B", 1), ("P", 2), ("R", 2)])


@st.composite
def cqs(draw, max_atoms=5):
    atoms = []
    for _ in range(draw(st.integers(1, max_atoms))):
        p, ar = draw(preds)
        args = tuple(Variable(draw(var_names)) if draw(st.booleans())
                     else Constant(draw(st.sampled_from(["a", "b"]))) for _ in range(ar))
        atoms.append(Atom(p, args))
    return CQ((), tuple(atoms))


@settings(max_examples=150, deadline=None)
@given(cqs(), st.permutations(["x", "y", "z", "u", "v"]))
def test_canonical_idempotent_and_rename_invariant(q, perm):
    ren = {Variable(o): Variable(n + "_r") for o, n in zip(["x", "y", "z", "u", "v"], perm)}
    renamed = CQ((), tuple(at.substitute(ren) for at in q.atoms))
    c1 = canonicalize_cq(q)
    assert canonicalize_cq(c1) == c1
    assert canonicalize_cq(renamed) == c1
    assert cq_isomorphic(q, renamed)


@settings(max_examples=100, deadline=None)
@given(cqs(max_atoms=4))
def test_freeze_then_abstract_is_identity_up_to_renaming(q):
    frozen = freeze_cq(q, ())
    back = abox_to_query(frozen, list(q.constants()))
    assert canonicalize_cq(back) == canonicalize_cq(q)


# -- matching ----------------------------------------------------------------

def test_match_examples():
    f = SkolemTerm("f", b)
    h = SkolemTerm("h", b)
    assert match([atom("P", x, y)], [atom("P", b, f)]) == [{x: b, y: f}]
    assert match([atom("A", x)], [atom("B", b)]) == []
    assert match([atom("R", x, y), atom("T", y, z)], [atom("R", f, b), atom("T", b, h)]) == [
        {x: f, y: b, z: h}]


def _brute_match(pattern, facts):
    vars_ = list(dict.fromkeys(v for p in pattern for v in p.variables()))
    terms = list(dict.fromkeys(t for f in facts for t in f.args))
    fs = set(facts)
    out = []
    for combo in itertools.product(terms, repeat=len(vars_)):
        sub = dict(zip(vars_, combo))
        if all(p.substitute(sub) in fs for p in pattern):
            out.append(sub)
    return out


ground_atoms = st.builds(
    lambda p, s, t: Atom(p[0], (s,) if p[1] == 1 else (s, t)),
    preds, st.sampled_from([a, b, c, SkolemTerm("f", a)]), st.sampled_from([a, b, c]))
pattern_atoms = st.builds(
    lambda p, s, t: Atom(p[0], (s,) if p[1] == 1 else (s, t)),
    preds, st.sampled_from([x, y, z, a]), st.sampled_from([x, y, z, b]))


@settings(max_examples=200, deadline=None)
@given(st.lists(pattern_atoms, min_size=1, max_size=4), st.lists(ground_atoms, max_size=12))
def test_match_sound_and_complete(pattern, facts):
    got = match(pattern, facts)
    want = _brute_match(pattern, facts)
    key = lambda s: sorted((k.name, str(v)) for k, v in s.items())  # noqa: E731
    assert sorted(map(key, got)) == sorted(map(key, want))
    assert len({tuple(key(s)) for s in got}) == len(got)


# -- freezing ----------------------------------------------------------------

def test_freeze_examples():
    q = CQ((x,), (atom("P", x, z),))
    (fact,) = freeze_cq(q, (b,))
    assert fact.args[0] == b and isinstance(fact.args[1], Constant) and fact.args[1] != b
    ground = CQ((), (atom("A", a),))
    assert freeze_cq(ground, ()) == [atom("A", a)]
    with pytest.raises(ValueError):
        freeze_cq(q, ())


def test_freeze_example_query():
    _, q, answers = example1()
    frozen = freeze_cq(q, answers)
    consts = {t for f in frozen for t in f.args}
    assert len(frozen) == 7 and len(consts) == 8 and Constant("b") in consts


def test_abox_to_query_examples():
    assert abox_to_query([atom("B", b)], [b]).atoms == (atom("B", b),)
    q = abox_to_query([atom("P", b, c)], [b])
    assert q.atoms[0].args[0] == b and isinstance(q.atoms[0].args[1], Variable)


def test_kb_rejects_non_ground_abox():
    with pytest.raises(ValueError):
        KnowledgeBase((), (atom("A", x),))


def test_existential_rule_structure():
    r = ExistentialRule((atom("A", x),), (atom("R", x, y),))
    assert list(r.frontier_vars) == [x] and list(r.existential_vars) == [y]
    with pytest.raises(ValueError):
        ExistentialRule((), (atom("A", x),))
    sr = skolemize(r, 0)
    assert isinstance(sr, SkolemRule)
