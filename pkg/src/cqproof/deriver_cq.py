"""The CQ deriver: schemas MP, C, T and E over Boolean CQs, their
admissibility checker, and translations to and from Skolemized proofs."""
from __future__ import annotations

from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .chase import Derivation
from .deriver_sk import build_dag_proof, sk_schema_checker
from .graph import Proof, ProofGraph, is_axiom, is_tree, validate_proof
from .logic import (Atom, Conjunction, CQ, Constant, ExistentialRule, KnowledgeBase, SkolemTerm,
                    Substitution, Term, Variable, apply_term, as_cq, cq_isomorphic, embeddings,
                    fresh_variable, iter_matches, match_atom, translate_axiom)

MP, C, T, E = "MP", "C", "T", "E"


class InferenceError(ValueError):
    """Raised when an inference's side conditions do not hold."""


def _query(label) -> CQ:
    q = as_cq(label)
    if q.answer_vars:
        raise InferenceError("CQ inferences operate on Boolean CQs")
    return q


def _names(atoms: Iterable[Atom]) -> set:
    return {v.name for a in atoms for v in a.variables()}


def _unique(atoms: Iterable[Atom]) -> Tuple[Atom, ...]:
    return tuple(dict.fromkeys(atoms))


def is_query_label(label) -> bool:
    return isinstance(label, (Atom, Conjunction, CQ))


# ---------------------------------------------------------------------------
# Inference constructors
# ---------------------------------------------------------------------------

def infer_mp(q, rule: ExistentialRule, pi: Mapping[Variable, Term],
             drop: Optional[Sequence[Atom]] = None, add: Optional[Sequence[Atom]] = None,
             fresh: Optional[Mapping[Variable, Variable]] = None) -> CQ:
    """Apply ``rule`` to ``q`` under ``pi``.

    ``drop`` lists atoms of ``pi(body)`` to remove (default: all of them) and
    ``add`` lists atoms of ``rule.head`` to add (default: all).  Existential
    head variables get fresh names unless ``fresh`` fixes them.
    """
    q = _query(q)
    rule = translate_axiom(rule)
    matched = [b.substitute(pi) for b in rule.body]
    present = set(q.atoms)
    if not set(matched) <= present:
        raise InferenceError("substitution does not map the rule body into the query")
    drop = matched if drop is None else list(drop)
    if not set(drop) <= set(matched):
        raise InferenceError("dropped atoms must be images of body atoms")
    add = list(rule.head) if add is None else list(add)
    if not set(add) <= set(rule.head):
        raise InferenceError("added atoms must come from the rule head")
    taken = _names(q.atoms) | {v.name for t in pi.values() for v in _term_vars(t)}
    ren: Dict[Variable, Term] = {v: t for v, t in pi.items()}
    for u in rule.existential_vars:
        if fresh and u in fresh:
            if fresh[u].name in taken:
                raise InferenceError(f"variable {fresh[u]} is not fresh")
            ren[u] = fresh[u]
            taken.add(fresh[u].name)
        else:
            ren[u] = fresh_variable(u.name, taken)
    gone = set(drop)
    atoms = _unique([a for a in q.atoms if a not in gone] + [h.substitute(ren) for h in add])
    if not atoms:
        raise InferenceError("the conclusion would be empty")
    return CQ((), atoms)


def _term_vars(t: Term):
    if isinstance(t, Variable):
        yield t
    elif isinstance(t, SkolemTerm):
        yield from _term_vars(t.argument)


def rename_query_apart(q: CQ, avoid: Iterable[str]) -> CQ:
    taken = set(avoid)
    sub = {}
    for v in q.variables():
        if v.name in taken:
            sub[v] = fresh_variable(v.name, taken)
        taken.add(sub.get(v, v).name)
    return CQ((), tuple(a.substitute(sub) for a in q.atoms))


def infer_c(q1, q2) -> CQ:
    q1, q2 = _query(q1), _query(q2)
    q2 = rename_query_apart(q2, _names(q1.atoms))
    return CQ((), _unique(q1.atoms + q2.atoms))


def infer_t(phi: Sequence[Atom], abstracted: Iterable[Variable] = ()) -> ExistentialRule:
    """The tautology phi -> exists x'. phi[x := x'] for the chosen variables x."""
    phi = list(phi)
    present = {v for a in phi for v in a.variables()}
    abstracted = list(dict.fromkeys(abstracted))
    missing = [v for v in abstracted if v not in present]
    if missing:
        raise InferenceError(f"variables {missing} do not occur in the body")
    taken = _names(phi)
    ren = {v: fresh_variable(v.name, taken) for v in abstracted}
    return ExistentialRule(tuple(phi), tuple(a.substitute(ren) for a in phi))


def infer_e(q, constants: Iterable[Constant] = ()) -> CQ:
    """Replace every occurrence of each chosen constant by one fresh variable."""
    q = _query(q)
    taken = _names(q.atoms)
    present = set(q.constants())
    sub: Dict[Term, Variable] = {}
    for c in dict.fromkeys(constants):
        if c not in present:
            raise InferenceError(f"constant {c} does not occur in the query")
        sub[c] = fresh_variable("x", taken)
    atoms = [Atom(a.predicate, tuple(sub.get(t, t) for t in a.args)) for a in q.atoms]
    return CQ((), _unique(atoms))


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------

def _mp_admissible(q: CQ, rule: ExistentialRule, concl: CQ) -> bool:
    facts = set(q.atoms)
    seen = set()
    for pi in iter_matches(rule.body, q.atoms):
        key = tuple(sorted((v.name, str(t)) for v, t in pi.items()))
        if key in seen:
            continue
        seen.add(key)
        taken = _names(q.atoms) | _names(concl.atoms)
        ren: Dict[Variable, Term] = dict(pi)
        for u in rule.existential_vars:
            ren[u] = fresh_variable(u.name, taken)
        body_img = {b.substitute(pi) for b in rule.body}
        head_img = {h.substitute(ren) for h in rule.head}
        must_keep = facts - body_img
        for emb in embeddings(concl.atoms, facts | head_img, injective=True, vars_to_vars=True):
            if must_keep <= {a.substitute(emb) for a in concl.atoms}:
                return True
    return False


def _t_admissible(rule: ExistentialRule) -> bool:
    body = set(rule.body)
    head = set(rule.head)
    if len(body) != len(head):
        return False
    body_vars = {v for a in body for v in a.variables()}
    for emb in embeddings(list(body), head, injective=True, vars_to_vars=True):
        if all(t == v or t not in body_vars for v, t in emb.items()):
            if {a.substitute(emb) for a in body} == head:
                return True
    return False


def _e_admissible(q: CQ, concl: CQ) -> bool:
    want = set(q.atoms)
    for h in embeddings(concl.atoms, want, injective=True):
        if {a.substitute(h) for a in concl.atoms} == want:
            return True
    return False


class CqSchemaChecker:
    """Admissibility oracle for MP, C, T and E.

    Edges may carry replay parameters (``pi``, ``drop``, ``add``, ``fresh``
    for MP); when present they are checked first, otherwise every instance
    of the schema is searched.
    """

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb
        self._tbox = set(kb.tbox)
        self._abox = set(kb.abox)

    def is_grounded(self, label) -> bool:
        if is_axiom(label):
            return label in self._tbox
        if is_query_label(label):
            q = as_cq(label)
            return not q.answer_vars and len(set(q.atoms)) == 1 and q.atoms[0] in self._abox
        return False

    def admissible(self, premises: Sequence, conclusion, rule: str = "",
                   params: Optional[Mapping] = None) -> bool:
        premises = list(premises)
        kind = rule or self.classify(premises)
        try:
            if kind == MP:
                return self._mp(premises, conclusion, params or {})
            if kind == C:
                return self._c(premises, conclusion)
            if kind == T:
                return not premises and isinstance(conclusion, ExistentialRule) \
                    and _t_admissible(conclusion)
            if kind == E:
                return len(premises) == 1 and is_query_label(premises[0]) and \
                    is_query_label(conclusion) and \
                    _e_admissible(_query(premises[0]), _query(conclusion))
        except (InferenceError, TypeError, ValueError):
            return False
        return False

    @staticmethod
    def classify(premises: Sequence) -> str:
        if not premises:
            return T
        if any(is_axiom(p) for p in premises):
            return MP
        return C if len(premises) == 2 else E

    def _mp(self, premises, conclusion, params) -> bool:
        if len(premises) != 2 or not is_query_label(conclusion):
            return False
        rules = [p for p in premises if is_axiom(p)]
        queries = [p for p in premises if is_query_label(p)]
        if len(rules) != 1 or len(queries) != 1:
            return False
        rule = translate_axiom(rules[0])
        q, concl = _query(queries[0]), _query(conclusion)
        if "pi" in params:
            try:
                got = infer_mp(q, rule, params["pi"], params.get("drop"), params.get("add"),
                               params.get("fresh"))
                if cq_isomorphic(got, concl):
                    return True
            except InferenceError:
                pass
        return _mp_admissible(q, rule, concl)

    def _c(self, premises, conclusion) -> bool:
        if len(premises) != 2 or not all(is_query_label(p) for p in premises):
            return False
        if not is_query_label(conclusion):
            return False
        return cq_isomorphic(infer_c(premises[0], premises[1]), _query(conclusion))


def cq_schema_checker(kb: KnowledgeBase) -> CqSchemaChecker:
    return CqSchemaChecker(kb)


# ---------------------------------------------------------------------------
# Translations
# ---------------------------------------------------------------------------

def _require_valid(p: Proof, kb: KnowledgeBase, checker) -> None:
    rep = validate_proof(p, kb, checker)
    if not rep.ok:
        raise InferenceError("input proof is invalid: " + "; ".join(rep.errors[:3]))


def _single_edges(g: ProofGraph):
    return {v: (es[0] if es else None) for v, es in g.incoming().items()}


def cq_to_sk(p: Proof, kb: KnowledgeBase, check: bool = True) -> Proof:
    """Translate a proof over the CQ deriver into a Skolemized one.

    Every CQ vertex is tracked together with a homomorphism into the ground
    atoms derived so far; MP steps with TBox rules contribute MP_s steps,
    tautologies and E steps contribute nothing, and the closing C_s/E_s steps
    abstract the sink's ground image.
    """
    if check:
        _require_valid(p, kb, cq_schema_checker(kb))
    g = p.graph
    inc = _single_edges(g)
    srules = kb.skolem_rules()
    index = {ax: i for i, ax in enumerate(kb.tbox)}
    hom: Dict[int, Substitution] = {}
    recipe: Dict[Atom, Optional[Derivation]] = {}

    def image(v: int) -> List[Atom]:
        return [a.substitute(hom[v]) for a in as_cq(g.labels[v]).atoms]

    def settle(v: int, avail: Sequence[Atom]) -> None:
        sub = next(iter_matches(as_cq(g.labels[v]).atoms, avail), None)
        if sub is None:
            raise InferenceError(f"vertex {v} has no ground image")
        hom[v] = sub

    for v in g.topological_order():
        lab = g.labels[v]
        e = inc[v]
        if not is_query_label(lab):
            continue
        if e is None:
            q = as_cq(lab)
            hom[v] = {}
            for a in q.atoms:
                recipe.setdefault(a, None)
            continue
        prem = list(e.sources)
        rule_v = [s for s in prem if is_axiom(g.labels[s])]
        query_v = [s for s in prem if is_query_label(g.labels[s])]
        if not rule_v:
            settle(v, [a for s in query_v for a in image(s)])
            continue
        qv, rv = query_v[0], rule_v[0]
        qlab, rlab = as_cq(g.labels[qv]), g.labels[rv]
        ground_q = image(qv)
        if rlab not in index:
            # a tautology re-states atoms already present
            settle(v, ground_q)
            continue
        ri = index[rlab]
        rule, srule = translate_axiom(rlab), srules[ri]
        done = False
        for pi in iter_matches(rule.body, qlab.atoms):
            gpi = {x: apply_term(t, hom[qv]) for x, t in pi.items()}
            heads = [h.substitute(gpi) for h in srule.head]
            sub = next(iter_matches(as_cq(lab).atoms, ground_q + heads), None)
            if sub is None:
                continue
            prem_atoms = tuple(dict.fromkeys(b.substitute(gpi) for b in srule.body))
            used = {a.substitute(sub) for a in as_cq(lab).atoms}
            for h in heads:
                if h in used and h not in recipe:
                    recipe[h] = Derivation(prem_atoms, ri)
            hom[v] = sub
            done = True
            break
        if not done:
            raise InferenceError(f"could not replay the MP step into vertex {v}")

    goal = as_cq(g.labels[p.sink])
    img = image(p.sink)
    return build_dag_proof(kb, recipe, goal, img, prime=False)


def size_bound_fwd(p: Proof, kb: KnowledgeBase) -> int:
    """Upper bound on the size of :func:`cq_to_sk`'s output."""
    max_head = max((len(r.head) for r in kb.rules()), default=0)
    return len(p.graph.labels) * (max_head + 1) + 2


def size_bound_bwd(p: Proof, kb: KnowledgeBase) -> int:
    """Upper bound on the size of :func:`sk_to_cq`'s output."""
    max_body = max((len(r.body) for r in kb.rules()), default=0)
    return len(p.graph.labels) * (max_body + 2) + 2


def _sink_goal(p: Proof, prime: bool) -> Tuple[object, List[Atom]]:
    """The sink label and the ground atom each of its query atoms stands for."""
    g = p.graph
    lab = g.labels[p.sink]
    if isinstance(lab, Atom):
        return lab, [lab]
    if isinstance(lab, Conjunction):
        return lab, list(lab.atoms)
    q = as_cq(lab)
    if q.is_ground():
        return lab, list(q.atoms)
    e = _single_edges(g)[p.sink]
    conj = as_cq(g.labels[e.sources[0]]).atoms
    if not prime and len(conj) == len(q.atoms):
        sub: Optional[Substitution] = {}
        for pat, f in zip(q.atoms, conj):
            sub = match_atom(pat, f, sub)
            if sub is None:
                break
        if sub is not None:
            return lab, [a.substitute(sub) for a in q.atoms]
    want = set(conj)
    for sub in iter_matches(q.atoms, want):
        if {a.substitute(sub) for a in q.atoms} == want:
            return lab, [a.substitute(sub) for a in q.atoms]
    raise InferenceError("cannot recover the ground image of the sink")


def sk_to_cq(p: Proof, kb: KnowledgeBase, prime: bool = False, check: bool = True) -> Proof:
    """Translate a Skolemized proof into a proof over the CQ deriver.

    The used ABox atoms are collected by a chain of C steps.  MP_s steps with
    the same premise set and axiom become one MP step in which Skolem terms
    are replaced by fresh variables, and an atom is dropped after its last
    use unless the goal needs it.  A closing tautology whose body is the goal
    itself (plus leftover atoms) is applied with a non-injective match, which
    splits shared terms and abstracts constants in one MP step.  Tree inputs
    give tree outputs since every axiom use then gets its own leaf.
    """
    if check:
        _require_valid(p, kb, sk_schema_checker(kb, prime))
    g = p.graph
    inc = _single_edges(g)
    order = g.topological_order()
    tree = is_tree(p)
    index = {ax: i for i, ax in enumerate(kb.tbox)}
    srules = kb.skolem_rules()

    leaves: List[Atom] = []
    groups: Dict[Tuple[frozenset, object], List[Atom]] = {}
    for v in order:
        lab, e = g.labels[v], inc[v]
        if e is None and isinstance(lab, Atom) and lab not in leaves:
            leaves.append(lab)
        elif e is not None and isinstance(lab, Atom) and any(is_axiom(g.labels[s]) for s in e.sources):
            ax = next(g.labels[s] for s in e.sources if is_axiom(g.labels[s]))
            prem = frozenset(g.labels[s] for s in e.sources if not is_axiom(g.labels[s]))
            groups.setdefault((prem, ax), []).append(lab)
    goal_label, img = _sink_goal(p, prime)
    needed = set(img)

    # decide which aggregated steps actually contribute something new
    known = set(leaves)
    steps = []
    for (prem, ax), concl in groups.items():
        if all(c in known for c in concl):
            continue
        ri = index[ax]
        gpi = next(s for s in iter_matches(srules[ri].body, prem)
                   if {b.substitute(s) for b in srules[ri].body} == set(prem)
                   and set(concl) <= {h.substitute(s) for h in srules[ri].head})
        heads = [h.substitute(gpi) for h in srules[ri].head]
        steps.append((prem, ax, ri, gpi, heads))
        known.update(heads)
    last_use = {}
    for j, (prem, *_rest) in enumerate(steps):
        for a in prem:
            last_use[a] = j

    out = ProofGraph()
    cur = out.add_vertex(leaves[0])
    cur_q = CQ((), (leaves[0],))
    for a in leaves[1:]:
        leaf = out.add_vertex(a)
        nxt = infer_c(cur_q, a)
        v = out.add_vertex(nxt)
        out.add_edge([cur, leaf], v, C)
        cur, cur_q = v, nxt

    tau: Dict[Term, Term] = {}
    taken = set()

    def q_term(t: Term) -> Term:
        return tau[t] if isinstance(t, SkolemTerm) else t

    def q_atom(a: Atom) -> Atom:
        return Atom(a.predicate, tuple(q_term(t) for t in a.args))

    axiom_vertex: Dict[object, int] = {}
    for j, (prem, ax, ri, gpi, heads) in enumerate(steps):
        rule = translate_axiom(ax)
        pi = {x: q_term(t) for x, t in gpi.items()}
        fresh = {}
        for u in rule.existential_vars:
            fv = fresh_variable("s", taken | _names(cur_q.atoms))
            taken.add(fv.name)
            fresh[u] = fv
        for h_ex, h_sk in zip(rule.head, heads):
            for te, ts in zip(h_ex.args, h_sk.args):
                if te in fresh:
                    tau[ts] = fresh[te]
        drop = _unique(q_atom(a) for a in prem if last_use.get(a) == j and a not in needed)
        nxt = infer_mp(cur_q, rule, pi, drop, list(rule.head), fresh)
        if tree or ax not in axiom_vertex:
            axiom_vertex[ax] = out.add_vertex(ax)
        v = out.add_vertex(nxt)
        out.add_edge([cur, axiom_vertex[ax]], v, MP, pi=pi, drop=drop, add=tuple(rule.head),
                     fresh=fresh)
        cur, cur_q = v, nxt

    goal = as_cq(goal_label)
    if cq_isomorphic(cur_q, goal):
        if out.incoming()[cur]:
            out.labels[cur] = goal_label
        return Proof(out, cur)

    # closing step: tautology goal & rest -> exists all . goal & rest
    sigma: Substitution = {}
    for pat, f in zip(goal.atoms, img):
        sigma = match_atom(pat, f, sigma)
    image_q = {q_atom(a) for a in img}
    rest = [a for a in cur_q.atoms if a not in image_q]
    avoid = _names(goal.atoms)
    ren: Dict[Variable, Variable] = {}
    for w in dict.fromkeys(v for a in rest for v in a.variables()):
        ren[w] = fresh_variable("r", avoid)
    body = list(_unique(list(goal.atoms) + [a.substitute(ren) for a in rest]))
    taut = infer_t(body, {v for a in body for v in a.variables()})
    pi = {v: q_term(t) for v, t in sigma.items()}
    pi.update({r: w for w, r in ren.items()})
    add = taut.head[:len(_unique(goal.atoms))]
    final = infer_mp(cur_q, taut, pi, None, add)
    assert cq_isomorphic(final, goal)
    tv = out.add_vertex(taut)
    out.add_edge([], tv, T)
    fv = out.add_vertex(goal_label if not isinstance(goal_label, Conjunction) else goal)
    out.add_edge([cur, tv], fv, MP, pi=pi, drop=None, add=tuple(add))
    return Proof(out, fv)
