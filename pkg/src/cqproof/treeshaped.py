"""Polynomial tree-size minimization for tree-shaped queries over DL-Lite_R.

Anonymous elements are collapsed into one placeholder individual per
existential role, minimal per-atom costs are computed on that compressed
structure, the cheapest assignment of query terms is found by dynamic
programming along the Gaifman tree, and the result is mapped back onto
Skolem terms.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .chase import Derivation
from .deriver_sk import build_dag_proof, final_cost
from .graph import Proof
from .logic import (Atom, ConceptInclusion, Constant, CQ, Exists, KnowledgeBase, Role, Term,
                    Variable, match_atom, term_key, translate_axiom)
from .search import NotEntailed, SearchGoal, atom_costs, min_tree_size

log = logging.getLogger(__name__)

INF = float("inf")


def gaifman_graph(q: CQ) -> Tuple[List[Term], Set[frozenset], bool]:
    """Nodes, undirected edges and whether some atom repeats a term."""
    nodes = list(dict.fromkeys(t for a in q.atoms for t in a.args))
    edges: Set[frozenset] = set()
    loop = False
    for a in q.atoms:
        if a.arity == 2:
            s, t = a.args
            if s == t:
                loop = True
            else:
                edges.add(frozenset((s, t)))
    return nodes, edges, loop


def is_tree_shaped(q: CQ) -> bool:
    nodes, edges, loop = gaifman_graph(q)
    if loop or len(edges) != len(nodes) - 1:
        return False
    adj: Dict[Term, List[Term]] = {n: [] for n in nodes}
    for e in edges:
        s, t = tuple(e)
        adj[s].append(t)
        adj[t].append(s)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        for m in adj[stack.pop()]:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return len(seen) == len(nodes)


# ---------------------------------------------------------------------------
# Compressed structure
# ---------------------------------------------------------------------------

@dataclass
class CompressedStructure:
    kb: KnowledgeBase
    atoms: List[Atom]
    derivations: Dict[Atom, List[Derivation]]
    placeholders: Dict[Role, Constant]
    abox: frozenset
    cost: Dict[Atom, int] = field(default_factory=dict)
    choice: Dict[Atom, Optional[Derivation]] = field(default_factory=dict)

    @property
    def result(self) -> set:
        return set(self.atoms)

    @property
    def constants(self) -> List[Constant]:
        return list(dict.fromkeys(t for a in self.atoms for t in a.args))

    def edges(self) -> List[Tuple[Atom, int, Atom]]:
        return [(d.premises[0], d.rule_index, a) for a in self.atoms for d in self.derivations[a]]

    def size_bound(self) -> int:
        """Documented polynomial bound on the number of vertices."""
        concepts = {a.predicate for a in self.atoms if a.arity == 1}
        roles = {a.predicate for a in self.atoms if a.arity == 2}
        for ax in self.kb.tbox:
            r = translate_axiom(ax)
            for a in r.body + r.head:
                (concepts if a.arity == 1 else roles).add(a.predicate)
        n = len(self.kb.individuals()) + len(self.placeholders)
        return len(concepts) * n + len(roles) * n * n + len(self.kb.tbox) + len(self.kb.abox)


def placeholder_name(role: Role, taken: set) -> Constant:
    """Individual standing for every anonymous element of ``exists role``."""
    base = f"b_ex_{role.name}" + ("_inv" if role.inverse else "")
    name = base
    while name in taken:
        name += "_"
    return Constant(name)


def build_compressed(kb: KnowledgeBase) -> CompressedStructure:
    if not kb.is_dl_lite():
        raise ValueError("the compressed structure is defined for DL-Lite_R TBoxes only")
    taken = {c.name for c in kb.individuals()}
    holders: Dict[Role, Constant] = {}
    # each axiom as (body atom, head atom) where the head may use a placeholder
    steps: List[Tuple[Atom, Atom, int]] = []
    for i, ax in enumerate(kb.tbox):
        rule = translate_axiom(ax)
        head = rule.head[0]
        if isinstance(ax, ConceptInclusion) and isinstance(ax.rhs, Exists):
            # the fresh element u satisfies exists R^- where R is the rhs role
            inv = ax.rhs.role.inv()
            if inv not in holders:
                holders[inv] = placeholder_name(inv, taken)
                taken.add(holders[inv].name)
            sub = {u: holders[inv] for u in rule.existential_vars}
            head = head.substitute(sub)
        steps.append((rule.body[0], head, i))

    atoms: List[Atom] = list(dict.fromkeys(kb.abox))
    members = set(atoms)
    derivs: Dict[Atom, List[Derivation]] = {a: [] for a in atoms}
    frontier = list(atoms)
    while frontier:
        new: List[Atom] = []
        for a in frontier:
            for body, head, i in steps:
                sub = match_atom(body, a)
                if sub is None:
                    continue
                c = head.substitute(sub)
                d = Derivation((a,), i)
                if c not in members:
                    members.add(c)
                    atoms.append(c)
                    derivs[c] = []
                    new.append(c)
                if d not in derivs[c]:
                    derivs[c].append(d)
        frontier = new
    cs = CompressedStructure(kb, atoms, derivs, holders, frozenset(kb.abox))
    cs.cost, cs.choice = atom_costs(cs)  # type: ignore[arg-type]
    return cs


# ---------------------------------------------------------------------------
# Cost graph and elimination
# ---------------------------------------------------------------------------

def _rooted(q: CQ, root: Term):
    _, edges, _ = gaifman_graph(q)
    adj: Dict[Term, List[Term]] = {}
    for e in edges:
        s, t = tuple(e)
        adj.setdefault(s, []).append(t)
        adj.setdefault(t, []).append(s)
    children: Dict[Term, List[Term]] = {}
    order = [root]
    parent = {root: None}
    for t in order:
        kids = sorted((m for m in adj.get(t, ()) if m not in parent), key=term_key)
        for m in kids:
            parent[m] = t
        children[t] = kids
        order.extend(kids)
    return order, children


def cost_graph_assignment(q: CQ, cs: CompressedStructure, root: Optional[Term] = None
                          ) -> Tuple[float, Dict[Term, Constant]]:
    """Cheapest assignment of the terms of ``q`` to compressed individuals.

    Unary atoms are charged to their term's node and binary atoms to the
    Gaifman edge they sit on, so every atom is counted once.  Ties are
    broken towards the lexicographically least individual.
    """
    atoms = list(dict.fromkeys(q.atoms))
    terms = list(dict.fromkeys(t for a in atoms for t in a.args))
    if root is None:
        consts = [t for t in terms if isinstance(t, Constant)]
        root = consts[0] if consts else min(terms, key=term_key)
    order, children = _rooted(q, root)
    domain = sorted(cs.constants, key=term_key)

    def dom(t: Term) -> List[Term]:
        return [t] if isinstance(t, Constant) else domain

    def c(a: Atom) -> float:
        return cs.cost.get(a, INF)

    unary: Dict[Term, List[Atom]] = {}
    binary: Dict[frozenset, List[Atom]] = {}
    for a in atoms:
        if a.arity == 1:
            unary.setdefault(a.args[0], []).append(a)
        else:
            binary.setdefault(frozenset(a.args), []).append(a)

    def node_cost(t: Term, val: Term) -> float:
        return sum(c(a.substitute({t: val}) if isinstance(t, Variable) else a) for a in unary.get(t, ()))

    def gamma(t1: Term, v1: Term, t2: Term, v2: Term) -> float:
        sub = {t: v for t, v in ((t1, v1), (t2, v2)) if isinstance(t, Variable)}
        return sum(c(a.substitute(sub)) for a in binary.get(frozenset((t1, t2)), ()))

    best: Dict[Tuple[Term, Term], float] = {}
    pick: Dict[Tuple[Term, Term, Term], Term] = {}
    for t in reversed(order):
        for val in dom(t):
            total = node_cost(t, val)
            for ch in children[t]:
                cand = min(((gamma(t, val, ch, v2) + best[(ch, v2)], term_key(v2), v2)
                            for v2 in dom(ch)), default=(INF, (), None))
                total += cand[0]
                pick[(t, val, ch)] = cand[2]
            best[(t, val)] = total
    top = min(((best[(root, v)], term_key(v), v) for v in dom(root)), default=(INF, (), None))
    if top[0] == INF:
        return INF, {}
    assignment: Dict[Term, Constant] = {root: top[2]}
    for t in order:
        for ch in children[t]:
            assignment[ch] = pick[(t, assignment[t], ch)]
    return top[0], assignment


# ---------------------------------------------------------------------------
# De-compression
# ---------------------------------------------------------------------------

def _chain(cs: CompressedStructure, a: Atom) -> List[Tuple[Atom, Optional[int]]]:
    """The minimal derivation of a compressed atom as (atom, axiom) pairs
    from its ABox origin upwards."""
    out = []
    while True:
        d = cs.choice[a]
        out.append((a, None if d is None else d.rule_index))
        if d is None:
            return list(reversed(out))
        a = d.premises[0]


def _realize(cs: CompressedStructure, a: Atom, srules, recipe) -> Tuple[Atom, int]:
    """Replay the chain of ``a`` with Skolem rules; returns the real atom and
    its tree size."""
    chain = _chain(cs, a)
    real = chain[0][0]
    recipe.setdefault(real, None)
    cost = 1
    for _, ri in chain[1:]:
        rule = srules[ri]
        sub = match_atom(rule.body[0], real)
        nxt = rule.head[0].substitute(sub)
        recipe.setdefault(nxt, Derivation((real,), ri))
        real = nxt
        cost += 2
    return real, cost


def tree_shaped_min(goal: SearchGoal, fallback: bool = True) -> Proof:
    """Minimal tree-size proof for a tree-shaped query.

    When the per-atom proofs chosen on the compressed structure disagree on
    the anonymous element a query variable stands for, the compressed value
    is only a lower bound; the exact search is used instead (unless
    ``fallback`` is False, in which case ValueError is raised).
    """
    if goal.deriver != "sk" or goal.measure != "tree_size":
        raise ValueError("tree_shaped_min handles the Skolemized deriver and tree size only")
    inst = goal.instance
    if not is_tree_shaped(inst):
        raise ValueError("query is not tree-shaped")
    cs = build_compressed(goal.kb)
    total, assignment = cost_graph_assignment(inst, cs)
    if total == INF:
        raise NotEntailed("query answer is not entailed")
    srules = goal.kb.skolem_rules()
    recipe: Dict[Atom, Optional[Derivation]] = {}
    image: List[Atom] = []
    term_real: Dict[Term, Term] = {}
    consistent = True
    for a in inst.atoms:
        comp = a.substitute({t: v for t, v in assignment.items() if isinstance(t, Variable)})
        real, _ = _realize(cs, comp, srules, recipe)
        for qt, rt in zip(a.args, real.args):
            if term_real.setdefault(qt, rt) != rt:
                consistent = False
        image.append(real)
    if consistent:
        per_atom = _tree_costs(recipe)
        realized = final_cost(inst, image, per_atom, False)
        expected = total + final_cost(inst, image, {a: 0 for a in image}, False)
        if realized == expected:
            return build_dag_proof(goal.kb, recipe, inst, image, prime=False)
    if not fallback:
        raise ValueError("compressed optimum is not realizable")
    log.info("compressed assignment not realizable, using exact search")
    return min_tree_size(goal)


def _tree_costs(recipe: Dict[Atom, Optional[Derivation]]) -> Dict[Atom, int]:
    memo: Dict[Atom, int] = {}

    def tc(a: Atom) -> int:
        if a not in memo:
            d = recipe[a]
            memo[a] = 1 if d is None else 2 + sum(tc(p) for p in d.premises)
        return memo[a]

    return {a: tc(a) for a in recipe}
