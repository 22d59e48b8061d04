"""Minimal proof search over the depth-bounded Skolemized derivation structure.

Tree size is minimized with a Knuth-style generalization of Dijkstra's
algorithm (each hyperedge costs one plus the costs of its premises, the
axiom leaf included); size is minimized by branch-and-bound over
homomorphisms and derivation choices.  The brute-force oracles at the end
deliberately share none of that machinery apart from the chase.
"""
from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

from .chase import (ChaseConfig, ChaseResult, Derivation, ResourceLimitExceeded, all_derivations,
                    chase, default_depth_bound)
from .deriver_sk import build_dag_proof, final_cost, final_shape
from .graph import Proof
from .logic import Atom, CQ, Constant, KnowledgeBase, iter_matches

log = logging.getLogger(__name__)

DEFAULT_CAP = 10 ** 6
DERIVERS = ("cq", "sk", "sk'")
MEASURES = ("size", "tree_size")


class NotEntailed(ValueError):
    """The answer is not entailed within the chase depth bound."""


@dataclass
class SearchGoal:
    kb: KnowledgeBase
    query: CQ
    answer: Tuple[Constant, ...] = ()
    deriver: str = "sk"
    measure: str = "tree_size"
    bound: Optional[int] = None
    depth_bound: Optional[int] = None
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        self.answer = tuple(self.answer)
        if self.deriver == "sk-prime":
            self.deriver = "sk'"
        if self.measure == "tree":
            self.measure = "tree_size"
        if self.deriver not in DERIVERS:
            raise ValueError(f"unknown deriver {self.deriver!r}")
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")
        if len(self.answer) != len(self.query.answer_vars):
            raise ValueError("answer tuple does not fit the query's answer variables")

    @property
    def prime(self) -> bool:
        return self.deriver == "sk'"

    @property
    def instance(self) -> CQ:
        """q(a) with duplicate atoms removed."""
        key = (self.query, self.answer)
        if getattr(self, "_instance_key", None) != key:
            inst = self.query.instantiate(self.answer)
            self._instance = CQ((), tuple(dict.fromkeys(inst.atoms)))
            self._instance_key = key
        return self._instance

    def chase_config(self) -> ChaseConfig:
        d = self.depth_bound if self.depth_bound is not None else default_depth_bound(self.kb, self.query)
        return ChaseConfig(d)


@dataclass
class Structure:
    """Materialized bounded derivation structure for one goal."""
    goal: SearchGoal
    result: ChaseResult
    derivations: Dict[Atom, List[Derivation]]
    abox: frozenset

    @classmethod
    def build(cls, goal: SearchGoal) -> "Structure":
        res = chase(goal.kb, cfg=goal.chase_config())
        return cls(goal, res, all_derivations(goal.kb, res), frozenset(goal.kb.abox))

    def matches(self) -> Iterator[Dict]:
        return iter_matches(self.goal.instance.atoms, self.result.as_set())

    def entailed(self) -> bool:
        return next(self.matches(), None) is not None


# ---------------------------------------------------------------------------
# Tree size
# ---------------------------------------------------------------------------

def atom_costs(st: Structure, leaf_cost: Optional[Mapping[Atom, int]] = None
               ) -> Tuple[Dict[Atom, int], Dict[Atom, Optional[Derivation]]]:
    """Minimal tree size of a proof for every atom, with the chosen last step.

    ``leaf_cost`` overrides the cost of using an ABox atom as a leaf (it
    defaults to 1); atoms absent from the mapping are not usable as leaves.
    """
    if leaf_cost is None:
        leaf_cost = {a: 1 for a in st.abox}
    users: Dict[Atom, List[Tuple[Atom, int]]] = {}
    missing: Dict[Tuple[Atom, int], int] = {}
    for a, ds in st.derivations.items():
        for i, d in enumerate(ds):
            missing[(a, i)] = len(set(d.premises))
            for p in set(d.premises):
                users.setdefault(p, []).append((a, i))
    heap = []
    counter = itertools.count()
    for a, c in leaf_cost.items():
        if a in st.result:
            heapq.heappush(heap, (c, a.key(), -1, next(counter), a, None))
    for (a, i), m in missing.items():
        if m == 0:  # a rule with no body atoms cannot occur, kept for safety
            heapq.heappush(heap, (2, a.key(), i, next(counter), a, st.derivations[a][i]))
    cost: Dict[Atom, int] = {}
    choice: Dict[Atom, Optional[Derivation]] = {}
    while heap:
        c, _, _, _, a, d = heapq.heappop(heap)
        if a in cost:
            continue
        cost[a] = c
        choice[a] = d
        for b, i in users.get(a, ()):
            missing[(b, i)] -= 1
            if missing[(b, i)] == 0 and b not in cost:
                der = st.derivations[b][i]
                total = 2 + sum(cost[p] for p in der.premises)
                heapq.heappush(heap, (total, b.key(), i, next(counter), b, der))
    return cost, choice


@dataclass
class Plan:
    cost: int
    image: List[Atom]
    choice: Dict[Atom, Optional[Derivation]] = field(default_factory=dict)


class _Found(Exception):
    pass


def best_image(goal: SearchGoal, st: Structure, cost: Mapping[Atom, int],
               limit: Optional[int] = None) -> Optional[Tuple[int, List[Atom]]]:
    """Cheapest homomorphic image of q(a) under the per-atom costs.

    Ties are broken by the image's atom keys.  With ``limit`` the search
    only looks for some image of cost at most ``limit`` and returns the
    first one found (or None).
    """
    inst = goal.instance
    atoms = list(inst.atoms)
    index: Dict[Tuple[str, int], List[Atom]] = {}
    for a in cost:
        index.setdefault((a.predicate, a.arity), []).append(a)
    for lst in index.values():
        lst.sort(key=lambda a: (cost[a], a.key()))
    best: List = [None]

    from .logic import match_atom

    def partial(img):
        if goal.prime:
            return sum(cost[a] for a in set(img))
        return sum(cost[a] for a in img)

    def rec(i, sub, img):
        lb = partial(img)
        if best[0] is not None and lb > best[0][0]:
            return
        if limit is not None and lb > limit:
            return
        if i == len(atoms):
            total = final_cost(inst, img, cost, goal.prime)
            if limit is not None:
                if total <= limit:
                    best[0] = (total, list(img))
                    raise _Found
                return
            cand = (total, [a.key() for a in img])
            if best[0] is None or cand < (best[0][0], [a.key() for a in best[0][1]]):
                best[0] = (total, list(img))
            return
        for f in index.get((atoms[i].predicate, atoms[i].arity), ()):
            nxt = match_atom(atoms[i], f, sub)
            if nxt is not None:
                img.append(f)
                rec(i + 1, nxt, img)
                img.pop()

    try:
        rec(0, {}, [])
    except _Found:
        pass
    return best[0]


def tree_plan(goal: SearchGoal, st: Optional[Structure] = None,
              leaf_cost: Optional[Mapping[Atom, int]] = None) -> Plan:
    st = st or Structure.build(goal)
    cost, choice = atom_costs(st, leaf_cost)
    found = best_image(goal, st, cost)
    if found is None:
        raise NotEntailed("query answer not entailed within the chase depth bound")
    total, image = found
    needed: Dict[Atom, Optional[Derivation]] = {}
    stack = list(image)
    while stack:
        a = stack.pop()
        if a in needed:
            continue
        needed[a] = choice[a]
        if choice[a] is not None:
            stack.extend(choice[a].premises)
    return Plan(total, image, needed)


def min_tree_size(goal: SearchGoal) -> Proof:
    """Proof of minimal tree size within the bounded structure."""
    if goal.deriver == "cq":
        from .deriver_cq import sk_to_cq
        sk_goal = SearchGoal(goal.kb, goal.query, goal.answer, "sk", "tree_size",
                             goal.bound, goal.depth_bound, goal.cap)
        p = sk_to_cq(min_tree_size(sk_goal), goal.kb)
        p.minimal = False
        return p
    plan = tree_plan(goal)
    return build_dag_proof(goal.kb, plan.choice, goal.instance, plan.image, goal.prime)


# ---------------------------------------------------------------------------
# Size
# ---------------------------------------------------------------------------

def _final_vertices(goal: SearchGoal, image) -> int:
    kind, _ = final_shape(goal.instance, image, goal.prime)
    return {"atom": 0, "C": 1, "E": 1, "CE": 2}[kind]


class _SizeSearch:
    def __init__(self, goal: SearchGoal, st: Structure):
        self.goal = goal
        self.st = st
        self.expansions = 0
        self.best_size: Optional[int] = None
        self.best: Optional[Tuple[List[Atom], Dict[Atom, Optional[Derivation]]]] = None

    def tick(self):
        self.expansions += 1
        if self.expansions > self.goal.cap:
            raise ResourceLimitExceeded(
                f"size search exceeded {self.goal.cap} expansions; raise the cap to continue")

    def run(self, images: List[List[Atom]], incumbent, stop_at: Optional[int] = None):
        self.best_size, self.best = incumbent
        for img in images:
            if stop_at is not None and self.best_size <= stop_at:
                break
            final = _final_vertices(self.goal, img)
            need = list(dict.fromkeys(final_shape(self.goal.instance, img, self.goal.prime)[1]))
            if len(set(need)) + final >= self.best_size:
                continue
            chosen: Dict[Atom, Optional[Derivation]] = {}
            self._dfs(img, final, need, chosen, set())
        return self.best_size, self.best

    def _dfs(self, img, final, open_atoms: List[Atom], chosen, axioms: set):
        self.tick()
        atoms_now = set(chosen) | set(open_atoms)
        open_derived = [a for a in open_atoms if a not in self.st.abox]
        lb = len(atoms_now) + len(axioms) + final + (1 if open_derived and not axioms else 0)
        if lb >= self.best_size:
            return
        if not open_atoms:
            self.best_size = lb
            self.best = (list(img), dict(chosen))
            return
        a = min(open_atoms, key=Atom.key)
        rest = [x for x in open_atoms if x != a]
        if a in self.st.abox:
            chosen[a] = None
            self._dfs(img, final, rest, chosen, axioms)
            del chosen[a]
            return
        for d in self.st.derivations.get(a, ()):
            if any(self._reaches(p, a, chosen) for p in d.premises):
                continue
            chosen[a] = d
            new = [p for p in d.premises if p not in chosen and p not in rest]
            self._dfs(img, final, rest + new, chosen, axioms | {d.rule_index})
            del chosen[a]

    @staticmethod
    def _reaches(src: Atom, dst: Atom, chosen) -> bool:
        """Does ``src`` depend on ``dst`` through the chosen derivations?"""
        stack, seen = [src], set()
        while stack:
            x = stack.pop()
            if x == dst:
                return True
            if x in seen:
                continue
            seen.add(x)
            d = chosen.get(x)
            if d is not None:
                stack.extend(d.premises)
        return False


def _dag_size(goal, plan: Plan) -> int:
    axioms = {d.rule_index for d in plan.choice.values() if d is not None}
    return len(plan.choice) + len(axioms) + _final_vertices(goal, plan.image)


def _size_images(goal: SearchGoal, st: Structure) -> List[List[Atom]]:
    imgs = {}
    for sub in st.matches():
        img = [a.substitute(sub) for a in goal.instance.atoms]
        imgs.setdefault(tuple(img), img)
    return sorted(imgs.values(), key=lambda img: (len(set(img)), [a.key() for a in img]))


def size_plan(goal: SearchGoal, st: Optional[Structure] = None) -> Plan:
    st = st or Structure.build(goal)
    start = tree_plan(goal, st)
    incumbent = (_dag_size(goal, start), (start.image, start.choice))
    search = _SizeSearch(goal, st)
    best_size, (image, choice) = search.run(_size_images(goal, st), incumbent)
    log.debug("size search: %d expansions, optimum %d", search.expansions, best_size)
    return Plan(best_size, list(image), dict(choice))


def min_size(goal: SearchGoal) -> Proof:
    if goal.deriver == "cq":
        from .deriver_cq import sk_to_cq
        sk_goal = SearchGoal(goal.kb, goal.query, goal.answer, "sk", "size",
                             goal.bound, goal.depth_bound, goal.cap)
        p = sk_to_cq(min_size(sk_goal), goal.kb)
        p.minimal = False
        return p
    plan = size_plan(goal)
    return build_dag_proof(goal.kb, plan.choice, goal.instance, plan.image, goal.prime)


def min_proof(goal: SearchGoal) -> Proof:
    return min_tree_size(goal) if goal.measure == "tree_size" else min_size(goal)


def min_measure(goal: SearchGoal) -> int:
    if goal.deriver == "cq":
        raise ValueError("exact minimization is implemented for the Skolemized derivers only")
    st = Structure.build(goal)
    if not st.entailed():
        raise NotEntailed("query answer not entailed within the chase depth bound")
    if goal.measure == "tree_size":
        return tree_plan(goal, st).cost
    return size_plan(goal, st).cost


def decide_op(goal: SearchGoal, n: Optional[int] = None) -> bool:
    """Is there a proof of measure at most ``n`` (default ``goal.bound``)?"""
    n = goal.bound if n is None else n
    if n is None:
        raise ValueError("decide_op needs a bound")
    if goal.deriver == "cq":
        raise ValueError("exact minimization is implemented for the Skolemized derivers only")
    st = Structure.build(goal)
    if not st.entailed():
        raise NotEntailed("query answer not entailed within the chase depth bound")
    if n < 1:
        # every proof has at least one vertex
        return False
    cost, _ = atom_costs(st)
    if best_image(goal, st, cost, limit=n) is not None:
        return True  # already within reach with a tree-shaped proof
    if goal.measure == "tree_size":
        return False
    search = _SizeSearch(goal, st)
    best_size, _ = search.run(_size_images(goal, st), (n + 1, None), stop_at=n)
    return best_size <= n


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------

def brute_force_min(goal: SearchGoal, cap: int = 2_000_000) -> int:
    """Exact minimum by exhaustive enumeration (test oracle only)."""
    if goal.deriver == "cq":
        raise ValueError("the oracle covers the Skolemized derivers only")
    st = Structure.build(goal)
    images = []
    seen = set()
    for sub in st.matches():
        img = tuple(a.substitute(sub) for a in goal.instance.atoms)
        if img not in seen:
            seen.add(img)
            images.append(img)
    if not images:
        raise NotEntailed("query answer not entailed within the chase depth bound")
    if goal.measure == "tree_size":
        return _brute_tree(goal, st, images, cap)
    return _brute_size(goal, st, images, cap)


def _brute_tree(goal, st, images, cap) -> int:
    budget = [cap]

    def tree(a: Atom, path: frozenset) -> Optional[int]:
        budget[0] -= 1
        if budget[0] < 0:
            raise ResourceLimitExceeded("brute-force tree enumeration exceeded its cap")
        options = []
        if a in st.abox:
            options.append(1)
        for d in st.derivations.get(a, ()):
            if any(p in path for p in d.premises):
                continue
            sub = [tree(p, path | {a}) for p in d.premises]
            if all(s is not None for s in sub):
                options.append(2 + sum(sub))
        return min(options) if options else None

    best = None
    cache: Dict[Atom, Optional[int]] = {}
    for img in images:
        costs = {}
        for a in set(img):
            if a not in cache:
                cache[a] = tree(a, frozenset())
            costs[a] = cache[a]
        if any(c is None for c in costs.values()):
            continue
        total = final_cost(goal.instance, list(img), costs, goal.prime)
        best = total if best is None else min(best, total)
    return best


def _brute_size(goal, st, images, cap) -> int:
    relevant = set()
    stack = [a for img in images for a in img]
    while stack:
        a = stack.pop()
        if a in relevant:
            continue
        relevant.add(a)
        for d in st.derivations.get(a, ()):
            stack.extend(d.premises)
    cand_atoms = sorted(relevant, key=Atom.key)
    axioms = sorted({d.rule_index for a in cand_atoms for d in st.derivations.get(a, ())})
    labels = [("a", a) for a in cand_atoms] + [("t", i) for i in axioms]
    finals = {img: _final_vertices(goal, img) for img in images}
    needs = {img: set(final_shape(goal.instance, list(img), goal.prime)[1]) for img in images}
    checked = 0
    for k in range(1, len(labels) + 1):
        if k + min(finals.values()) > cap:
            break
        best_here = None
        for combo in itertools.combinations(labels, k):
            checked += 1
            if checked > cap:
                raise ResourceLimitExceeded("brute-force subset enumeration exceeded its cap")
            atoms = {x for t, x in combo if t == "a"}
            axs = {x for t, x in combo if t == "t"}
            derivable = _fixpoint(st, atoms, axs)
            for img in images:
                if needs[img] <= derivable:
                    v = k + finals[img]
                    best_here = v if best_here is None else min(best_here, v)
        if best_here is not None:
            # larger subsets cannot do better once final overhead is constant
            # per image, but different images have different overheads
            lower_next = k + 1 + min(finals.values())
            if best_here <= lower_next:
                return best_here
            best_rest = best_here
            for k2 in range(k + 1, best_here - min(finals.values())):
                for combo in itertools.combinations(labels, k2):
                    checked += 1
                    if checked > cap:
                        raise ResourceLimitExceeded("brute-force subset enumeration exceeded its cap")
                    atoms = {x for t, x in combo if t == "a"}
                    axs = {x for t, x in combo if t == "t"}
                    derivable = _fixpoint(st, atoms, axs)
                    for img in images:
                        if needs[img] <= derivable:
                            best_rest = min(best_rest, k2 + finals[img])
            return best_rest
    return None


def _fixpoint(st, atoms: set, axs: set) -> set:
    """Atoms of the chosen set derivable using only chosen atoms and axioms."""
    der = {a for a in atoms if a in st.abox}
    changed = True
    while changed:
        changed = False
        for a in atoms:
            if a in der:
                continue
            for d in st.derivations.get(a, ()):
                if d.rule_index in axs and all(p in der for p in d.premises):
                    der.add(a)
                    changed = True
                    break
    return der
