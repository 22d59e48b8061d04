"""Annotated formulas, the temporal inference schemas and proof construction.

Atemporal reasoning inside a stretch of constant ABox state uses the
Skolemized schemas annotated with that stretch's interval (TMP, TC, TE).
Intervals are merged with COAL and narrowed with SEP; each temporal operator
has its own schema.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ..deriver_sk import SkSchemaChecker, final_shape, MPS, CS, ES
from ..graph import Proof, ProofGraph, is_axiom
from ..logic import (Atom, Conjunction, CQ, Constant, KnowledgeBase, SkolemRule, as_cq, label_key)
from ..search import NotEntailed, SearchGoal, Structure, tree_plan
from .intervals import FULL, Interval, cover, union_if_contiguous
from .mtcq import (And, BoxMinus, BoxPlus, CQLeaf, Evaluator, Formula, MTCQ, Next, Or, Prev, Since,
                   TemporalABox, Top, Until, compute_rulers, reach)

TMP, TC, TE = "TMP", "TC", "TE"
COAL, SEP, DISJ, CONJ = "COAL", "SEP", "DISJ", "CONJ"
BOXPLUS, BOXMINUS, UNTIL, SINCE = "BOXPLUS", "BOXMINUS", "UNTIL", "SINCE"
UNTIL0, SINCE0, NEXT, PREV, TOP = "UNTIL0", "SINCE0", "NEXT", "PREV", "TOP"
KINDS = (TMP, TC, TE, COAL, SEP, DISJ, CONJ, BOXPLUS, BOXMINUS, UNTIL, UNTIL0, SINCE, SINCE0,
         NEXT, PREV, TOP)


class TemporalInferenceError(ValueError):
    pass


def formula_key(f):
    """Identity of a formula up to variable renaming in its CQs."""
    if hasattr(f, "canonical_key"):
        return f.canonical_key()
    return label_key(f)


@dataclass(frozen=True)
class AnnotatedFormula:
    formula: object
    interval: Interval

    def canonical_key(self):
        return ("at", formula_key(self.formula), self.interval)

    def __str__(self):
        f = self.formula
        text = str(f) if not isinstance(f, (CQ, Conjunction)) or len(as_cq(f).atoms) == 1 \
            else "{" + str(f) + "}"
        return f"{text}@{self.interval}"


def _same(a, b) -> bool:
    return a == b or formula_key(a) == formula_key(b)


def _until_core(iota: Interval, iota2: Interval, r: Interval, forward: bool) -> Optional[Interval]:
    r1 = max(int(r.lo), 1)
    if r1 > r.hi:
        return None
    eff = Interval(r1, r.hi)
    nu = (iota.shift(1) if forward else iota.shift(-1)).intersect(iota2)
    if nu is None:
        return None
    reach_iv = nu.minus(eff) if forward else nu.plus(eff)
    return reach_iv.intersect(iota)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def infer_temporal(kind: str, premises: Sequence[AnnotatedFormula],
                   params: Optional[Mapping] = None) -> AnnotatedFormula:
    """Apply one temporal schema and return its conclusion.

    ``params`` carries what the premises leave open: the operator interval
    (``interval``), the other disjunct (``other`` and ``side``), the target
    interval of SEP (``target``) or the rule and substitution of TMP.
    """
    params = dict(params or {})
    prem = list(premises)

    def need(n):
        if len(prem) != n:
            raise TemporalInferenceError(f"{kind} takes {n} premise(s)")

    if kind == TMP:
        rule: SkolemRule = params["rule"]
        ivs = {p.interval for p in prem}
        if len(ivs) != 1:
            raise TemporalInferenceError("TMP premises must share one interval")
        pi = params["pi"]
        body = {b.substitute(pi) for b in rule.body}
        if body != {p.formula for p in prem}:
            raise TemporalInferenceError("substitution does not map the body onto the premises")
        head = rule.head[params.get("index", 0)].substitute(pi)
        return AnnotatedFormula(head, ivs.pop())
    if kind == COAL:
        if len(prem) < 2:
            raise TemporalInferenceError("COAL needs at least two premises")
        if any(not _same(p.formula, prem[0].formula) for p in prem):
            raise TemporalInferenceError("COAL premises must agree up to renaming")
        u = union_if_contiguous(p.interval for p in prem)
        if u is None:
            raise TemporalInferenceError("COAL premises do not form one interval")
        return AnnotatedFormula(prem[0].formula, u)
    if kind == SEP:
        need(1)
        tgt: Interval = params["target"]
        if not tgt.issubset(prem[0].interval):
            raise TemporalInferenceError("SEP can only shrink an interval")
        return AnnotatedFormula(prem[0].formula, tgt)
    if kind == DISJ:
        need(1)
        other = params["other"]
        f = Or(other, prem[0].formula) if params.get("side") == "right" else Or(prem[0].formula, other)
        return AnnotatedFormula(f, prem[0].interval)
    if kind == CONJ:
        need(2)
        if prem[0].interval != prem[1].interval:
            raise TemporalInferenceError("CONJ premises must share one interval")
        return AnnotatedFormula(And(prem[0].formula, prem[1].formula), prem[0].interval)
    if kind in (BOXPLUS, BOXMINUS):
        need(1)
        r: Interval = params["interval"]
        iv = prem[0].interval
        res = Interval.make(iv.lo - r.lo, iv.hi - r.hi) if kind == BOXPLUS \
            else Interval.make(iv.lo + r.hi, iv.hi + r.lo)
        if res is None:
            raise TemporalInferenceError("resulting interval is empty")
        op = BoxPlus if kind == BOXPLUS else BoxMinus
        return AnnotatedFormula(op(r, prem[0].formula), res)
    if kind in (UNTIL, SINCE):
        need(2)
        r = params["interval"]
        res = _until_core(prem[0].interval, prem[1].interval, r, kind == UNTIL)
        if res is None:
            raise TemporalInferenceError("resulting interval is empty")
        op = Until if kind == UNTIL else Since
        return AnnotatedFormula(op(r, prem[0].formula, prem[1].formula), res)
    if kind in (UNTIL0, SINCE0):
        need(1)
        r = params["interval"]
        if r.lo != 0:
            raise TemporalInferenceError("the zero-distance case needs an interval starting at 0")
        op = Until if kind == UNTIL0 else Since
        return AnnotatedFormula(op(r, params["other"], prem[0].formula), prem[0].interval)
    if kind in (NEXT, PREV):
        need(1)
        op = Next if kind == NEXT else Prev
        return AnnotatedFormula(op(prem[0].formula), prem[0].interval.shift(-1 if kind == NEXT else 1))
    if kind == TOP:
        need(0)
        return AnnotatedFormula(Top(), FULL)
    raise TemporalInferenceError(f"unknown temporal schema {kind!r}")


# ---------------------------------------------------------------------------
# Checker
# ---------------------------------------------------------------------------

class TemporalChecker:
    """Admissibility oracle for the temporal deriver."""

    def __init__(self, kb: KnowledgeBase, tabox: TemporalABox):
        self.kb = kb
        self.tabox = tabox
        self._sk = SkSchemaChecker(kb)
        self._facts = {(f.atom, f.interval) for f in tabox.facts}

    def is_grounded(self, label) -> bool:
        if is_axiom(label):
            return label in set(self.kb.tbox)
        return isinstance(label, AnnotatedFormula) and isinstance(label.formula, Atom) \
            and (label.formula, label.interval) in self._facts

    def admissible(self, premises: Sequence, conclusion, rule: str = "", params=None) -> bool:
        kinds = [rule] if rule else list(KINDS)
        return any(self._check(k, list(premises), conclusion) for k in kinds)

    def _check(self, kind, prem, concl) -> bool:
        if not isinstance(concl, AnnotatedFormula):
            return False
        if kind in (TMP, TC, TE):
            axioms = [p for p in prem if is_axiom(p)]
            ann = [p for p in prem if not is_axiom(p)]
            if not all(isinstance(p, AnnotatedFormula) and p.interval == concl.interval for p in ann):
                return False
            inner = axioms + [p.formula for p in ann]
            sk_kind = {TMP: MPS, TC: CS, TE: ES}[kind]
            return self._sk._check(sk_kind, inner, concl.formula)
        if not all(isinstance(p, AnnotatedFormula) for p in prem):
            return False
        f, iv = concl.formula, concl.interval
        if kind == COAL:
            if len(prem) < 2 or not all(_same(p.formula, f) for p in prem):
                return False
            return union_if_contiguous(p.interval for p in prem) == iv
        if kind == SEP:
            return len(prem) == 1 and _same(prem[0].formula, f) and iv.issubset(prem[0].interval)
        if kind == DISJ:
            return len(prem) == 1 and isinstance(f, Or) and prem[0].interval == iv and \
                (_same(f.left, prem[0].formula) or _same(f.right, prem[0].formula))
        if kind == CONJ:
            return len(prem) == 2 and isinstance(f, And) and all(p.interval == iv for p in prem) \
                and _same(f.left, prem[0].formula) and _same(f.right, prem[1].formula)
        if kind == TOP:
            return not prem and isinstance(f, Top) and iv == FULL
        try:
            if kind in (BOXPLUS, BOXMINUS, NEXT, PREV):
                op = {BOXPLUS: BoxPlus, BOXMINUS: BoxMinus, NEXT: Next, PREV: Prev}[kind]
                if len(prem) != 1 or not isinstance(f, op) or not _same(f.sub, prem[0].formula):
                    return False
                params = {"interval": f.interval} if kind in (BOXPLUS, BOXMINUS) else {}
                return infer_temporal(kind, prem, params).interval == iv
            if kind in (UNTIL, SINCE):
                op = Until if kind == UNTIL else Since
                if len(prem) != 2 or not isinstance(f, op):
                    return False
                if not (_same(f.left, prem[0].formula) and _same(f.right, prem[1].formula)):
                    return False
                return infer_temporal(kind, prem, {"interval": f.interval}).interval == iv
            if kind in (UNTIL0, SINCE0):
                op = Until if kind == UNTIL0 else Since
                return len(prem) == 1 and isinstance(f, op) and f.interval.lo == 0 and \
                    _same(f.right, prem[0].formula) and prem[0].interval == iv
        except TemporalInferenceError:
            return False
        return False


def temporal_checker(kb: KnowledgeBase, tabox: TemporalABox) -> TemporalChecker:
    return TemporalChecker(kb, tabox)


# ---------------------------------------------------------------------------
# Proof construction
# ---------------------------------------------------------------------------

def relevant_window(f: Formula, iota: Interval) -> Interval:
    """Points whose ABox state can matter for ``f`` anywhere in ``iota``."""
    back, fwd = reach(f)
    return Interval(iota.lo - back, iota.hi + fwd)


class _Builder:
    def __init__(self, kb: KnowledgeBase, tabox: TemporalABox, window: Interval,
                 depth_bound: Optional[int]):
        self.kb = kb
        self.tabox = tabox
        self.window = window
        self.depth_bound = depth_bound
        self.g = ProofGraph()
        self.memo: Dict[tuple, int] = {}
        self.narrowed_from: Dict[int, int] = {}
        self.ev = Evaluator(kb, tabox, depth_bound)
        self.rulers = compute_rulers(tabox, window)

    # vertices are shared by label so repeated sub-derivations cost nothing
    def node(self, label, sources: Sequence[int] = (), rule: str = "", leaf: bool = False) -> int:
        key = label.canonical_key() if hasattr(label, "canonical_key") else ("raw", label)
        if key in self.memo:
            return self.memo[key]
        v = self.g.add_vertex(label)
        if not leaf:
            self.g.add_edge(list(sources), v, rule)
        self.memo[key] = v
        return v

    def label(self, v: int) -> AnnotatedFormula:
        return self.g.labels[v]

    def sep(self, v: int, target: Interval) -> int:
        lab = self.label(v)
        if lab.interval == target:
            return v
        # SEP is transitive: narrow the original vertex, never a narrowed copy
        v = self.narrowed_from.get(v, v)
        before = len(self.g.labels)
        w = self.node(AnnotatedFormula(lab.formula, target), [v], SEP)
        if len(self.g.labels) > before:
            self.narrowed_from[w] = v
        return w

    def coalesce(self, items: List[Tuple[Interval, int]]) -> List[Tuple[Interval, int]]:
        """Merge touching intervals of one formula with as few premises as possible."""
        items = sorted(set(items), key=lambda x: (x[0].lo, -x[0].hi if x[0].hi != FULL.hi else 0))
        groups: List[List[Tuple[Interval, int]]] = []
        hull = None
        for iv, v in sorted(items, key=lambda x: x[0]):
            if groups and hull.touches(iv):
                groups[-1].append((iv, v))
                hull = hull.hull(iv)
            else:
                groups.append([(iv, v)])
                hull = iv
        out = []
        for grp in groups:
            h = grp[0][0]
            for iv, _ in grp:
                h = h.hull(iv)
            chosen = cover(h, [iv for iv, _ in grp])
            by_iv = {}
            for iv, v in grp:
                by_iv.setdefault(iv, v)
            if len(chosen) == 1:
                out.append((h, by_iv[chosen[0]]))
                continue
            f = self.label(by_iv[chosen[0]]).formula
            v = self.node(AnnotatedFormula(f, h), [by_iv[iv] for iv in chosen], COAL)
            out.append((h, v))
        return out

    # -- facts ----------------------------------------------------------------
    def fact_plan(self, a: Atom, seg: Interval) -> Optional[Tuple[int, List[Interval]]]:
        pieces = [f.interval for f in self.tabox.facts if f.atom == a]
        chosen = cover(seg, pieces)
        if chosen is None:
            return None
        u = union_if_contiguous(chosen)
        cost = len(chosen) + (1 if len(chosen) > 1 else 0) + (1 if u != seg else 0)
        return cost, chosen

    def fact_vertex(self, a: Atom, seg: Interval, clip: bool = True) -> int:
        _, chosen = self.fact_plan(a, seg)
        leaves = [self.node(AnnotatedFormula(a, iv), leaf=True) for iv in chosen]
        if len(leaves) == 1:
            v = leaves[0]
        else:
            v = self.node(AnnotatedFormula(a, union_if_contiguous(chosen)), leaves, COAL)
        return self.sep(v, seg) if clip else v

    # -- CQ leaves --------------------------------------------------------------
    def segments(self, q: CQ) -> List[List[Tuple[Interval, frozenset]]]:
        """Runs of adjacent rulers on which q holds, cut greedily into
        segments whose common facts still entail q."""
        runs: List[List[Tuple[Interval, frozenset]]] = []
        prev = None
        for r in self.rulers:
            state = self.state(r)
            if not self.ev.cq_holds(q, state):
                prev = None
                continue
            if prev is not None and prev.hi + 1 == r.lo:
                runs[-1].append((r, state))
            else:
                runs.append([(r, state)])
            prev = r
        out = []
        for run in runs:
            segs: List[Tuple[Interval, frozenset]] = []
            for r, state in run:
                if segs:
                    iv, common = segs[-1]
                    merged = common & state
                    if self.ev.cq_holds(q, merged):
                        segs[-1] = (iv.hull(r), merged)
                        continue
                segs.append((r, state))
            out.append(segs)
        return out

    def state(self, r: Interval) -> frozenset:
        probe = r.lo if r.lo != FULL.lo else r.hi
        if probe == FULL.hi:
            probe = 0
        return self.tabox.holding_at(probe)

    def cq_items(self, q: CQ) -> List[Tuple[Interval, int]]:
        items = []
        for run in self.segments(q):
            run_items = []
            for seg, state in run:
                v = self.cq_segment(q, seg, state)
                run_items.append((self.label(v).interval, v))
            items.extend(self.coalesce(run_items))
        return items

    def cq_segment(self, q: CQ, seg: Interval, state: frozenset) -> int:
        atoms = sorted(state, key=Atom.key)
        sub_kb = KnowledgeBase(self.kb.tbox, tuple(atoms))
        goal = SearchGoal(sub_kb, q, (), "sk", "tree_size", depth_bound=self.depth_bound)
        leaf_cost = {}
        for a in atoms:
            fp = self.fact_plan(a, seg)
            if fp is not None:
                leaf_cost[a] = fp[0]
        plan = tree_plan(goal, Structure.build(goal), leaf_cost)
        vertex: Dict[Atom, int] = {}
        axiom_v: Dict[int, int] = {}

        def build(a: Atom) -> int:
            if a in vertex:
                return vertex[a]
            d = plan.choice[a]
            if d is None:
                vertex[a] = self.fact_vertex(a, seg)
            else:
                srcs = [build(p) for p in d.premises]
                if d.rule_index not in axiom_v:
                    axiom_v[d.rule_index] = self.node(self.kb.tbox[d.rule_index], leaf=True)
                vertex[a] = self.node(AnnotatedFormula(a, seg), srcs + [axiom_v[d.rule_index]], TMP)
            return vertex[a]

        inst = goal.instance
        for a in plan.image:
            build(a)
        kind, prem = final_shape(inst, plan.image, False)
        if kind == "atom":
            if plan.choice[prem[0]] is None:
                # a bare fact is usable on its whole extent; later steps narrow it
                return self.fact_vertex(prem[0], seg, clip=False)
            return vertex[prem[0]]
        if kind == "E":
            return self.node(AnnotatedFormula(inst, seg), [vertex[prem[0]]], TE)
        c = self.node(AnnotatedFormula(Conjunction(tuple(prem)), seg), [vertex[a] for a in prem], TC)
        if kind == "C":
            return c
        return self.node(AnnotatedFormula(inst, seg), [c], TE)

    # -- operators --------------------------------------------------------------
    def items(self, f: Formula) -> List[Tuple[Interval, int]]:
        if isinstance(f, CQLeaf):
            return self.cq_items(f.cq)
        if isinstance(f, Top):
            return [(FULL, self.node(AnnotatedFormula(Top(), FULL), [], TOP))]
        if isinstance(f, (And, Or)):
            left, right = self.items(f.left), self.items(f.right)
            out = []
            if isinstance(f, And):
                for iv, v in left:
                    for jv, w in right:
                        k = iv.intersect(jv)
                        if k is not None:
                            lab = AnnotatedFormula(f, k)
                            out.append((k, self.node(lab, [self.sep(v, k), self.sep(w, k)], CONJ)))
            else:
                for iv, v in left:
                    out.append((iv, self.node(AnnotatedFormula(f, iv), [v], DISJ)))
                for iv, v in right:
                    out.append((iv, self.node(AnnotatedFormula(f, iv), [v], DISJ)))
            return self.coalesce(out)
        if isinstance(f, (BoxPlus, BoxMinus, Next, Prev)):
            kind = {BoxPlus: BOXPLUS, BoxMinus: BOXMINUS, Next: NEXT, Prev: PREV}[type(f)]
            out = []
            for iv, v in self.items(f.sub):
                params = {"interval": f.interval} if kind in (BOXPLUS, BOXMINUS) else {}
                try:
                    res = infer_temporal(kind, [self.label(v)], params)
                except TemporalInferenceError:
                    continue
                out.append((res.interval, self.node(AnnotatedFormula(f, res.interval), [v], kind)))
            return self.coalesce(out)
        if isinstance(f, (Until, Since)):
            fwd = isinstance(f, Until)
            left, right = self.items(f.left), self.items(f.right)
            out = []
            for iv, v in left:
                for jv, w in right:
                    res = _until_core(iv, jv, f.interval, fwd)
                    if res is not None:
                        out.append((res, self.node(AnnotatedFormula(f, res), [v, w],
                                                   UNTIL if fwd else SINCE)))
            if f.interval.lo == 0:
                for jv, w in right:
                    out.append((jv, self.node(AnnotatedFormula(f, jv), [w], UNTIL0 if fwd else SINCE0)))
            return self.coalesce(out)
        raise TypeError(f"unsupported formula {f!r}")


def temporal_min_proof(kb: KnowledgeBase, tabox: TemporalABox, query, answers: Sequence[Constant],
                       iota: Interval, depth_bound: Optional[int] = None) -> Proof:
    """A proof of ``query(answers)@iota``.

    Subformulas are derived on maximal intervals inside the window that can
    influence ``iota``; COAL merges pieces as soon as possible and SEP is
    used as the last step.  Atemporal parts are tree-size minimal per stretch
    of constant ABox state, but the overall proof is not guaranteed to be
    minimal, so ``Proof.minimal`` is False.
    """
    if isinstance(query, (MTCQ, CQ)):
        f = query.instantiate(answers)
    else:
        f = query
    if isinstance(f, CQ):
        f = CQLeaf(f)
    if isinstance(f, Top):
        raise ValueError("TOP holds everywhere and needs no proof")
    b = _Builder(kb, tabox, relevant_window(f, iota), depth_bound)
    for iv, v in b.items(f):
        if iota.issubset(iv):
            sink = b.sep(v, iota)
            from ..graph import prune_to
            p = prune_to(b.g, sink)
            p.minimal = False
            return p
    raise NotEntailed(f"{f} does not hold throughout {iota}")


def tree_size_bound(kb: KnowledgeBase, tabox: TemporalABox, query, answers: Sequence[Constant],
                    iota: Interval, depth_bound: Optional[int] = None) -> int:
    """Upper bound on the tree size of ``temporal_min_proof``'s output.

    With R the number of rulers in the relevant window, S_psi the largest
    atemporal tree size (unit leaf costs) of a CQ leaf over one segment and
    c = |tem(A)| + 2 the worst cost of covering a fact:

    * CQ leaf: n = R items, each of tree size at most R * c * S_psi + 1
    * AND: P = n_l + n_r items of size at most P * (B_l + B_r + 3) + 1
    * OR: P = n_l + n_r, size P * (max(B_l, B_r) + 1) + 1
    * box, next, previous: P = n, size P * (B + 1) + 1
    * until, since: P = n_l + 2 n_r, size P * (B_l + B_r + 1) + 1

    and one more vertex for the closing SEP.  The same recursion covers
    finite and unbounded target intervals; only R changes.
    """
    if isinstance(query, (MTCQ, CQ)):
        f = query.instantiate(answers)
    else:
        f = query
    if isinstance(f, CQ):
        f = CQLeaf(f)
    b = _Builder(kb, tabox, relevant_window(f, iota), depth_bound)
    R = len(b.rulers)
    c = len(tabox.facts) + 2

    def leaf_size(q: CQ) -> int:
        worst = 1
        for run in b.segments(q):
            for _, state in run:
                sub_kb = KnowledgeBase(kb.tbox, tuple(sorted(state, key=Atom.key)))
                goal = SearchGoal(sub_kb, q, (), "sk", "tree_size", depth_bound=depth_bound)
                worst = max(worst, tree_plan(goal).cost)
        return worst

    def rec(g) -> Tuple[int, int]:
        if isinstance(g, CQLeaf):
            return R, R * c * leaf_size(g.cq) + 1
        if isinstance(g, Top):
            return 1, 1
        if isinstance(g, (BoxPlus, BoxMinus, Next, Prev)):
            n, s = rec(g.sub)
            return n, n * (s + 1) + 1
        (nl, sl), (nr, sr) = rec(g.left), rec(g.right)
        if isinstance(g, And):
            p = nl + nr
            return p, p * (sl + sr + 3) + 1
        if isinstance(g, Or):
            p = nl + nr
            return p, p * (max(sl, sr) + 1) + 1
        p = nl + 2 * nr
        return p, p * (sl + sr + 1) + 1

    return rec(f)[1] + 1
