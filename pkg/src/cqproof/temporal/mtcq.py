"""Metric temporal CQs: syntax tree, temporal ABoxes, the point-wise
evaluator and the rewriting into next/previous form."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from ..chase import ChaseConfig, chase
from ..logic import Atom, CQ, Constant, KnowledgeBase, Variable, iter_matches, label_key
from .intervals import FULL, NEG_INF, POS_INF, Interval, coalesce


def _check_op_interval(iv: Interval) -> None:
    if not iv.is_finite or iv.lo < 0:
        raise ValueError(f"operator intervals must be finite and non-negative, got {iv}")


@dataclass(frozen=True)
class CQLeaf:
    cq: CQ

    def canonical_key(self):
        return label_key(self.cq)

    def __str__(self):
        if len(self.cq.atoms) == 1 and not self.cq.existential_vars:
            return str(self.cq.atoms[0])
        return "{" + ", ".join(str(a) for a in self.cq.atoms) + "}"


@dataclass(frozen=True)
class Top:
    def canonical_key(self):
        return ("top",)

    def __str__(self):
        return "TOP"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def canonical_key(self):
        return ("and", self.left.canonical_key(), self.right.canonical_key())

    def __str__(self):
        return f"({self.left} AND {self.right})"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def canonical_key(self):
        return ("or", self.left.canonical_key(), self.right.canonical_key())

    def __str__(self):
        return f"({self.left} OR {self.right})"


@dataclass(frozen=True)
class BoxPlus:
    interval: Interval
    sub: "Formula"

    def __post_init__(self):
        _check_op_interval(self.interval)

    def canonical_key(self):
        return ("boxp", self.interval, self.sub.canonical_key())

    def __str__(self):
        return f"BOXP[{self.interval.lo},{self.interval.hi}] {_wrap(self.sub)}"


@dataclass(frozen=True)
class BoxMinus:
    interval: Interval
    sub: "Formula"

    def __post_init__(self):
        _check_op_interval(self.interval)

    def canonical_key(self):
        return ("boxm", self.interval, self.sub.canonical_key())

    def __str__(self):
        return f"BOXM[{self.interval.lo},{self.interval.hi}] {_wrap(self.sub)}"


@dataclass(frozen=True)
class Until:
    interval: Interval
    left: "Formula"
    right: "Formula"

    def __post_init__(self):
        _check_op_interval(self.interval)

    def canonical_key(self):
        return ("until", self.interval, self.left.canonical_key(), self.right.canonical_key())

    def __str__(self):
        return f"({self.left} UNTIL[{self.interval.lo},{self.interval.hi}] {self.right})"


@dataclass(frozen=True)
class Since:
    interval: Interval
    left: "Formula"
    right: "Formula"

    def __post_init__(self):
        _check_op_interval(self.interval)

    def canonical_key(self):
        return ("since", self.interval, self.left.canonical_key(), self.right.canonical_key())

    def __str__(self):
        return f"({self.left} SINCE[{self.interval.lo},{self.interval.hi}] {self.right})"


@dataclass(frozen=True)
class Next:
    """Holds at i iff the argument holds at i+1."""
    sub: "Formula"

    def canonical_key(self):
        return ("next", self.sub.canonical_key())

    def __str__(self):
        return f"NEXT {_wrap(self.sub)}"


@dataclass(frozen=True)
class Prev:
    sub: "Formula"

    def canonical_key(self):
        return ("prev", self.sub.canonical_key())

    def __str__(self):
        return f"PREV {_wrap(self.sub)}"


Formula = Union[CQLeaf, Top, And, Or, BoxPlus, BoxMinus, Until, Since, Next, Prev]
UNARY = (BoxPlus, BoxMinus, Next, Prev)
BINARY = (And, Or, Until, Since)


def _wrap(f) -> str:
    s = str(f)
    return s if isinstance(f, (CQLeaf, Top)) or s.startswith("(") else f"({s})"


def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, UNARY):
        return (f.sub,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    return ()


def rebuild(f: Formula, kids: Sequence[Formula]) -> Formula:
    if isinstance(f, (BoxPlus, BoxMinus)):
        return type(f)(f.interval, kids[0])
    if isinstance(f, (Next, Prev)):
        return type(f)(kids[0])
    if isinstance(f, (Until, Since)):
        return type(f)(f.interval, kids[0], kids[1])
    if isinstance(f, (And, Or)):
        return type(f)(kids[0], kids[1])
    return f


def formula_depth(f: Formula) -> int:
    """Temporal operator nesting depth (CQ leaves and TOP have depth 0)."""
    d = max((formula_depth(c) for c in children(f)), default=0)
    return d + (1 if isinstance(f, (BoxPlus, BoxMinus, Until, Since, Next, Prev)) else 0)


def leaves(f: Formula) -> List[CQLeaf]:
    if isinstance(f, CQLeaf):
        return [f]
    return [l for c in children(f) for l in leaves(c)]


def reach(f: Formula) -> Tuple[int, int]:
    """How far (backwards, forwards) truth at a point depends on other points."""
    if isinstance(f, (CQLeaf, Top)):
        return (0, 0)
    if isinstance(f, (And, Or)):
        a, b = reach(f.left), reach(f.right)
        return (max(a[0], b[0]), max(a[1], b[1]))
    r2 = 1 if isinstance(f, (Next, Prev)) else int(f.interval.hi)
    subs = [reach(c) for c in children(f)]
    back = max(s[0] for s in subs)
    fwd = max(s[1] for s in subs)
    if isinstance(f, (BoxPlus, Until, Next)):
        return (back, fwd + r2)
    return (back + r2, fwd)


def operator_span(f: Formula) -> int:
    """Sum of the right endpoints of all operator intervals."""
    own = 0
    if isinstance(f, (BoxPlus, BoxMinus, Until, Since)):
        own = int(f.interval.hi)
    elif isinstance(f, (Next, Prev)):
        own = 1
    return own + sum(operator_span(c) for c in children(f))


@dataclass(frozen=True)
class MTCQ:
    answer_vars: Tuple[Variable, ...]
    formula: Formula

    def __post_init__(self):
        object.__setattr__(self, "answer_vars", tuple(self.answer_vars))
        ans = set(self.answer_vars)
        seen = set()
        for leaf in leaves(self.formula):
            if not set(leaf.cq.answer_vars) <= ans:
                raise ValueError("leaf answer variables must be query answer variables")
            seen.update(leaf.cq.answer_vars)
        if seen != ans:
            raise ValueError("every answer variable must occur in some CQ")

    def instantiate(self, answers: Sequence[Constant]) -> Formula:
        if len(answers) != len(self.answer_vars):
            raise ValueError(f"expected {len(self.answer_vars)} answers, got {len(answers)}")
        binding = dict(zip(self.answer_vars, answers))

        def go(f):
            if isinstance(f, CQLeaf):
                return CQLeaf(f.cq.instantiate([binding[v] for v in f.cq.answer_vars]))
            return rebuild(f, [go(c) for c in children(f)])

        return go(self.formula)

    def __str__(self):
        return str(self.formula)


def make_leaf(cq_atoms: Sequence[Atom], answer_vars: Sequence[Variable]) -> CQLeaf:
    occurring = {v for a in cq_atoms for v in a.variables()}
    return CQLeaf(CQ(tuple(v for v in answer_vars if v in occurring), tuple(cq_atoms)))


# ---------------------------------------------------------------------------
# Temporal ABoxes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TemporalFact:
    atom: Atom
    interval: Interval

    def __str__(self):
        return f"{self.atom}@{self.interval}"


@dataclass(frozen=True)
class TemporalABox:
    facts: Tuple[TemporalFact, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "facts", tuple(dict.fromkeys(self.facts)))
        for f in self.facts:
            if not all(isinstance(t, Constant) for t in f.atom.args):
                raise ValueError(f"temporal fact {f} must be ground over individual names")

    def tem(self) -> List[Interval]:
        return [f.interval for f in self.facts]

    def holding_at(self, t: int) -> FrozenSet[Atom]:
        return frozenset(f.atom for f in self.facts if t in f.interval)

    def holding_on(self, iv: Interval) -> FrozenSet[Atom]:
        """Atoms asserted throughout ``iv`` by a single fact."""
        return frozenset(f.atom for f in self.facts if iv.issubset(f.interval))

    def endpoints(self) -> List[int]:
        pts = set()
        for f in self.facts:
            for x in (f.interval.lo, f.interval.hi):
                if x not in (NEG_INF, POS_INF):
                    pts.add(int(x))
        return sorted(pts)

    def individuals(self) -> List[Constant]:
        return list(dict.fromkeys(t for f in self.facts for t in f.atom.args))


def compute_rulers(tabox: TemporalABox, window: Interval = FULL) -> List[Interval]:
    """Split ``window`` into maximal stretches where the same facts hold."""
    cuts = set()
    for f in tabox.facts:
        cuts.add(f.interval.lo)
        cuts.add(f.interval.hi + 1)
    bounds = sorted(c for c in cuts if c not in (NEG_INF, POS_INF) and window.lo < c <= window.hi)
    out: List[Interval] = []
    lo = window.lo
    for c in bounds:
        out.append(Interval(lo, c - 1))
        lo = c
    out.append(Interval(lo, window.hi))
    merged: List[Interval] = []
    for iv in out:
        if merged and _same_state(tabox, merged[-1], iv):
            merged[-1] = merged[-1].hull(iv)
        else:
            merged.append(iv)
    return merged


def _same_state(tabox: TemporalABox, a: Interval, b: Interval) -> bool:
    probe = lambda iv: iv.lo if iv.lo != NEG_INF else iv.hi
    return tabox.holding_at(probe(a)) == tabox.holding_at(probe(b))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

class Evaluator:
    """Certain-answer evaluation over the per-time-point canonical model."""

    def __init__(self, kb: KnowledgeBase, tabox: TemporalABox, depth_bound: Optional[int] = None):
        self.kb = kb
        self.tabox = tabox
        self.depth_bound = depth_bound
        self._models: Dict[FrozenSet[Atom], frozenset] = {}
        self._memo: Dict[tuple, bool] = {}

    def model(self, state: FrozenSet[Atom], bound: int) -> frozenset:
        key = (state, bound)
        if key not in self._models:
            sub = KnowledgeBase(self.kb.tbox, tuple(sorted(state, key=Atom.key)))
            self._models[key] = chase(sub, cfg=ChaseConfig(bound)).as_set()
        return self._models[key]

    def cq_holds(self, q: CQ, state: FrozenSet[Atom]) -> bool:
        bound = self.depth_bound if self.depth_bound is not None else (len(self.kb.tbox) + 1) * len(q.atoms)
        model = self.model(state, bound)
        return next(iter_matches(q.atoms, model), None) is not None

    def holds(self, f: Formula, t: int) -> bool:
        key = (f, t)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._memo[key] = self._holds(f, t)
        return hit

    def _holds(self, f: Formula, t: int) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, CQLeaf):
            return self.cq_holds(f.cq, self.tabox.holding_at(t))
        if isinstance(f, And):
            return self.holds(f.left, t) and self.holds(f.right, t)
        if isinstance(f, Or):
            return self.holds(f.left, t) or self.holds(f.right, t)
        if isinstance(f, Next):
            return self.holds(f.sub, t + 1)
        if isinstance(f, Prev):
            return self.holds(f.sub, t - 1)
        r = f.interval
        if isinstance(f, BoxPlus):
            return all(self.holds(f.sub, t + k) for k in r.points())
        if isinstance(f, BoxMinus):
            return all(self.holds(f.sub, t - k) for k in r.points())
        step = 1 if isinstance(f, Until) else -1
        for k in r.points():
            if self.holds(f.right, t + step * k) and all(
                    self.holds(f.left, t + step * j) for j in range(k)):
                return True
        return False

    def truth_intervals(self, f: Formula, window: Optional[Interval] = None) -> List[Interval]:
        """Maximal intervals where ``f`` holds.

        Without a window the answer is exact on all of Z: beyond the last
        fact endpoint plus the formula's reach every point looks the same,
        so intervals touching the scanned stretch's border extend to infinity.
        """
        back, fwd = reach(f)
        pts = self.tabox.endpoints() or [0]
        lo = pts[0] - back - fwd - 1
        hi = pts[-1] + back + fwd + 1
        if window is not None and window.is_finite:
            lo, hi = min(lo, int(window.lo)), max(hi, int(window.hi))
        true_pts = [t for t in range(lo, hi + 1) if self.holds(f, t)]
        ivs = coalesce(Interval.point(t) for t in true_pts)
        out = []
        for iv in ivs:
            a = NEG_INF if iv.lo == lo else iv.lo
            b = POS_INF if iv.hi == hi else iv.hi
            out.append(Interval(a, b))
        if window is not None:
            out = [x for x in (iv.intersect(window) for iv in out) if x is not None]
        return out


def eval_mtcq(kb: KnowledgeBase, tabox: TemporalABox, mtcq, answers: Sequence[Constant] = (),
              window: Optional[Interval] = None) -> List[Interval]:
    """Maximal intervals (within ``window`` if given) on which the certain
    answer ``answers`` holds."""
    f = mtcq.instantiate(answers) if isinstance(mtcq, MTCQ) else mtcq
    return Evaluator(kb, tabox).truth_intervals(f, window)


# ---------------------------------------------------------------------------
# Next-form rewriting
# ---------------------------------------------------------------------------

def expand_next_form(f):
    """Rewrite every bounded box/until/since into NEXT/PREV, AND and OR."""
    if isinstance(f, MTCQ):
        return MTCQ(f.answer_vars, expand_next_form(f.formula))
    if isinstance(f, (CQLeaf, Top)):
        return f
    if isinstance(f, (BoxPlus, BoxMinus)):
        sub = expand_next_form(f.sub)
        step = Next if isinstance(f, BoxPlus) else Prev
        return _expand_box(sub, int(f.interval.lo), int(f.interval.hi), step)
    if isinstance(f, (Until, Since)):
        left, right = expand_next_form(f.left), expand_next_form(f.right)
        step = Next if isinstance(f, Until) else Prev
        return _expand_until(left, right, int(f.interval.lo), int(f.interval.hi), step)
    return rebuild(f, [expand_next_form(c) for c in children(f)])


def _expand_box(phi, r1: int, r2: int, step):
    if r1 > 0:
        return step(_expand_box(phi, r1 - 1, r2 - 1, step))
    if r2 > 0:
        return And(phi, step(_expand_box(phi, 0, r2 - 1, step)))
    return phi


def _expand_until(phi, psi, r1: int, r2: int, step):
    if r1 > 0:
        return And(phi, step(_expand_until(phi, psi, r1 - 1, r2 - 1, step)))
    if r2 > 0:
        return Or(psi, And(phi, step(_expand_until(phi, psi, 0, r2 - 1, step))))
    return psi
