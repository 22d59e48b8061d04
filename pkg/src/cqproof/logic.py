"""First-order syntax: terms, atoms, conjunctive queries, DL-Lite_R axioms and
existential rules, plus the substitution/matching machinery everything else
is built on.

All values are immutable.  Inverse roles never survive construction of an
atom: ``P-(a, b)`` is always stored as ``P(b, a)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _check_ident(name: str) -> None:
    if not isinstance(name, str) or not _IDENT.match(name):
        raise ValueError(f"invalid identifier: {name!r}")


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    name: str

    def __post_init__(self):
        _check_ident(self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Variable:
    name: str

    def __post_init__(self):
        _check_ident(self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class SkolemTerm:
    function: str
    argument: "Term"

    def __post_init__(self):
        _check_ident(self.function)

    def __str__(self):
        return f"{self.function}({self.argument})"


Term = Union[Constant, Variable, SkolemTerm]
Substitution = Dict[Variable, Term]


def term_key(t: Term) -> tuple:
    """Total order on terms: constants < variables < Skolem terms."""
    if isinstance(t, Constant):
        return (0, t.name)
    if isinstance(t, Variable):
        return (1, t.name)
    return (2, t.function, term_key(t.argument))


def term_depth(t: Term) -> int:
    """Skolem nesting depth; constants and variables have depth 0."""
    d = 0
    while isinstance(t, SkolemTerm):
        d += 1
        t = t.argument
    return d


def is_ground_term(t: Term) -> bool:
    while isinstance(t, SkolemTerm):
        t = t.argument
    return isinstance(t, Constant)


def term_variables(t: Term) -> Iterator[Variable]:
    while isinstance(t, SkolemTerm):
        t = t.argument
    if isinstance(t, Variable):
        yield t


def apply_term(t: Term, sub: Mapping[Variable, Term]) -> Term:
    if isinstance(t, Variable):
        return sub.get(t, t)
    if isinstance(t, SkolemTerm):
        return SkolemTerm(t.function, apply_term(t.argument, sub))
    return t


# ---------------------------------------------------------------------------
# Atoms, conjunctions, CQs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    predicate: str
    args: Tuple[Term, ...]

    def __post_init__(self):
        _check_ident(self.predicate)
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) not in (1, 2):
            raise ValueError(f"atom {self.predicate} must have arity 1 or 2, got {len(self.args)}")

    @property
    def arity(self) -> int:
        return len(self.args)

    def is_ground(self) -> bool:
        return all(is_ground_term(t) for t in self.args)

    def variables(self) -> Iterator[Variable]:
        for t in self.args:
            yield from term_variables(t)

    def substitute(self, sub: Mapping[Variable, Term]) -> "Atom":
        return Atom(self.predicate, tuple(apply_term(t, sub) for t in self.args))

    def key(self) -> tuple:
        return (self.predicate, tuple(term_key(t) for t in self.args))

    def __str__(self):
        return f"{self.predicate}({', '.join(str(t) for t in self.args)})"


def atom(predicate: str, *args: Term) -> Atom:
    return Atom(predicate, tuple(args))


@dataclass(frozen=True)
class Conjunction:
    """Ordered ground conjunction as produced by the C_s schema.

    Duplicates are kept: ``A(a) & A(a)`` and ``A(a)`` are different labels.
    """

    atoms: Tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise ValueError("empty conjunction")

    def is_ground(self) -> bool:
        return all(a.is_ground() for a in self.atoms)

    def __str__(self):
        return " & ".join(str(a) for a in self.atoms)


def _ordered_unique(items: Iterable) -> list:
    seen = set()
    out = []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


@dataclass(frozen=True)
class CQ:
    answer_vars: Tuple[Variable, ...]
    atoms: Tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "answer_vars", tuple(self.answer_vars))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise ValueError("a CQ needs at least one atom")
        occurring = set(self.variables())
        for v in self.answer_vars:
            if v not in occurring:
                raise ValueError(f"answer variable {v} does not occur in the query")
        if len(set(self.answer_vars)) != len(self.answer_vars):
            raise ValueError("duplicate answer variable")

    def variables(self) -> List[Variable]:
        return _ordered_unique(v for a in self.atoms for v in a.variables())

    @property
    def existential_vars(self) -> List[Variable]:
        ans = set(self.answer_vars)
        return [v for v in self.variables() if v not in ans]

    def constants(self) -> List[Constant]:
        return _ordered_unique(t for a in self.atoms for t in a.args if isinstance(t, Constant))

    def terms(self) -> List[Term]:
        return _ordered_unique(t for a in self.atoms for t in a.args)

    def is_boolean(self) -> bool:
        return not self.answer_vars

    def is_ground(self) -> bool:
        return all(a.is_ground() for a in self.atoms)

    def instantiate(self, answers: Sequence[Term]) -> "CQ":
        """q(a): substitute the answer tuple, yielding a Boolean CQ."""
        if len(answers) != len(self.answer_vars):
            raise ValueError(f"expected {len(self.answer_vars)} answers, got {len(answers)}")
        sub = dict(zip(self.answer_vars, answers))
        return CQ((), tuple(a.substitute(sub) for a in self.atoms))

    def __str__(self):
        ex = self.existential_vars
        body = " & ".join(str(a) for a in self.atoms)
        head = f"exists {', '.join(str(v) for v in ex)} . " if ex else ""
        if self.answer_vars:
            return f"[{', '.join(str(v) for v in self.answer_vars)}] {head}{body}"
        return head + body


def boolean_cq(*atoms: Atom) -> CQ:
    return CQ((), tuple(atoms))


def as_cq(label) -> CQ:
    """View an atom, a ground conjunction or a CQ uniformly as a CQ."""
    if isinstance(label, CQ):
        return label
    if isinstance(label, Atom):
        return CQ((), (label,))
    if isinstance(label, Conjunction):
        return CQ((), label.atoms)
    raise TypeError(f"not a query-like label: {label!r}")


# ---------------------------------------------------------------------------
# DL-Lite_R axioms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Role:
    name: str
    inverse: bool = False

    def __post_init__(self):
        _check_ident(self.name)

    def inv(self) -> "Role":
        return Role(self.name, not self.inverse)

    def atom(self, s: Term, t: Term) -> Atom:
        return Atom(self.name, (t, s) if self.inverse else (s, t))

    def __str__(self):
        return self.name + ("-" if self.inverse else "")


@dataclass(frozen=True)
class ConceptName:
    name: str

    def __post_init__(self):
        _check_ident(self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Exists:
    role: Role

    def __str__(self):
        return f"exists {self.role}"


ConceptExpr = Union[ConceptName, Exists]


@dataclass(frozen=True)
class ConceptInclusion:
    lhs: ConceptExpr
    rhs: ConceptExpr

    def __str__(self):
        return f"{self.lhs} sub {self.rhs}"


@dataclass(frozen=True)
class RoleInclusion:
    lhs: Role
    rhs: Role

    def __str__(self):
        return f"{self.lhs} rsub {self.rhs}"


DLLiteAxiom = Union[ConceptInclusion, RoleInclusion]


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExistentialRule:
    body: Tuple[Atom, ...]
    head: Tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        object.__setattr__(self, "head", tuple(self.head))
        if not self.body:
            raise ValueError("rule body must be nonempty")
        if not self.head:
            raise ValueError("rule head must be nonempty")
        for a in self.body + self.head:
            if any(isinstance(t, SkolemTerm) for t in a.args):
                raise ValueError("existential rules cannot contain Skolem terms")

    @property
    def frontier_vars(self) -> List[Variable]:
        body_vars = set(v for a in self.body for v in a.variables())
        return _ordered_unique(v for a in self.head for v in a.variables() if v in body_vars)

    @property
    def existential_vars(self) -> List[Variable]:
        body_vars = set(v for a in self.body for v in a.variables())
        return _ordered_unique(v for a in self.head for v in a.variables() if v not in body_vars)

    def __str__(self):
        ex = self.existential_vars
        head = " , ".join(str(a) for a in self.head)
        prefix = f"exists {', '.join(str(v) for v in ex)} . " if ex else ""
        return f"{', '.join(str(a) for a in self.body)} -> {prefix}{head}"


@dataclass(frozen=True)
class SkolemRule:
    body: Tuple[Atom, ...]
    head: Tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        object.__setattr__(self, "head", tuple(self.head))
        body_vars = set(v for a in self.body for v in a.variables())
        for a in self.head:
            for v in a.variables():
                if v not in body_vars:
                    raise ValueError(f"Skolem rule head variable {v} not bound by the body")

    def __str__(self):
        return f"{', '.join(map(str, self.body))} -> {', '.join(map(str, self.head))}"


Axiom = Union[ConceptInclusion, RoleInclusion, ExistentialRule]


def translate_axiom(axiom: Axiom) -> ExistentialRule:
    """Compile a DL-Lite_R inclusion into an equivalent existential rule.

    Existential rules pass through unchanged.
    """
    if isinstance(axiom, ExistentialRule):
        return axiom
    x, y, u = Variable("x"), Variable("y"), Variable("u")
    if isinstance(axiom, RoleInclusion):
        lhs, rhs = axiom.lhs, axiom.rhs
        s, t = (y, x) if lhs.inverse else (x, y)
        return ExistentialRule((Atom(lhs.name, (x, y)),), (rhs.atom(s, t),))
    if not isinstance(axiom, ConceptInclusion):
        raise TypeError(f"not an axiom: {axiom!r}")
    lhs, rhs = axiom.lhs, axiom.rhs
    if isinstance(lhs, ConceptName):
        body = (Atom(lhs.name, (x,)),)
        subject = x
    else:
        role = lhs.role
        body = (Atom(role.name, (x, y)),)
        subject = y if role.inverse else x
    if isinstance(rhs, ConceptName):
        head = (Atom(rhs.name, (subject,)),)
    else:
        fresh = u if subject != u else Variable("w")
        head = (rhs.role.atom(subject, fresh),)
    return ExistentialRule(body, head)


def skolem_name(rule_id, var: Variable) -> str:
    return f"fn_{rule_id}_{var.name}"


def skolemize(rule: ExistentialRule, rule_id) -> SkolemRule:
    """Replace each existential head variable by a unary Skolem term over the
    (single) frontier variable."""
    ex = rule.existential_vars
    if not ex:
        return SkolemRule(rule.body, rule.head)
    frontier = rule.frontier_vars
    if len(frontier) != 1:
        raise ValueError(
            f"only unary Skolem functions are supported; rule {rule} has frontier {frontier}")
    sub = {u: SkolemTerm(skolem_name(rule_id, u), frontier[0]) for u in ex}
    return SkolemRule(rule.body, tuple(a.substitute(sub) for a in rule.head))


def deskolemize(rule: SkolemRule) -> ExistentialRule:
    """Inverse of :func:`skolemize` up to variable renaming."""
    mapping: Dict[SkolemTerm, Variable] = {}
    used = {v.name for a in rule.body + rule.head for v in a.variables()}

    def conv(t: Term) -> Term:
        if isinstance(t, SkolemTerm):
            if t not in mapping:
                base = t.function.rsplit("_", 1)[-1] if t.function.startswith("fn_") else t.function
                name = base
                i = 0
                while name in used:
                    i += 1
                    name = f"{base}{i}"
                used.add(name)
                mapping[t] = Variable(name)
            return mapping[t]
        return t

    head = tuple(Atom(a.predicate, tuple(conv(t) for t in a.args)) for a in rule.head)
    return ExistentialRule(rule.body, head)


def rename_apart(rule: ExistentialRule, avoid: Iterable[str]) -> ExistentialRule:
    taken = set(avoid)
    sub = {}
    for v in _ordered_unique(v for a in rule.body + rule.head for v in a.variables()):
        if v.name in taken:
            sub[v] = fresh_variable(v.name, taken)
        taken.add(sub.get(v, v).name)
    return ExistentialRule(tuple(a.substitute(sub) for a in rule.body),
                           tuple(a.substitute(sub) for a in rule.head))


def fresh_variable(base: str, taken: set) -> Variable:
    base = base.rstrip("0123456789") or "v"
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    taken.add(f"{base}{i}")
    return Variable(f"{base}{i}")


# ---------------------------------------------------------------------------
# Knowledge bases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KnowledgeBase:
    tbox: Tuple[Axiom, ...] = ()
    abox: Tuple[Atom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tbox", tuple(self.tbox))
        object.__setattr__(self, "abox", tuple(_ordered_unique(self.abox)))
        for a in self.abox:
            if not all(isinstance(t, Constant) for t in a.args):
                raise ValueError(f"ABox assertion {a} must only contain individual names")

    def rules(self) -> List[ExistentialRule]:
        return [translate_axiom(ax) for ax in self.tbox]

    def skolem_rules(self) -> List[SkolemRule]:
        return [skolemize(translate_axiom(ax), i) for i, ax in enumerate(self.tbox)]

    def skolem_rule_for(self, axiom: Axiom) -> Optional[SkolemRule]:
        for i, ax in enumerate(self.tbox):
            if ax == axiom:
                return skolemize(translate_axiom(ax), i)
        return None

    def individuals(self) -> List[Constant]:
        return _ordered_unique(t for a in self.abox for t in a.args)

    def is_dl_lite(self) -> bool:
        return all(isinstance(ax, (ConceptInclusion, RoleInclusion)) for ax in self.tbox)


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def _match_term(p: Term, f: Term, sub: Dict[Variable, Term]) -> Optional[Dict[Variable, Term]]:
    if isinstance(p, Variable):
        bound = sub.get(p)
        if bound is None:
            out = dict(sub)
            out[p] = f
            return out
        return sub if bound == f else None
    if isinstance(p, SkolemTerm):
        if isinstance(f, SkolemTerm) and f.function == p.function:
            return _match_term(p.argument, f.argument, sub)
        return None
    return sub if p == f else None


def match_atom(p: Atom, f: Atom, sub: Optional[Dict[Variable, Term]] = None):
    if p.predicate != f.predicate or p.arity != f.arity:
        return None
    cur = {} if sub is None else sub
    for pt, ft in zip(p.args, f.args):
        cur = _match_term(pt, ft, cur)
        if cur is None:
            return None
    return cur


def iter_matches(pattern: Sequence[Atom], facts: Iterable[Atom],
                 initial: Optional[Mapping[Variable, Term]] = None) -> Iterator[Substitution]:
    """Yield every substitution mapping ``pattern`` into ``facts``.

    Fact terms are treated as opaque values, so fact variables are never bound.
    """
    index: Dict[Tuple[str, int], List[Atom]] = {}
    for f in _ordered_unique(facts):
        index.setdefault((f.predicate, f.arity), []).append(f)
    for lst in index.values():
        lst.sort(key=Atom.key)
    pat = _match_order(pattern, index, set(initial or ()))

    def rec(i: int, sub: Dict[Variable, Term]):
        if i == len(pat):
            yield dict(sub)
            return
        for f in index.get((pat[i].predicate, pat[i].arity), ()):
            nxt = match_atom(pat[i], f, sub)
            if nxt is not None:
                yield from rec(i + 1, nxt)

    yield from rec(0, dict(initial or {}))


def _match_order(pattern: Sequence[Atom], index, bound: set) -> List[Atom]:
    """Connected, most-constrained-first order of the pattern atoms."""
    order: List[Atom] = []
    remaining = list(pattern)
    bound = set(bound)
    while remaining:
        best = min(remaining, key=lambda a: (-sum(1 for v in a.variables() if v in bound),
                                             len(index.get((a.predicate, a.arity), ()))))
        remaining.remove(best)
        order.append(best)
        bound.update(best.variables())
    return order


def match(pattern: Sequence[Atom], facts: Iterable[Atom]) -> List[Substitution]:
    """All substitutions ``pi`` with ``pi(pattern)`` a subset of ``facts``.

    Each substitution binds exactly the pattern variables, and the result
    contains no duplicates.
    """
    out = []
    seen = set()
    for sub in iter_matches(pattern, facts):
        k = tuple(sorted(((v.name, term_key(t)) for v, t in sub.items())))
        if k not in seen:
            seen.add(k)
            out.append(sub)
    out.sort(key=lambda s: sorted((v.name, term_key(t)) for v, t in s.items()))
    return out


# ---------------------------------------------------------------------------
# Canonical forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalForm:
    cq: CQ
    renaming: Dict[Variable, Variable] = field(compare=False, hash=False)


def _refine_colors(atoms: List[Atom], fixed: set) -> Dict[Variable, int]:
    """Colour refinement of the existential variables.

    Colours depend only on the structure of the atoms, never on variable
    names, so sorting by them first keeps the canonical form a function of
    the isomorphism class while removing most ties in the search below.
    """
    free = _ordered_unique(v for a in atoms for v in a.variables() if v not in fixed)
    color = {v: 0 for v in free}

    def desc(t):
        if isinstance(t, Variable):
            return ("f", t.name) if t in fixed else ("v", color[t])
        if isinstance(t, Constant):
            return ("c", t.name)
        return ("s", t.function, desc(t.argument))

    classes = 1
    while True:
        sig = {v: [] for v in free}
        for a in atoms:
            args = tuple(desc(t) for t in a.args)
            for i, t in enumerate(a.args):
                for v in term_variables(t):
                    if v in sig:
                        sig[v].append((a.predicate, i, args))
        full = {v: (color[v], tuple(sorted(sig[v]))) for v in free}
        ranks = {k: i for i, k in enumerate(sorted(set(full.values())))}
        color = {v: ranks[full[v]] for v in free}
        if len(ranks) == classes:
            return color
        classes = len(ranks)


def _canonical_search(atoms: List[Atom], fixed: set, names: List[str]):
    """Lexicographically least renaming of the non-fixed variables.

    Returns (sequence of atom keys, renaming var -> index, atom order).
    """

    color = _refine_colors(atoms, fixed)

    def tkey(t: Term, ren: Dict[Variable, int], pending: Dict[Variable, int]) -> tuple:
        if isinstance(t, Variable):
            if t in fixed:
                return (1, t.name)
            if t in ren:
                return (2, color[t], ren[t])
            if t not in pending:
                pending[t] = len(ren) + len(pending)
            return (2, color[t], pending[t])
        if isinstance(t, Constant):
            return (0, t.name)
        return (3, t.function, tkey(t.argument, ren, pending))

    best = [None]

    def rec(remaining: List[Atom], ren: Dict[Variable, int], seq: list):
        if best[0] is not None and seq > best[0][0][: len(seq)]:
            return
        if not remaining:
            if best[0] is None or seq < best[0][0]:
                best[0] = (list(seq), dict(ren))
            return
        scored = []
        for i, a in enumerate(remaining):
            pending: Dict[Variable, int] = {}
            k = (a.predicate, tuple(tkey(t, ren, pending) for t in a.args))
            scored.append((k, i, pending))
        mink = min(s[0] for s in scored)
        for k, i, pending in scored:
            if k != mink:
                continue
            nren = dict(ren)
            nren.update(pending)
            rec(remaining[:i] + remaining[i + 1:], nren, seq + [k])

    rec(atoms, {}, [])
    return best[0]


def canonical_form(q: CQ) -> CanonicalForm:
    atoms = _ordered_unique(q.atoms)
    fixed = set(q.answer_vars)
    _, ren = _canonical_search(atoms, fixed, [])
    taken = {v.name for v in fixed}
    names: Dict[int, Variable] = {}
    i = 0
    for idx in sorted(ren.values()):
        while f"v{i}" in taken:
            i += 1
        names[idx] = Variable(f"v{i}")
        i += 1
    renaming = {v: names[idx] for v, idx in ren.items()}
    new_atoms = sorted(set(a.substitute(renaming) for a in atoms), key=lambda a: _canon_atom_key(a, fixed, renaming))
    return CanonicalForm(CQ(q.answer_vars, tuple(new_atoms)), renaming)


def _canon_atom_key(a: Atom, fixed, renaming) -> tuple:
    inv = {v: int(v.name[1:]) for v in renaming.values()}

    def k(t):
        if isinstance(t, Variable):
            if t in inv and t not in fixed:
                return (2, inv[t])
            return (1, t.name)
        if isinstance(t, Constant):
            return (0, t.name)
        return (3, t.function, k(t.argument))

    return (a.predicate, tuple(k(t) for t in a.args))


def canonicalize_cq(q: CQ) -> CQ:
    """Canonical representative of ``q`` up to renaming of existential
    variables; duplicate atoms collapse, answer variables and constants are
    untouched."""
    return canonical_form(q).cq


def label_key(label) -> tuple:
    """Hashable identity of a sentence, used wherever labels are compared.

    Atoms, ground conjunctions and CQs are compared as Boolean CQs up to
    renaming, so the single-atom ground CQ ``A(a)`` and the assertion
    ``A(a)`` coincide.  Other labels compare structurally.
    """
    if isinstance(label, (Atom, Conjunction, CQ)):
        return ("cq", canonicalize_cq(as_cq(label)))
    if hasattr(label, "canonical_key"):
        return label.canonical_key()
    return ("raw", label)


def same_label(a, b) -> bool:
    return label_key(a) == label_key(b)


# ---------------------------------------------------------------------------
# Freezing
# ---------------------------------------------------------------------------

def freeze_cq(q: CQ, answers: Sequence[Constant], avoid: Iterable[str] = ()) -> List[Atom]:
    """Turn ``q(answers)`` into an ABox: each existential variable becomes a
    distinct fresh individual."""
    if len(answers) != len(q.answer_vars):
        raise ValueError(f"expected {len(q.answer_vars)} answers, got {len(answers)}")
    taken = set(avoid) | {c.name for c in q.constants()} | {a.name for a in answers}
    sub: Dict[Variable, Term] = dict(zip(q.answer_vars, answers))
    for v in q.existential_vars:
        name = f"c_{v.name}"
        i = 0
        while name in taken:
            i += 1
            name = f"c_{v.name}{i}"
        taken.add(name)
        sub[v] = Constant(name)
    return _ordered_unique(a.substitute(sub) for a in q.atoms)


def abox_to_query(abox: Sequence[Atom], answers: Sequence[Constant] = ()) -> CQ:
    """Boolean CQ obtained by replacing every individual not in ``answers``
    by its own existential variable."""
    keep = set(answers)
    sub: Dict[Term, Variable] = {}
    out = []
    for a in abox:
        args = []
        for t in a.args:
            if isinstance(t, Constant) and t not in keep:
                if t not in sub:
                    sub[t] = Variable(f"z{len(sub)}")
                args.append(sub[t])
            else:
                args.append(t)
        out.append(Atom(a.predicate, tuple(args)))
    return CQ((), tuple(_ordered_unique(out)))


def substitute_atoms(atoms: Iterable[Atom], sub: Mapping[Variable, Term]) -> List[Atom]:
    return [a.substitute(sub) for a in atoms]


# ---------------------------------------------------------------------------
# Embeddings and isomorphism
# ---------------------------------------------------------------------------

def embeddings(pattern: Sequence[Atom], target: Iterable[Atom], *, injective: bool = False,
               vars_to_vars: bool = False, fixed: Optional[Mapping[Variable, Term]] = None
               ) -> Iterator[Substitution]:
    """Substitutions h with h(pattern) a subset of ``target``.

    ``injective`` forbids two pattern variables sharing an image and
    ``vars_to_vars`` forbids mapping a variable to a non-variable.
    """
    tgt = _ordered_unique(target)
    index: Dict[Tuple[str, int], List[Atom]] = {}
    for f in tgt:
        index.setdefault((f.predicate, f.arity), []).append(f)
    pat = _ordered_unique(pattern)

    def degree(a: Atom) -> int:
        return len(index.get((a.predicate, a.arity), ()))

    # connected, most-constrained-first ordering
    order: List[Atom] = []
    remaining = list(pat)
    bound: set = set(fixed or ())
    while remaining:
        best = min(remaining, key=lambda a: (-sum(1 for v in a.variables() if v in bound), degree(a)))
        remaining.remove(best)
        order.append(best)
        bound.update(best.variables())

    def ok(sub: Dict[Variable, Term]) -> bool:
        if vars_to_vars and any(not isinstance(t, Variable) for t in sub.values()):
            return False
        if injective and len(set(sub.values())) != len(sub):
            return False
        return True

    def rec(i: int, sub: Dict[Variable, Term]):
        if i == len(order):
            yield dict(sub)
            return
        for f in index.get((order[i].predicate, order[i].arity), ()):
            nxt = match_atom(order[i], f, sub)
            if nxt is not None and (nxt is sub or ok(nxt)):
                yield from rec(i + 1, nxt)

    start = dict(fixed or {})
    if ok(start):
        yield from rec(0, start)


def cq_isomorphic(a, b) -> bool:
    """Equality of (Boolean views of) CQs up to a bijective variable renaming."""
    qa, qb = as_cq(a), as_cq(b)
    sa, sb = set(qa.atoms), set(qb.atoms)
    if sa == sb and qa.answer_vars == qb.answer_vars:
        return True
    if len(sa) != len(sb) or qa.answer_vars != qb.answer_vars:
        return False
    if sorted((x.predicate, x.arity) for x in sa) != sorted((x.predicate, x.arity) for x in sb):
        return False
    if len(qa.variables()) != len(qb.variables()):
        return False
    fixed = {v: v for v in qa.answer_vars}
    for h in embeddings(list(sa), sb, injective=True, vars_to_vars=True, fixed=fixed):
        if {x.substitute(h) for x in sa} == sb:
            return True
    return False
