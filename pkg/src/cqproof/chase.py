"""Depth-bounded Skolem chase with provenance."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .logic import (Atom, CQ, Constant, KnowledgeBase, SkolemRule, Term, iter_matches,
                    term_depth, term_key)

log = logging.getLogger(__name__)

DEFAULT_FACT_CAP = 100_000


class ResourceLimitExceeded(RuntimeError):
    """A configured safety cap was hit; results would be incomplete."""


@dataclass(frozen=True)
class ChaseConfig:
    depth_bound: int = 3
    fact_cap: int = DEFAULT_FACT_CAP

    def __post_init__(self):
        if self.depth_bound < 0:
            raise ValueError("depth_bound must be non-negative")


def default_depth_bound(kb: KnowledgeBase, query: Optional[CQ] = None) -> int:
    n_atoms = len(query.atoms) if query is not None else 1
    return (len(kb.tbox) + 1) * n_atoms


@dataclass(frozen=True)
class Derivation:
    """One MP_s application: ``premises`` (distinct, body order) and the
    index of the TBox axiom whose Skolemized rule fired."""

    premises: Tuple[Atom, ...]
    rule_index: int


@dataclass
class ChaseResult:
    atoms: List[Atom]
    witness: Dict[Atom, Derivation]
    round_of: Dict[Atom, int]
    config: ChaseConfig
    hit_depth_bound: bool = False
    _members: set = field(default_factory=set, repr=False)

    def __post_init__(self):
        self._members = set(self.atoms)

    def __contains__(self, a) -> bool:
        return a in self._members

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def as_set(self) -> frozenset:
        return frozenset(self._members)


def _within(a: Atom, bound: int) -> bool:
    return all(term_depth(t) <= bound for t in a.args)


def _sub_key(sub) -> tuple:
    return tuple(sorted((v.name, term_key(t)) for v, t in sub.items()))


def _premises(rule: SkolemRule, sub) -> Tuple[Atom, ...]:
    seen = []
    for b in rule.body:
        a = b.substitute(sub)
        if a not in seen:
            seen.append(a)
    return tuple(seen)


def chase(kb: KnowledgeBase, rules: Optional[Sequence[SkolemRule]] = None,
          cfg: Optional[ChaseConfig] = None) -> ChaseResult:
    """Round-based semi-naive Skolem chase.

    Rule ``i`` is assumed to be the Skolemization of ``kb.tbox[i]``.  Atoms
    containing a term nested deeper than ``cfg.depth_bound`` are never
    produced.
    """
    cfg = cfg or ChaseConfig()
    rules = list(kb.skolem_rules() if rules is None else rules)
    atoms: List[Atom] = list(kb.abox)
    members = set(atoms)
    witness: Dict[Atom, Derivation] = {}
    round_of = {a: 0 for a in atoms}
    delta = set(atoms)
    rnd = 0
    hit = False
    while delta:
        rnd += 1
        new: Dict[Atom, Derivation] = {}
        for ri, rule in enumerate(rules):
            for sub in _delta_matches(rule.body, members, delta):
                for h in rule.head:
                    a = h.substitute(sub)
                    if a in members or a in new:
                        continue
                    if not _within(a, cfg.depth_bound):
                        hit = True
                        continue
                    new[a] = Derivation(_premises(rule, sub), ri)
        for a in sorted(new, key=Atom.key):
            atoms.append(a)
            members.add(a)
            witness[a] = new[a]
            round_of[a] = rnd
        if len(atoms) > cfg.fact_cap:
            raise ResourceLimitExceeded(f"chase exceeded fact cap {cfg.fact_cap}")
        delta = set(new)
    log.debug("chase finished after %d rounds with %d atoms", rnd, len(atoms))
    return ChaseResult(atoms, witness, round_of, cfg, hit)


def _delta_matches(body: Sequence[Atom], members: set, delta: set):
    """Matches of ``body`` into ``members`` using at least one ``delta`` atom,
    sorted for determinism."""
    if len(body) == 1:
        found = list(iter_matches(body, delta))
    else:
        seen = {}
        for i in range(len(body)):
            for first in iter_matches([body[i]], delta):
                for sub in iter_matches(body, members, first):
                    seen.setdefault(_sub_key(sub), sub)
        found = list(seen.values())
    found.sort(key=_sub_key)
    return found


def all_derivations(kb: KnowledgeBase, result: ChaseResult,
                    rules: Optional[Sequence[SkolemRule]] = None) -> Dict[Atom, List[Derivation]]:
    """Every MP_s inference whose premises and conclusion lie in the chase."""
    rules = list(kb.skolem_rules() if rules is None else rules)
    members = result.as_set()
    out: Dict[Atom, List[Derivation]] = {a: [] for a in result.atoms}
    for ri, rule in enumerate(rules):
        for sub in sorted(iter_matches(rule.body, members), key=_sub_key):
            prem = _premises(rule, sub)
            for h in rule.head:
                a = h.substitute(sub)
                if a in members:
                    d = Derivation(prem, ri)
                    if d not in out[a]:
                        out[a].append(d)
    return out


def query_matches(q: CQ, answers: Sequence[Term], atoms: Iterable[Atom]):
    """Homomorphisms from q(answers) into ``atoms``."""
    return list(iter_matches(q.instantiate(answers).atoms, atoms))


def entails(kb: KnowledgeBase, q: CQ, answers: Sequence[Constant],
            cfg: Optional[ChaseConfig] = None) -> bool:
    cfg = cfg or ChaseConfig(default_depth_bound(kb, q))
    res = chase(kb, cfg=cfg)
    return next(iter_matches(q.instantiate(answers).atoms, res.as_set()), None) is not None
