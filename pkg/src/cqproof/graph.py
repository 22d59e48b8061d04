"""Labeled directed hypergraphs, proofs over them and the proof measures."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Protocol, Sequence, Tuple

from .logic import (Atom, Conjunction, CQ, ConceptInclusion, ExistentialRule, KnowledgeBase,
                    RoleInclusion, label_key)


@dataclass(frozen=True)
class Edge:
    sources: Tuple[int, ...]
    target: int
    rule: str = ""
    # replay information (substitutions, dropped atoms, ...); never compared
    params: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))


class ProofGraph:
    """Hypergraph ``(V, E, label)`` with integer vertex ids."""

    def __init__(self, labels: Optional[Mapping[int, Any]] = None, edges: Iterable[Edge] = ()):
        self.labels: Dict[int, Any] = dict(labels or {})
        self.edges: List[Edge] = list(edges)
        for e in self.edges:
            for v in e.sources + (e.target,):
                if v not in self.labels:
                    raise ValueError(f"edge endpoint {v} is not a vertex")

    @property
    def vertices(self) -> List[int]:
        return sorted(self.labels)

    def add_vertex(self, label) -> int:
        vid = max(self.labels, default=-1) + 1
        self.labels[vid] = label
        return vid

    def add_edge(self, sources: Sequence[int], target: int, rule: str = "", **params) -> Edge:
        e = Edge(tuple(sources), target, rule, params)
        for v in e.sources + (target,):
            if v not in self.labels:
                raise ValueError(f"edge endpoint {v} is not a vertex")
        self.edges.append(e)
        return e

    def incoming(self) -> Dict[int, List[Edge]]:
        inc: Dict[int, List[Edge]] = {v: [] for v in self.labels}
        for e in self.edges:
            inc[e.target].append(e)
        return inc

    def outgoing(self) -> Dict[int, List[Edge]]:
        out: Dict[int, List[Edge]] = {v: [] for v in self.labels}
        for e in self.edges:
            for s in set(e.sources):
                out[s].append(e)
        return out

    def sinks(self) -> List[int]:
        out = self.outgoing()
        return [v for v in self.vertices if not out[v]]

    def leaves(self) -> List[int]:
        inc = self.incoming()
        return [v for v in self.vertices if not inc[v]]

    def topological_order(self) -> List[int]:
        """Premises before conclusions; raises ValueError on a cycle."""
        inc = self.incoming()
        out = self.outgoing()
        pending = {v: sum(len(set(e.sources)) for e in inc[v]) for v in self.labels}
        ready = sorted(v for v, n in pending.items() if n == 0)
        order: List[int] = []
        while ready:
            v = ready.pop()
            order.append(v)
            for e in out[v]:
                pending[e.target] -= 1
                if pending[e.target] == 0:
                    ready.append(e.target)
        if len(order) != len(self.labels):
            raise ValueError("hypergraph contains a cycle")
        return order

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except ValueError:
            return False
        return True

    def restrict(self, keep: Iterable[int]) -> "ProofGraph":
        keep = set(keep)
        return ProofGraph({v: l for v, l in self.labels.items() if v in keep},
                          [e for e in self.edges if e.target in keep and set(e.sources) <= keep])

    def ancestors(self, v: int) -> set:
        inc = self.incoming()
        seen = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for e in inc[u]:
                for s in e.sources:
                    if s not in seen:
                        seen.add(s)
                        stack.append(s)
        return seen

    def copy(self) -> "ProofGraph":
        return ProofGraph(dict(self.labels), list(self.edges))


@dataclass
class Proof:
    graph: ProofGraph
    sink: int
    # set by search procedures that can only promise an upper bound
    minimal: bool = True

    @property
    def conclusion(self):
        return self.graph.labels[self.sink]


class SchemaChecker(Protocol):
    def admissible(self, premises: Sequence, conclusion, rule: str = "", params=None) -> bool: ...

    def is_grounded(self, label) -> bool: ...


def is_axiom(label) -> bool:
    return isinstance(label, (ConceptInclusion, RoleInclusion, ExistentialRule))


def default_grounded(label, theory: KnowledgeBase) -> bool:
    if is_axiom(label):
        return label in theory.tbox
    if isinstance(label, (Atom, CQ, Conjunction)):
        key = label_key(label)
        return any(label_key(a) == key for a in theory.abox)
    return False


@dataclass
class ValidityReport:
    single_sink: bool = True
    acyclic: bool = True
    at_most_one_incoming: bool = True
    grounded: bool = True
    admissible: bool = True
    errors: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.single_sink and self.acyclic and self.at_most_one_incoming
                and self.grounded and self.admissible)

    def __bool__(self):
        return self.ok


def validate_proof(p: Proof, theory, checker) -> ValidityReport:
    g = p.graph
    rep = ValidityReport()
    if p.sink not in g.labels:
        rep.single_sink = False
        rep.errors.append(f"designated sink {p.sink} is not a vertex")
        return rep
    sinks = g.sinks()
    if sinks != [p.sink]:
        rep.single_sink = False
        rep.errors.append(f"expected the single sink {p.sink}, found {sinks}")
    if not g.is_acyclic():
        rep.acyclic = False
        rep.errors.append("proof contains a cycle")
    inc = g.incoming()
    for v in g.vertices:
        if len(inc[v]) > 1:
            rep.at_most_one_incoming = False
            rep.errors.append(f"vertex {v} has {len(inc[v])} incoming edges")
    grounded = getattr(checker, "is_grounded", None)
    for v in g.leaves():
        lab = g.labels[v]
        ok = grounded(lab) if grounded is not None else default_grounded(lab, theory)
        if not ok:
            rep.grounded = False
            rep.errors.append(f"leaf {v} ({lab}) is not part of the theory")
    for e in g.edges:
        prem = [g.labels[s] for s in e.sources]
        args = (prem, g.labels[e.target], e.rule) + ((dict(e.params),) if e.params else ())
        if not checker.admissible(*args):
            rep.admissible = False
            rep.errors.append(f"inadmissible {e.rule or 'inference'} into vertex {e.target}")
    return rep


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

def size(p: Proof) -> int:
    return len(p.graph.labels)


def _single_incoming(g: ProofGraph) -> Dict[int, Optional[Edge]]:
    inc = g.incoming()
    out = {}
    for v, es in inc.items():
        if len(es) > 1:
            raise ValueError(f"vertex {v} has several incoming edges")
        out[v] = es[0] if es else None
    return out


def tree_size(p: Proof) -> int:
    g = p.graph
    order = g.topological_order()
    inc = _single_incoming(g)
    m: Dict[int, int] = {}
    for v in order:
        e = inc[v]
        m[v] = 1 if e is None else 1 + sum(m[s] for s in e.sources)
    return m[p.sink]


def depth(p: Proof) -> int:
    g = p.graph
    order = g.topological_order()
    inc = g.incoming()
    d: Dict[int, int] = {}
    for v in order:
        # a zero-premise inference starts a path just like a leaf does
        d[v] = max((1 + max(d[s] for s in e.sources) if e.sources else 0
                    for e in inc[v]), default=0)
    return d[p.sink]


def hypergraph_weight(g: ProofGraph) -> int:
    """Label-weighted size: total length of the printed labels.  Reported only."""
    return sum(len(str(l)) for l in g.labels.values())


def is_tree(p: Proof) -> bool:
    for v in p.graph.vertices:
        uses = sum(e.sources.count(v) for e in p.graph.edges)
        if v == p.sink:
            if uses:
                return False
        elif uses != 1:
            return False
    return True


def unravel(g: ProofGraph, v: int) -> Tuple[Proof, Dict[int, int]]:
    """Tree unraveling of ``g`` at ``v``.

    Returns the tree proof together with the homomorphism mapping each tree
    vertex (a path ending in ``v``) to its starting vertex in ``g``.
    """
    if not g.restrict(g.ancestors(v)).is_acyclic():
        raise ValueError("cannot unravel a cyclic hypergraph")
    inc = g.incoming()
    tree = ProofGraph()
    hom: Dict[int, int] = {}

    # explicit stack to survive deep chains
    root = tree.add_vertex(g.labels[v])
    hom[root] = v
    stack = [(root, v)]
    while stack:
        tv, gv = stack.pop()
        for e in inc[gv]:
            srcs = []
            for s in e.sources:
                ts = tree.add_vertex(g.labels[s])
                hom[ts] = s
                srcs.append(ts)
                stack.append((ts, s))
            tree.add_edge(srcs, tv, e.rule, **dict(e.params))
    return Proof(tree, root), hom


def check_homomorphism(p: Proof, g: ProofGraph, h: Mapping[int, int]) -> bool:
    src = p.graph
    if any(v not in h or h[v] not in g.labels for v in src.labels):
        return False
    for v, lab in src.labels.items():
        other = g.labels[h[v]]
        if other != lab and label_key(other) != label_key(lab):
            return False
    edges = {(e.sources, e.target) for e in g.edges}
    return all((tuple(h[s] for s in e.sources), h[e.target]) in edges for e in src.edges)


def prune_to(g: ProofGraph, sink: int) -> Proof:
    """Restrict to the ancestors of ``sink`` and renumber densely."""
    keep = sorted(g.ancestors(sink))
    ren = {v: i for i, v in enumerate(keep)}
    out = ProofGraph({ren[v]: g.labels[v] for v in keep})
    for e in g.edges:
        if e.target in ren and all(s in ren for s in e.sources):
            out.edges.append(Edge(tuple(ren[s] for s in e.sources), ren[e.target], e.rule, e.params))
    return Proof(out, ren[sink])
