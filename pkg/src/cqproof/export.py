"""JSON and Graphviz DOT serialization of proofs.

JSON layout::

    {"format": "cqproof/1",
     "vertices": [{"id", "label", "kind", "data"}],
     "edges": [{"sources", "target", "rule", "params"?}],
     "sink": id,
     "measures": {"size", "tree_size", "depth"}}

``label`` is for people; ``data`` is a tagged encoding of the label that
:func:`from_json` reads back.  Output is byte-stable: vertices are listed by
id, edges by (target, sources), keys sorted.
"""
from __future__ import annotations

import dataclasses
import json
import math
from typing import Any, Dict

from . import logic
from .graph import Edge, Proof, ProofGraph, depth, is_axiom, size, tree_size
from .syntax import HEADER
from .temporal import intervals, mtcq, prover

_CLASSES = {cls.__name__: cls for cls in (
    logic.Constant, logic.Variable, logic.SkolemTerm, logic.Atom, logic.Conjunction, logic.CQ,
    logic.Role, logic.ConceptName, logic.Exists, logic.ConceptInclusion, logic.RoleInclusion,
    logic.ExistentialRule, logic.SkolemRule, intervals.Interval, mtcq.CQLeaf, mtcq.Top, mtcq.And,
    mtcq.Or, mtcq.BoxPlus, mtcq.BoxMinus, mtcq.Until, mtcq.Since, mtcq.Next, mtcq.Prev,
    prover.AnnotatedFormula)}


def encode(obj: Any) -> Any:
    """JSON-ready tagged form of a label or inference parameter."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, (list, tuple)):
        return [encode(x) for x in obj]
    if isinstance(obj, dict):
        items = sorted(([encode(k), encode(v)] for k, v in obj.items()),
                       key=lambda kv: json.dumps(kv, sort_keys=True))
        return {"t": "map", "items": items}
    name = type(obj).__name__
    if name in _CLASSES and dataclasses.is_dataclass(obj):
        out = {"t": name}
        for f in dataclasses.fields(obj):
            out[f.name] = encode(getattr(obj, f.name))
        return out
    raise TypeError(f"cannot serialize {obj!r}")


def decode(data: Any) -> Any:
    if isinstance(data, list):
        return tuple(decode(x) for x in data)
    if not isinstance(data, dict):
        return data
    tag = data["t"]
    if tag == "map":
        return {decode(k): decode(v) for k, v in data["items"]}
    cls = _CLASSES[tag]
    kwargs = {}
    for f in dataclasses.fields(cls):
        val = data[f.name]
        if cls is intervals.Interval:
            val = {"inf": math.inf, "-inf": -math.inf}.get(val, val)
        kwargs[f.name] = decode(val)
    return cls(**kwargs)


def vertex_kind(label) -> str:
    if is_axiom(label):
        return "axiom"
    if isinstance(label, logic.Atom):
        return "atom"
    if isinstance(label, logic.Conjunction):
        return "conjunction"
    if isinstance(label, logic.CQ):
        return "query"
    if isinstance(label, prover.AnnotatedFormula):
        return "annotated"
    return "other"


def _sorted_edges(g: ProofGraph):
    return sorted(g.edges, key=lambda e: (e.target, e.sources, e.rule))


def to_dict(p: Proof) -> Dict[str, Any]:
    g = p.graph
    vertices = [{"id": v, "label": str(g.labels[v]), "kind": vertex_kind(g.labels[v]),
                 "data": encode(g.labels[v])} for v in sorted(g.labels)]
    edges = []
    for e in _sorted_edges(g):
        item = {"sources": list(e.sources), "target": e.target, "rule": e.rule}
        if e.params:
            item["params"] = encode(dict(e.params))
        edges.append(item)
    return {"format": HEADER, "vertices": vertices, "edges": edges, "sink": p.sink,
            "measures": {"size": size(p), "tree_size": tree_size(p), "depth": depth(p)}}


def to_json(p: Proof) -> str:
    return json.dumps(to_dict(p), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def from_dict(d: Dict[str, Any]) -> Proof:
    labels = {int(v["id"]): decode(v["data"]) for v in d["vertices"]}
    g = ProofGraph(labels)
    for e in d["edges"]:
        params = decode(e["params"]) if e.get("params") else {}
        g.edges.append(Edge(tuple(e["sources"]), int(e["target"]), e.get("rule", ""), dict(params)))
    return Proof(g, int(d["sink"]))


def from_json(text: str) -> Proof:
    d = json.loads(text)
    if d.get("format", HEADER) != HEADER:
        raise ValueError(f"unsupported format {d.get('format')!r}")
    return from_dict(d)


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(p: Proof, name: str = "proof") -> str:
    """One node per vertex; every inference goes through a junction point,
    so hyperedges with several premises stay readable."""
    g = p.graph
    lines = [f"// {HEADER}", f"digraph {name} {{", "  rankdir=BT;",
             '  node [fontname="Helvetica"];']
    for v in sorted(g.labels):
        lab = g.labels[v]
        shape = "box" if is_axiom(lab) else "ellipse"
        extra = ", peripheries=2" if v == p.sink else ""
        lines.append(f'  v{v} [label="{_dot_escape(str(lab))}", shape={shape}{extra}];')
    for i, e in enumerate(_sorted_edges(g)):
        j = f"j{i}"
        lines.append(f'  {j} [shape=point, width=0.06, xlabel="{_dot_escape(e.rule)}"];')
        for s in e.sources:
            lines.append(f"  v{s} -> {j} [arrowhead=none];")
        lines.append(f"  {j} -> v{e.target};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export(p: Proof, fmt: str = "json") -> str:
    if fmt == "json":
        return to_json(p)
    if fmt == "dot":
        return to_dot(p)
    raise ValueError(f"unknown export format {fmt!r}")
