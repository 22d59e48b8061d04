"""Line-oriented surface syntax for knowledge bases, queries, temporal ABoxes
and MTCQs, with matching printers.

A document is a sequence of '.'-terminated statements::

    cqproof/1                       # optional version header
    A sub exists R.                 # concept inclusion
    exists P- sub B.
    P rsub R-.                      # role inclusion
    R(x, y), B(y) -> exists z . S(y, z).   # existential rule
    B(b).  P(a, b).                 # assertions
    A(a)@[0, 5].  B(a)@[-inf, 3].   # temporal facts
    q(x) :- R(x, y), B(y).          # conjunctive query
    q(x) :- A(x) UNTIL[1,2] {R(x, y), B(y)}.   # MTCQ
    answer(a).

Inside rules and queries bare names are variables and double-quoted names
are individuals.  ``#`` starts a comment.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import pyparsing as pp

from .logic import (Atom, Axiom, ConceptInclusion, ConceptName, Constant, CQ, Exists,
                    ExistentialRule, KnowledgeBase, Role, RoleInclusion, SkolemTerm, Variable)
from .temporal.intervals import NEG_INF, POS_INF, Interval
from .temporal.mtcq import (MTCQ, And, BoxMinus, BoxPlus, CQLeaf, Next, Or, Prev, Since,
                            TemporalABox, TemporalFact, Top, Until, make_leaf)

HEADER = "cqproof/1"

pp.ParserElement.enable_packrat()


class ParseError(ValueError):
    """Malformed input; carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message, self.line, self.col = message, line, col
        super().__init__(f"line {line}, column {col}: {message}" if line else message)


class NonDLLiteError(ParseError):
    """Well-formed description logic that falls outside DL-Lite_R."""


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------

RESERVED = {"sub", "rsub", "exists", "forall", "and", "or", "not", "o", "top", "bottom", "answer",
            "inf", "TOP", "AND", "OR", "NEXT", "PREV", "BOXP", "BOXM", "UNTIL", "SINCE"}

LPAR, RPAR, COMMA, DOT, LBR, RBR = map(pp.Suppress, "(),.[]")
ident = pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*")
name = ident.copy().add_condition(lambda t: t[0] not in RESERVED, message="reserved word")
name.set_name("name")
K = pp.Keyword

role_tok = pp.Combine(name + pp.Opt("-")).set_name("role")
concept = (pp.Group(K("exists") + role_tok) | name).set_name("concept")

quoted = pp.QuotedString('"').set_parse_action(lambda t: Constant(t[0]))
var = name.copy().set_parse_action(lambda t: Variable(t[0]))
const = name.copy().set_parse_action(lambda t: Constant(t[0]))


def _mk_atom(toks):
    pred, args = toks[0], list(toks[1:])
    if pred.endswith("-"):
        if len(args) != 2:
            raise pp.ParseFatalException("an inverse role takes two arguments")
        return Atom(pred[:-1], (args[1], args[0]))
    if len(args) not in (1, 2):
        raise pp.ParseFatalException(f"{pred} must have one or two arguments")
    return Atom(pred, tuple(args))


rule_atom = (role_tok + LPAR + pp.DelimitedList(quoted | var) + RPAR).set_parse_action(_mk_atom)
ground_atom = (role_tok + LPAR + pp.DelimitedList(const) + RPAR).set_parse_action(_mk_atom)

endpoint = pp.Regex(r"-?inf|-?\d+").set_name("interval endpoint")
interval = pp.Group(LBR + endpoint + COMMA + endpoint + RBR)
nat_interval = pp.Group(LBR + pp.Regex(r"\d+") + COMMA + pp.Regex(r"\d+") + RBR)


def _tag(kind):
    def action(s, loc, toks):
        return [(kind, loc, toks.as_list())]
    return action


ci = (concept + K("sub") - concept - DOT).set_parse_action(_tag("ci"))
ri = (role_tok + K("rsub") - role_tok - DOT).set_parse_action(_tag("ri"))
rule = (pp.Group(pp.DelimitedList(rule_atom)) + pp.Suppress("->")
        - pp.Group(pp.Opt(pp.Suppress(K("exists")) + pp.DelimitedList(name) + DOT))
        - pp.Group(pp.DelimitedList(rule_atom)) - DOT).set_parse_action(_tag("rule"))
assertion = (ground_atom + pp.Opt(pp.Suppress("@") - interval) + DOT).set_parse_action(_tag("fact"))
answer = (pp.Suppress(K("answer")) + LPAR + pp.Opt(pp.DelimitedList(const)) + RPAR + DOT
          ).set_parse_action(_tag("answer"))

# MTCQ expressions build a small tuple tree; leaves are resolved once the
# answer variables are known.
leaf_group = (pp.Suppress("{") + pp.DelimitedList(rule_atom) + pp.Suppress("}")
              ).set_parse_action(lambda t: [("leaf", t.as_list())])
single_leaf = rule_atom.copy().add_parse_action(lambda t: [("leaf", [t[0]])])
top = K("TOP").set_parse_action(lambda: [("top",)])
operand = top | leaf_group | single_leaf


def _iv(t):
    return Interval(int(t[0]), int(t[1]))


unary_op = ((K("BOXP") | K("BOXM")) + nat_interval).set_parse_action(lambda t: [(t[0], _iv(t[1]))]) \
    | (K("NEXT") | K("PREV")).set_parse_action(lambda t: [(t[0], None)])
temporal_op = ((K("UNTIL") | K("SINCE")) + nat_interval).set_parse_action(lambda t: [(t[0], _iv(t[1]))])


def _unary(toks):
    items = list(toks[0])
    f = items[-1]
    for op in reversed(items[:-1]):
        f = ("un", op[0], op[1], f)
    return [f]


def _binary(toks):
    items = list(toks[0])
    f = items[0]
    for i in range(1, len(items), 2):
        op = items[i]
        if isinstance(op, tuple):
            f = ("bin", op[0], op[1], f, items[i + 1])
        else:
            f = ("bin", op, None, f, items[i + 1])
    return [f]


mtcq_expr = pp.infix_notation(operand, [
    (unary_op, 1, pp.OpAssoc.RIGHT, _unary),
    (temporal_op, 2, pp.OpAssoc.LEFT, _binary),
    (K("AND"), 2, pp.OpAssoc.LEFT, _binary),
    (K("OR"), 2, pp.OpAssoc.LEFT, _binary),
])

qhead = name + LPAR + pp.Group(pp.Opt(pp.DelimitedList(name))) + RPAR + pp.Suppress(":-")
cq_query = (qhead + pp.Group(pp.DelimitedList(rule_atom)) + DOT).set_parse_action(_tag("cq"))
mtcq_query = (qhead + mtcq_expr + DOT).set_parse_action(_tag("mtcq"))

# A looser description logic grammar, only used to recognise axioms that are
# well formed but not DL-Lite_R.
loose = pp.Forward()
loose_atomic = pp.Forward()
loose_atomic <<= (K("top") | K("bottom") | (pp.Literal("(") + loose + pp.Literal(")")) | (K("not") + loose_atomic)
                  | (K("exists") + role_tok + pp.Opt(pp.Literal(".") + loose_atomic))
                  | (K("forall") + role_tok + pp.Literal(".") + loose_atomic) | name)
loose <<= loose_atomic + pp.ZeroOrMore((K("and") | K("or")) + loose_atomic)
loose_role = role_tok + pp.ZeroOrMore(K("o") + role_tok)

OUTSIDE = {"and", "or", "not", "forall", "top", "bottom", "o", ".", "("}


def _outside_only(s, loc, toks):
    if not OUTSIDE & set(_flatten(toks.as_list())):
        raise pp.ParseException(s, loc, "plain DL-Lite_R axiom")


non_dl = ((loose + K("sub") + loose + DOT) | (loose_role + K("rsub") + loose_role + DOT)
          ).set_parse_action(_outside_only).add_parse_action(_tag("non_dl"))

statement = non_dl | ci | ri | rule | assertion | answer | cq_query | mtcq_query
document = pp.Opt(pp.Suppress(pp.Literal(HEADER))) + pp.ZeroOrMore(statement) + pp.StringEnd()
document.ignore(pp.python_style_comment)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

@dataclass
class Document:
    tbox: List[Axiom] = field(default_factory=list)
    abox: List[Atom] = field(default_factory=list)
    temporal_facts: List[TemporalFact] = field(default_factory=list)
    query: Optional[CQ] = None
    mtcq: Optional[MTCQ] = None
    answers: Optional[Tuple[Constant, ...]] = None

    @property
    def kb(self) -> KnowledgeBase:
        return KnowledgeBase(tuple(self.tbox), tuple(self.abox))

    @property
    def tabox(self) -> TemporalABox:
        return TemporalABox(tuple(self.temporal_facts))


def _role(tok: str) -> Role:
    return Role(tok[:-1], True) if tok.endswith("-") else Role(tok)


def _concept(tok):
    if isinstance(tok, list):
        return Exists(_role(tok[1]))
    return ConceptName(tok)


def _endpoint(s: str):
    if s == "inf":
        return POS_INF
    if s == "-inf":
        return NEG_INF
    return int(s)


def _build_formula(node, answer_vars):
    tag = node[0]
    if tag == "leaf":
        return make_leaf(node[1], answer_vars)
    if tag == "top":
        return Top()
    if tag == "un":
        _, op, iv, sub = node
        f = _build_formula(sub, answer_vars)
        return {"BOXP": lambda: BoxPlus(iv, f), "BOXM": lambda: BoxMinus(iv, f),
                "NEXT": lambda: Next(f), "PREV": lambda: Prev(f)}[op]()
    _, op, iv, left, right = node
    lf, rf = _build_formula(left, answer_vars), _build_formula(right, answer_vars)
    return {"UNTIL": lambda: Until(iv, lf, rf), "SINCE": lambda: Since(iv, lf, rf),
            "AND": lambda: And(lf, rf), "OR": lambda: Or(lf, rf)}[op]()


def parse_document(text: str) -> Document:
    try:
        items = document.parse_string(text, parse_all=True).as_list()
    except pp.ParseBaseException as exc:
        raise ParseError(exc.msg, exc.lineno, exc.col) from None
    doc = Document()
    for kind, loc, toks in items:
        line, col = pp.lineno(loc, text), pp.col(loc, text)
        try:
            _add(doc, kind, toks, line, col)
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), line, col) from None
    return doc


def _add(doc: Document, kind: str, toks: list, line: int, col: int) -> None:
    if kind == "non_dl":
        raise NonDLLiteError("axiom is outside DL-Lite_R: " + " ".join(map(str, _flatten(toks))),
                             line, col)
    if kind == "ci":
        doc.tbox.append(ConceptInclusion(_concept(toks[0]), _concept(toks[2])))
    elif kind == "ri":
        doc.tbox.append(RoleInclusion(_role(toks[0]), _role(toks[2])))
    elif kind == "rule":
        body, declared, head = toks
        r = ExistentialRule(tuple(body), tuple(head))
        if [v.name for v in r.existential_vars] != list(dict.fromkeys(declared)) and \
                set(v.name for v in r.existential_vars) != set(declared):
            raise ParseError("head variables missing from the body must be declared with "
                             "'exists', and only those", line, col)
        doc.tbox.append(r)
    elif kind == "fact":
        atom = toks[0]
        if len(toks) == 2:
            lo, hi = (_endpoint(x) for x in toks[1])
            iv = Interval.make(lo, hi)
            if iv is None:
                raise ParseError(f"empty interval [{toks[1][0]},{toks[1][1]}]", line, col)
            doc.temporal_facts.append(TemporalFact(atom, iv))
        else:
            doc.abox.append(atom)
    elif kind == "answer":
        if doc.answers is not None:
            raise ParseError("more than one answer line", line, col)
        doc.answers = tuple(toks)
    elif kind in ("cq", "mtcq"):
        if doc.query is not None or doc.mtcq is not None:
            raise ParseError("more than one query", line, col)
        answer_vars = tuple(Variable(v) for v in toks[1])
        if kind == "cq":
            doc.query = CQ(answer_vars, tuple(toks[2]))
        else:
            doc.mtcq = MTCQ(answer_vars, _build_formula(toks[2], answer_vars))


def _flatten(x):
    if isinstance(x, list):
        for y in x:
            yield from _flatten(y)
    else:
        yield x


def parse_kb(text: str, dl_lite: bool = False) -> KnowledgeBase:
    """Axioms and atemporal assertions of a document.

    With ``dl_lite`` existential rules are rejected as well.
    """
    doc = parse_document(text)
    if doc.temporal_facts:
        raise ParseError("temporal facts are not allowed in a knowledge base file")
    kb = doc.kb
    if dl_lite and not kb.is_dl_lite():
        raise NonDLLiteError("the TBox contains existential rules")
    return kb


def parse_query(text: str) -> Tuple[CQ, Optional[Tuple[Constant, ...]]]:
    doc = parse_document(text)
    if doc.query is None:
        raise ParseError("no conjunctive query found")
    if doc.answers is not None and len(doc.answers) != len(doc.query.answer_vars):
        raise ParseError("answer line does not match the query's answer variables")
    return doc.query, doc.answers


def parse_temporal(text: str) -> Tuple[TemporalABox, MTCQ]:
    doc = parse_temporal_document(text)
    return doc.tabox, doc.mtcq


def parse_temporal_document(text: str) -> Document:
    """Temporal facts plus one MTCQ; a plain CQ becomes a single leaf.

    Atemporal assertions hold at every time point."""
    doc = parse_document(text)
    for a in doc.abox:
        doc.temporal_facts.append(TemporalFact(a, Interval(NEG_INF, POS_INF)))
    doc.abox = []
    if doc.mtcq is None and doc.query is not None:
        doc.mtcq = MTCQ(doc.query.answer_vars, make_leaf(doc.query.atoms, doc.query.answer_vars))
        doc.query = None
    if doc.mtcq is None:
        raise ParseError("no temporal query found")
    return doc


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def format_term(t, quote: bool) -> str:
    if isinstance(t, Constant):
        return f'"{t.name}"' if quote else t.name
    if isinstance(t, Variable):
        return t.name
    if isinstance(t, SkolemTerm):
        raise ValueError("Skolem terms have no surface syntax")
    raise TypeError(t)


def format_atom(a: Atom, quote: bool = True) -> str:
    return f"{a.predicate}({', '.join(format_term(t, quote) for t in a.args)})"


def format_axiom(ax: Axiom) -> str:
    if isinstance(ax, (ConceptInclusion, RoleInclusion)):
        return f"{ax}."
    body = ", ".join(format_atom(a) for a in ax.body)
    head = ", ".join(format_atom(a) for a in ax.head)
    ex = ax.existential_vars
    prefix = f"exists {', '.join(v.name for v in ex)} . " if ex else ""
    return f"{body} -> {prefix}{head}."


def format_interval(iv: Interval) -> str:
    return str(iv)


def format_formula(f) -> str:
    if isinstance(f, CQLeaf):
        atoms = f.cq.atoms
        if len(atoms) == 1 and not f.cq.existential_vars:
            return format_atom(atoms[0])
        return "{" + ", ".join(format_atom(a) for a in atoms) + "}"
    if isinstance(f, Top):
        return "TOP"
    if isinstance(f, (And, Or)):
        op = "AND" if isinstance(f, And) else "OR"
        return f"({format_formula(f.left)} {op} {format_formula(f.right)})"
    if isinstance(f, (Until, Since)):
        op = "UNTIL" if isinstance(f, Until) else "SINCE"
        return f"({format_formula(f.left)} {op}[{f.interval.lo},{f.interval.hi}] " \
               f"{format_formula(f.right)})"
    if isinstance(f, (BoxPlus, BoxMinus)):
        op = "BOXP" if isinstance(f, BoxPlus) else "BOXM"
        return f"{op}[{f.interval.lo},{f.interval.hi}] {_wrapped(f.sub)}"
    if isinstance(f, (Next, Prev)):
        return f"{'NEXT' if isinstance(f, Next) else 'PREV'} {_wrapped(f.sub)}"
    raise TypeError(f)


def _wrapped(f) -> str:
    s = format_formula(f)
    return s if isinstance(f, (CQLeaf, Top)) or s.startswith("(") else f"({s})"


def _head(name: str, answer_vars) -> str:
    return f"{name}({', '.join(v.name for v in answer_vars)}) :- "


def format_answers(answers: Sequence[Constant]) -> str:
    return f"answer({', '.join(c.name for c in answers)})."


def print_kb(kb: KnowledgeBase, header: bool = True) -> str:
    lines = [HEADER] if header else []
    lines += [format_axiom(ax) for ax in kb.tbox]
    lines += [format_atom(a, quote=False) + "." for a in kb.abox]
    return "\n".join(lines) + "\n"


def print_query(q: CQ, answers: Optional[Sequence[Constant]] = None, name: str = "q",
                header: bool = True) -> str:
    lines = [HEADER] if header else []
    lines.append(_head(name, q.answer_vars) + ", ".join(format_atom(a) for a in q.atoms) + ".")
    if answers is not None:
        lines.append(format_answers(answers))
    return "\n".join(lines) + "\n"


def print_mtcq(m: MTCQ, name: str = "q") -> str:
    return _head(name, m.answer_vars) + format_formula(m.formula) + "."


def print_temporal(tabox: TemporalABox, mtcq: Optional[MTCQ] = None,
                   answers: Optional[Sequence[Constant]] = None, tbox: Sequence[Axiom] = (),
                   header: bool = True) -> str:
    lines = [HEADER] if header else []
    lines += [format_axiom(ax) for ax in tbox]
    lines += [f"{format_atom(f.atom, quote=False)}@{f.interval}." for f in tabox.facts]
    if mtcq is not None:
        lines.append(print_mtcq(mtcq))
    if answers is not None:
        lines.append(format_answers(answers))
    return "\n".join(lines) + "\n"


def print_document(doc: Document) -> str:
    lines = [HEADER]
    lines += [format_axiom(ax) for ax in doc.tbox]
    lines += [format_atom(a, quote=False) + "." for a in doc.abox]
    lines += [f"{format_atom(f.atom, quote=False)}@{f.interval}." for f in doc.temporal_facts]
    if doc.query is not None:
        lines.append(print_query(doc.query, header=False).rstrip("\n"))
    if doc.mtcq is not None:
        lines.append(print_mtcq(doc.mtcq))
    if doc.answers is not None:
        lines.append(format_answers(doc.answers))
    return "\n".join(lines) + "\n"
