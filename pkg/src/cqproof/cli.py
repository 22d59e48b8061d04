"""Command line interface.

Exit codes: 0 success, 1 negative answer (not entailed, invalid proof,
decision false), 2 malformed input, 3 resource cap hit.
"""
from __future__ import annotations

import logging
import sys
from typing import Optional, Sequence, Tuple

import click

from . import export as exporter
from .chase import ChaseConfig, ResourceLimitExceeded, entails
from .deriver_cq import cq_schema_checker, cq_to_sk, sk_to_cq
from .deriver_sk import sk_schema_checker
from .fixtures import extend_chain, gen_chain, gen_sat, gen_sat_cq
from .graph import depth, size, tree_size, validate_proof
from .logic import Constant, CQ, KnowledgeBase
from .search import DEFAULT_CAP, NotEntailed, SearchGoal, decide_op, min_proof
from .syntax import (Document, ParseError, parse_document, parse_temporal_document, print_kb,
                     print_query)
from .temporal import Interval, temporal_checker, temporal_min_proof
from .temporal.intervals import NEG_INF, POS_INF
from .treeshaped import is_tree_shaped, tree_shaped_min

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3

DERIVER_CHOICES = ("cq", "sk", "sk-prime")
MEASURE_CHOICES = ("size", "tree")


class Abort(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise Abort(f"cannot read {path}: {exc.strerror}", EXIT_INPUT)


def _parse(path: str) -> Document:
    try:
        return parse_document(_read(path))
    except ParseError as exc:
        raise Abort(f"{path}:{exc}", EXIT_INPUT)


def _load(kb_path: str, query_path: Optional[str]) -> Tuple[KnowledgeBase, CQ, Tuple[Constant, ...]]:
    doc = _parse(kb_path)
    if doc.temporal_facts:
        raise Abort(f"{kb_path}: temporal facts need the temporal-prove command", EXIT_INPUT)
    q, answers = doc.query, doc.answers
    if query_path is not None:
        qdoc = _parse(query_path)
        q, answers = qdoc.query, qdoc.answers if qdoc.answers is not None else answers
    if q is None:
        raise Abort("no query given", EXIT_INPUT)
    if answers is None:
        if q.answer_vars:
            raise Abort("the query has answer variables but no answer(...) line", EXIT_INPUT)
        answers = ()
    if len(answers) != len(q.answer_vars):
        raise Abort("answer line does not match the query's answer variables", EXIT_INPUT)
    return doc.kb, q, tuple(answers)


def _deriver(name: str) -> str:
    return "sk'" if name == "sk-prime" else name


def _measure(name: str) -> str:
    return "tree_size" if name == "tree" else "size"


def _emit(text: str, output: Optional[str]) -> None:
    if output is None:
        click.echo(text, nl=False)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _summary(p) -> str:
    return f"size={size(p)} tree_size={tree_size(p)} depth={depth(p)}"


def _parse_interval(text: str) -> Interval:
    body = text.strip().strip("[]")
    try:
        lo_s, hi_s = (x.strip() for x in body.split(","))
        ends = [{"inf": POS_INF, "-inf": NEG_INF}.get(x) or int(x) for x in (lo_s, hi_s)]
    except ValueError:
        raise Abort(f"malformed interval {text!r}; expected lo,hi", EXIT_INPUT)
    iv = Interval.make(*ends)
    if iv is None:
        raise Abort(f"empty interval {text!r}", EXIT_INPUT)
    return iv


def _run(fn):
    """Map library exceptions onto exit codes."""
    try:
        code = fn()
    except Abort as exc:
        click.echo(f"error: {exc}", err=True)
        code = exc.code
    except NotEntailed as exc:
        click.echo(f"not entailed: {exc}", err=True)
        code = EXIT_FALSE
    except ResourceLimitExceeded as exc:
        click.echo(f"resource cap: {exc}", err=True)
        code = EXIT_CAP
    except ParseError as exc:
        click.echo(f"error: {exc}", err=True)
        code = EXIT_INPUT
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        code = EXIT_INPUT
    sys.exit(code or EXIT_OK)


@click.group()
@click.option("-v", "--verbose", count=True, help="More logging (repeatable).")
def main(verbose: int) -> None:
    """Minimal proofs for conjunctive query answers."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _common(f):
    f = click.option("--depth-bound", type=int, default=None,
                     help="Skolem term depth bound for the chase.")(f)
    f = click.option("--cap", type=int, default=DEFAULT_CAP, show_default=True,
                     help="Expansion cap for the size search.")(f)
    f = click.option("--measure", type=click.Choice(MEASURE_CHOICES), default="tree",
                     show_default=True)(f)
    f = click.option("--deriver", type=click.Choice(DERIVER_CHOICES), default="sk",
                     show_default=True)(f)
    f = click.argument("query", required=False, type=click.Path())(f)
    return click.argument("kb", type=click.Path())(f)


@main.command()
@click.argument("kb", type=click.Path())
@click.argument("query", required=False, type=click.Path())
@click.option("--proof", type=click.Path(), help="Validate a JSON proof against KB.")
@click.option("--deriver", type=click.Choice(DERIVER_CHOICES), default="sk", show_default=True)
@click.option("--depth-bound", type=int, default=None)
def check(kb, query, proof, deriver, depth_bound):
    """Parse KB, then test entailment of QUERY or validate a proof."""
    def go():
        doc = _parse(kb)
        theory = doc.kb
        click.echo(f"{len(theory.tbox)} axioms, {len(theory.abox)} assertions, "
                   f"DL-Lite_R: {'yes' if theory.is_dl_lite() else 'no'}")
        code = EXIT_OK
        if query is not None or doc.query is not None:
            _, q, answers = _load(kb, query)
            cfg = ChaseConfig(depth_bound) if depth_bound is not None else None
            ok = entails(theory, q, answers, cfg)
            click.echo("entailed" if ok else "not entailed")
            code = EXIT_OK if ok else EXIT_FALSE
        if proof is not None:
            try:
                p = exporter.from_json(_read(proof))
            except (ValueError, KeyError, TypeError) as exc:
                raise Abort(f"{proof}: not a proof document ({exc})", EXIT_INPUT)
            d = _deriver(deriver)
            checker = cq_schema_checker(theory) if d == "cq" else sk_schema_checker(theory, d == "sk'")
            report = validate_proof(p, theory, checker)
            click.echo(("valid " if report else "invalid ") + _summary(p))
            for err in report.errors:
                click.echo(f"  {err}")
            if not report:
                code = EXIT_FALSE
        return code
    _run(go)


@main.command()
@_common
@click.option("--bound", type=int, default=None, help="Fail with exit 1 if the optimum exceeds N.")
@click.option("--tree-shaped-fast", is_flag=True,
              help="Use the polynomial algorithm for tree-shaped queries.")
@click.option("--format", "fmt", type=click.Choice(("json", "dot", "summary")), default="json",
              show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None)
def prove(kb, query, deriver, measure, cap, depth_bound, bound, tree_shaped_fast, fmt, output):
    """Compute a proof of minimal measure for the query answer."""
    def go():
        theory, q, answers = _load(kb, query)
        goal = SearchGoal(theory, q, answers, _deriver(deriver), _measure(measure),
                          bound, depth_bound, cap)
        if tree_shaped_fast:
            if goal.deriver != "sk" or goal.measure != "tree_size":
                raise Abort("--tree-shaped-fast needs --deriver sk --measure tree", EXIT_INPUT)
            if not theory.is_dl_lite() or not is_tree_shaped(goal.instance):
                raise Abort("--tree-shaped-fast needs a DL-Lite_R TBox and a tree-shaped query",
                            EXIT_INPUT)
            p = tree_shaped_min(goal)
        else:
            p = min_proof(goal)
        value = tree_size(p) if goal.measure == "tree_size" else size(p)
        _emit(_summary(p) + "\n" if fmt == "summary" else exporter.export(p, fmt), output)
        if bound is not None and value > bound:
            click.echo(f"optimum {value} exceeds bound {bound}", err=True)
            return EXIT_FALSE
        return EXIT_OK
    _run(go)


@main.command()
@_common
@click.option("--bound", "n", type=int, required=True, help="The bound n.")
def decide(kb, query, deriver, measure, cap, depth_bound, n):
    """Is there a proof of measure at most N?  Exit 0 for yes, 1 for no."""
    def go():
        theory, q, answers = _load(kb, query)
        goal = SearchGoal(theory, q, answers, _deriver(deriver), _measure(measure),
                          n, depth_bound, cap)
        if goal.deriver == "cq":
            raise Abort("decide supports the sk and sk-prime derivers", EXIT_INPUT)
        ok = decide_op(goal, n)
        click.echo("true" if ok else "false")
        return EXIT_OK if ok else EXIT_FALSE
    _run(go)


@main.command()
@click.argument("proof", type=click.Path())
@click.option("--kb", "kb_path", type=click.Path(), required=True)
@click.option("--to", "target", type=click.Choice(("cq", "sk")), required=True)
@click.option("--prime", is_flag=True, help="Source (for --to cq) uses set semantics.")
@click.option("--format", "fmt", type=click.Choice(("json", "dot")), default="json", show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None)
def translate(proof, kb_path, target, prime, fmt, output):
    """Translate a JSON proof between the CQ and Skolemized derivers."""
    def go():
        theory = _parse(kb_path).kb
        try:
            p = exporter.from_json(_read(proof))
        except (ValueError, KeyError, TypeError) as exc:
            raise Abort(f"{proof}: not a proof document ({exc})", EXIT_INPUT)
        out = sk_to_cq(p, theory, prime=prime) if target == "cq" else cq_to_sk(p, theory)
        _emit(exporter.export(out, fmt), output)
        return EXIT_OK
    _run(go)


@main.command("temporal-prove")
@click.argument("file", type=click.Path())
@click.option("--interval", "iv_text", required=True, help="Target interval lo,hi (inf allowed).")
@click.option("--depth-bound", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(("json", "dot", "summary")), default="json",
              show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None)
def temporal_prove(file, iv_text, depth_bound, fmt, output):
    """Prove a metric temporal query over a temporal ABox at an interval."""
    def go():
        try:
            doc = parse_temporal_document(_read(file))
        except ParseError as exc:
            raise Abort(f"{file}:{exc}", EXIT_INPUT)
        iota = _parse_interval(iv_text)
        answers = doc.answers or ()
        if len(answers) != len(doc.mtcq.answer_vars):
            raise Abort("answer line does not match the query's answer variables", EXIT_INPUT)
        p = temporal_min_proof(doc.kb, doc.tabox, doc.mtcq, answers, iota, depth_bound)
        report = validate_proof(p, doc.kb, temporal_checker(doc.kb, doc.tabox))
        if not report:
            raise RuntimeError("internal error: produced temporal proof does not validate")
        _emit(_summary(p) + "\n" if fmt == "summary" else exporter.export(p, fmt), output)
        return EXIT_OK
    _run(go)


@main.command("gen-fixture")
@click.argument("kind", type=click.Choice(("chain", "sat")))
@click.option("--query", "query_path", type=click.Path(), help="Query file (chain).")
@click.option("-n", "n", type=int, default=1, show_default=True, help="Chain length parameter.")
@click.option("--extend", "extend_path", type=click.Path(), help="KB merged into the chain (T, A).")
@click.option("--clauses", default=None, help="CNF such as '1,-2;2' (sat).")
@click.option("--deriver", type=click.Choice(DERIVER_CHOICES), default="sk-prime", show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None)
def gen_fixture(kind, query_path, n, extend_path, clauses, deriver, output):
    """Write a hardness-gadget instance: KB, query and its bound."""
    def go():
        if kind == "chain":
            if query_path is None:
                raise Abort("chain fixtures need --query", EXIT_INPUT)
            qdoc = _parse(query_path)
            if qdoc.query is None:
                raise Abort(f"{query_path}: no query", EXIT_INPUT)
            fx = gen_chain(qdoc.query, n, qdoc.answers)
            if extend_path is not None:
                fx = extend_chain(fx, _parse(extend_path).kb)
        else:
            if not clauses:
                raise Abort("sat fixtures need --clauses", EXIT_INPUT)
            try:
                cnf = [[int(x) for x in c.split(",") if x.strip()] for c in clauses.split(";")]
            except ValueError:
                raise Abort(f"malformed clauses {clauses!r}", EXIT_INPUT)
            d = _deriver(deriver)
            fx = gen_sat_cq(cnf) if d == "cq" else gen_sat(cnf, "tree_size" if d == "sk'" else "size")
        lines = [f"# fixture {fx.kind}: deriver {fx.deriver}, measure {fx.measure}, bound {fx.bound}"]
        if fx.expected is not None:
            lines.append(f"# expected decision at the bound: {str(fx.expected).lower()}")
        text = print_kb(fx.kb) + "\n".join(lines) + "\n"
        text += print_query(fx.query, fx.answer if fx.query.answer_vars else None, header=False)
        _emit(text, output)
        return EXIT_OK
    _run(go)


@main.command("export")
@click.argument("proof", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(("json", "dot")), default="dot", show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None)
def export_cmd(proof, fmt, output):
    """Re-render a JSON proof as DOT (or canonical JSON)."""
    def go():
        try:
            p = exporter.from_json(_read(proof))
        except (ValueError, KeyError, TypeError) as exc:
            raise Abort(f"{proof}: not a proof document ({exc})", EXIT_INPUT)
        _emit(exporter.export(p, fmt), output)
        return EXIT_OK
    _run(go)


def run(argv: Optional[Sequence[str]] = None) -> None:
    main(args=argv, prog_name="cqproof")


if __name__ == "__main__":  # pragma: no cover
    run()
