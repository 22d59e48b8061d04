"""Metric temporal conjunctive queries over temporal ABoxes."""
from .intervals import FULL, NEG_INF, POS_INF, Interval, coalesce, cover, interval_arith
from .mtcq import (MTCQ, And, BoxMinus, BoxPlus, CQLeaf, Evaluator, Formula, Next, Or, Prev, Since,
                   TemporalABox, TemporalFact, Top, Until, compute_rulers, eval_mtcq,
                   expand_next_form, reach)
from .prover import (AnnotatedFormula, TemporalChecker, TemporalInferenceError, infer_temporal,
                     relevant_window, temporal_checker, temporal_min_proof)

__all__ = [
    "FULL", "NEG_INF", "POS_INF", "Interval", "coalesce", "cover", "interval_arith",
    "MTCQ", "And", "BoxMinus", "BoxPlus", "CQLeaf", "Evaluator", "Formula", "Next", "Or", "Prev",
    "Since", "TemporalABox", "TemporalFact", "Top", "Until", "compute_rulers", "eval_mtcq",
    "expand_next_form", "reach", "AnnotatedFormula", "TemporalChecker", "TemporalInferenceError",
    "infer_temporal", "relevant_window", "temporal_checker", "temporal_min_proof",
]
