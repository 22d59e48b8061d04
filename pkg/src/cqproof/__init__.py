"""Minimal proofs for answers to conjunctive queries over DL-Lite_R and
existential rule knowledge bases, with a metric temporal extension."""
from .chase import ChaseConfig, ResourceLimitExceeded, chase, entails
from .graph import Proof, ProofGraph, depth, is_tree, size, tree_size, unravel, validate_proof
from .logic import (CQ, Atom, ConceptInclusion, ConceptName, Constant, Exists, ExistentialRule,
                    KnowledgeBase, Role, RoleInclusion, SkolemTerm, Variable)
from .search import (NotEntailed, SearchGoal, brute_force_min, decide_op, min_measure, min_proof,
                     min_size, min_tree_size)
from .syntax import ParseError, NonDLLiteError, parse_kb, parse_query, parse_temporal
from .treeshaped import is_tree_shaped, tree_shaped_min

__version__ = "0.1.0"

__all__ = [
    "ChaseConfig", "ResourceLimitExceeded", "chase", "entails", "Proof", "ProofGraph", "depth",
    "is_tree", "size", "tree_size", "unravel", "validate_proof", "CQ", "Atom", "ConceptInclusion",
    "ConceptName", "Constant", "Exists", "ExistentialRule", "KnowledgeBase", "Role",
    "RoleInclusion", "SkolemTerm", "Variable", "NotEntailed", "SearchGoal", "brute_force_min",
    "decide_op", "min_measure", "min_proof", "min_size", "min_tree_size", "ParseError",
    "NonDLLiteError", "parse_kb", "parse_query", "parse_temporal", "is_tree_shaped",
    "tree_shaped_min", "__version__",
]
