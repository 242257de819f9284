"""Semiring-generic Datalog° evaluation with convergence accounting."""

from .engine import (
    BoundInfo,
    EvaluationReport,
    c_bound,
    effective_stability,
    evaluate_to_fixpoint,
    h_bound,
    iterate,
    step,
    theorem_bound,
)
from .grounding import GroundedSystem, Monomial, ground, prune_inactive, system_stats
from .program import FactBase, Program, load_facts, load_program, parse_facts, parse_program
from .semiring import (
    Boolean,
    BoundedNatural,
    Element,
    MaxPlus,
    Semiring,
    Tropical,
    TropK,
    parse_semiring,
    stability_index,
)

__version__ = "0.1.0"
