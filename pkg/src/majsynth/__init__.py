"""Synthesis of majority-gate expressions from truth tables."""

from .expr import Cost, MajExpr, cost_of, evaluate, maj, normalize_inverters, parse_expr, truth_table_of, var
from .synth import SynthesisError, SynthResult, Synthesizer, synthesize
from .tables import Tables, gen_m2, gen_primitives, get_tables
from .truth_table import InputDomainError, TernaryPattern, TruthTable

__all__ = [
    "Cost",
    "InputDomainError",
    "MajExpr",
    "SynthResult",
    "SynthesisError",
    "Synthesizer",
    "Tables",
    "TernaryPattern",
    "TruthTable",
    "cost_of",
    "evaluate",
    "gen_m2",
    "gen_primitives",
    "get_tables",
    "maj",
    "normalize_inverters",
    "parse_expr",
    "synthesize",
    "truth_table_of",
    "var",
]
