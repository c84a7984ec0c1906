"""Scoped extension methods: strategy-parameterized lookup, an interpreter
for a small object language, and accidental-override analysis."""
from .analysis import (
    AosResult, DominanceRow, MessageContext, MethodLocation, aos_bruteforce,
    aos_extensions_first, aos_hierarchy_first, detect_overrides,
    detect_overwrites, dominance_summary, dominance_sweep, dominance_table,
    world_stats,
)
from .frontend import WorldParseError, export_world, load_world, parse_world
from .interp import EvalOutcome, evaluate, evaluate_matrix
from .lookup import Activation, ResolvedMethod, Selection, StrategyConfig, lookup
from .model import (
    GLOBAL, ExtensionRef, ImportConfig, Signature, World, ancestors,
    descendants, effective_imports, validate_world,
)

__version__ = "0.1.0"
