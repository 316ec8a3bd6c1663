"""Guaranteed floating-point ranges for discrete-time dataflow models.

The package combines a sound outward-rounded interval substrate, a
partially relational abstract domain of floating-point slope expansions,
an abstract interpreter for simulation-loop programs, and a bit-exact
concrete oracle used to fuzz the analysis for soundness.
"""

from .analyzer import AnalysisReport, AnalyzeOptions, analyze
from .baselines import naive_interval_eval, real_derivative_eval, real_slope_eval
from .diagnostics import Diagnostic
from .frontend import Model, ModelError, format_model, load_model, lower_to_program, parse_model
from .interval import BOTTOM, TOP, Interval, IntervalDomainError, MidpointUndefined
from .oracle import (
    ConcreteTrace,
    FuzzVerdict,
    fuzz_soundness,
    gamma_member,
    simulate_batch,
    simulate_concrete,
    simulate_model,
)
from .profiles import DOUBLE, DOUBLE_ROUNDING, EXTENDED, PROFILES, SINGLE, PrecisionProfile, get_profile
from .program import Assign, BinOp, Branch, Cond, Const, Program, SqrtOp, Var
from .slopes import IndRegistry, SlopeContext, SlopeValue

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "AnalyzeOptions",
    "analyze",
    "naive_interval_eval",
    "real_derivative_eval",
    "real_slope_eval",
    "Diagnostic",
    "Model",
    "ModelError",
    "format_model",
    "load_model",
    "lower_to_program",
    "parse_model",
    "BOTTOM",
    "TOP",
    "Interval",
    "IntervalDomainError",
    "MidpointUndefined",
    "ConcreteTrace",
    "FuzzVerdict",
    "fuzz_soundness",
    "gamma_member",
    "simulate_batch",
    "simulate_concrete",
    "simulate_model",
    "DOUBLE",
    "DOUBLE_ROUNDING",
    "EXTENDED",
    "PROFILES",
    "SINGLE",
    "PrecisionProfile",
    "get_profile",
    "Assign",
    "BinOp",
    "Branch",
    "Cond",
    "Const",
    "Program",
    "SqrtOp",
    "Var",
    "IndRegistry",
    "SlopeContext",
    "SlopeValue",
    "__version__",
]
