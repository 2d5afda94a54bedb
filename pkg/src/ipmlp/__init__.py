"""Exact short-step primal-dual interior-point solver for linear programs."""

from .errors import (FreeVariableUnsupported, InvariantBroken, LPError, ParseError,
                     RoundingFailed, SplitViolation)
from .lpformat import emit_lp, load_problem, parse_lp, read_mps
from .model import Constraint, GeneralLP, StandardLP, to_standard_form
from .solver import RunConfig, RunResult, run, solve_standard, verify_certificate

__all__ = [
    "Constraint", "FreeVariableUnsupported", "GeneralLP", "InvariantBroken", "LPError",
    "ParseError", "RoundingFailed", "RunConfig", "RunResult", "SplitViolation", "StandardLP",
    "emit_lp", "load_problem", "parse_lp", "read_mps", "run", "solve_standard",
    "to_standard_form", "verify_certificate",
]
__version__ = "0.1.0"
