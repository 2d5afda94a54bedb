"""Exception hierarchy shared by every solver layer.

Each error carries a short machine-readable ``code`` that the CLI reports
and maps onto its exit status.
"""


class LPError(Exception):
    code = "lp_error"
    exit_status = 5


class SingularSystem(LPError):
    code = "singular_system"


class NotFeasible(LPError):
    code = "not_feasible"


class PositivityLost(LPError):
    code = "positivity_lost"


class InvariantBroken(LPError):
    code = "invariant_broken"

    def __init__(self, which, detail=""):
        self.which = which
        super().__init__(f"{which}: {detail}" if detail else which)


class IterationLimit(LPError):
    code = "iteration_limit"


class ConstantOverflow(LPError):
    code = "overflow"


class NonIntegralData(LPError):
    code = "non_integral_data"
    exit_status = 4


class SplitViolation(LPError):
    code = "split_violation"


class RoundingFailed(LPError):
    code = "rounding_failed"


class OracleTooLarge(LPError):
    code = "oracle_too_large"
    exit_status = 4


class ParseError(LPError):
    code = "parse_error"
    exit_status = 4

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            where += ": "
        super().__init__(where + message)


class FreeVariableUnsupported(ParseError):
    code = "free_variable"
