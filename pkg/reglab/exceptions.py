"""Errors raised by the regularization laboratory."""


class ReglabError(Exception):
    """Base class for every error raised by ``reglab``."""


class DimensionMismatch(ReglabError, ValueError):
    pass


class NonFiniteValue(ReglabError, ValueError):
    pass


class InvalidParameter(ReglabError, ValueError):
    pass


class NoGlobalConstant(ReglabError):
    """A smoothness constant was requested globally where only a radius-qualified one exists."""


class HessianLipschitzZero(ReglabError, ValueError):
    """tau(L_H) is undefined for L_H = 0; the caller must supply a fixed tau."""


class SolverDivergence(ReglabError, ArithmeticError):
    pass


class ConsistencyError(ReglabError, RuntimeError):
    """Two formulations of the same quantity disagree beyond tolerance."""


class PreconditionError(ReglabError, ValueError):
    pass


class InsufficientData(ReglabError, ValueError):
    pass


class BracketingError(ReglabError):
    def __init__(self, message, low_discrepancy, high_discrepancy, bound):
        super().__init__(
            f"{message} (discrepancy at alpha_lo={low_discrepancy:.6g}, "
            f"at alpha_hi={high_discrepancy:.6g}, bound tau*delta={bound:.6g})"
        )
        self.low_discrepancy = low_discrepancy
        self.high_discrepancy = high_discrepancy
        self.bound = bound


class StudyAborted(ReglabError):
    def __init__(self, delta, reason):
        super().__init__(f"Rate study aborted at delta={delta:.6g}: {reason}")
        self.delta = delta
        self.reason = reason


class ReportWriteError(ReglabError, OSError):
    def __init__(self, path, reason):
        super().__init__(f"Could not write report to {path}: {reason}")
        self.path = path
