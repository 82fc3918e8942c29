"""Exception taxonomy shared by the library and the command line tool.

Configuration and domain problems (bad parameters, inconsistent inputs) are
distinguished from numeric failures (non-convergent refinements, series that
exceed their term budget) because the CLI maps them to different exit codes.
"""


class SphframesError(Exception):
    """Base class for all library-specific errors."""


class ConfigurationError(SphframesError, ValueError):
    """Invalid or inconsistent configuration (CLI exit code 2)."""


class DomainError(SphframesError, ValueError):
    """Argument outside the mathematical domain of an operation (exit code 2)."""


class NumericError(SphframesError, RuntimeError):
    """Numerical failure: divergence, overflow, budget exhaustion (exit code 3)."""


class DegenerateInputError(NumericError):
    """Input is numerically degenerate (e.g. a band function with zero norm)."""
