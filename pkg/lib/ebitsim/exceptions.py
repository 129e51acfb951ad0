"""
Exceptions for ebitsim.

Library operations raise :class:`DomainError` when called outside their
preconditions and :class:`NumericalFailure` when a computation completes but
its outcome is meaningless (e.g. a post-selection that never succeeds).  The
CLI maps these onto its exit codes.
"""
from typing import Optional


class EbitsimError(Exception):
    """
    Base class for all errors raised deliberately by ebitsim.
    """
    pass


class DomainError(EbitsimError, ValueError):
    """
    Raised when an operation's preconditions are not met, such as a port index
    outside the basis or a matrix too large for an exact permanent.

    *field* optionally names the offending parameter.
    """
    def __init__(self, message: str, field: Optional[str] = None) -> None:
        super().__init__(message)
        self.field = field


class ConfigError(EbitsimError, ValueError):
    """
    Raised when an experiment config fails validation.

    *path* is the JSON path of the offending field, e.g. ``$.protocol.n``.
    """
    def __init__(self, message: str, path: str = "$") -> None:
        super().__init__(f"{path}: {message}")
        self.message = message
        self.path = path


class NumericalFailure(EbitsimError, ArithmeticError):
    """
    Raised when a computation's result cannot be used, as opposed to when its
    inputs were invalid.
    """
    pass


class ZeroSuccessAmplitude(NumericalFailure):
    """
    Raised when a post-selection event has zero amplitude, so there is no
    conditional state to renormalize.
    """
    def __init__(self, message: str = "post-selection has zero success amplitude") -> None:
        super().__init__(message)


class GridUnderResolved(NumericalFailure):
    """
    Raised when a momentum grid is too coarse or too narrow for the numerical
    Schmidt spectrum to agree with its analytic oracle.

    The suggested *extent* and *points* are included in the message.
    """
    def __init__(self, rel_err: float, extent: float, points: int, detail: Optional[str] = None) -> None:
        message = (
            f"grid under-resolved: oracle relative error {rel_err:.3%}; "
            f"try extent ≥ {extent:.6g} and points ≥ {points}")

        if detail:
            message += f" ({detail})"

        super().__init__(message)
        self.rel_err = rel_err
        self.extent = extent
        self.points = points
