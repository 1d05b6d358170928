"""
==========================
Helpers - Errors
==========================

Exception hierarchy shared by the estimator, the benchmark harness and the CLI.
Every error carries the process exit status the CLI reports for it.

Usage:
>>> from app.helpers.errors import ConfigError
>>> raise ConfigError("nbar must be >= 2")

*Author: Sudharshan TK*\n
*Created: 2025-09-04*
"""

from typing import Optional, Sequence


class SslhsError(Exception):
    """Base class of all errors raised by the package."""

    exit_code = 1


class ConfigError(SslhsError, ValueError):
    """Invalid configuration, experiment file, trace file or CLI flag."""

    exit_code = 2


class ModelError(SslhsError):
    """
    The model could not be evaluated (non-finite output, black-box protocol failure).

    Args:
        message (str): What went wrong.
        point (Sequence[float], optional): The input point being evaluated.
        raw (str, optional): Raw black-box response, if any.
    """

    exit_code = 3

    def __init__(self, message: str, point: Optional[Sequence[float]] = None, raw: Optional[str] = None):
        super().__init__(message)
        self.point = None if point is None else [float(v) for v in point]
        self.raw = raw

    def __str__(self) -> str:
        msg = super().__str__()
        if self.point is not None:
            msg += f" (point={self.point})"
        if self.raw is not None:
            msg += f" (raw={self.raw!r})"
        return msg


class NumericalError(SslhsError, ArithmeticError):
    """A numerical routine failed (non-finite fit, degenerate factorization)."""

    exit_code = 4


class StratificationError(SslhsError, ValueError):
    """Invalid stratum geometry or an unknown stratum / dimension."""

    exit_code = 4


class SamplingError(SslhsError, ValueError):
    """Invalid sampling request."""

    exit_code = 4


class GpcError(NumericalError, ValueError):
    """Invalid basis or least-squares request."""
