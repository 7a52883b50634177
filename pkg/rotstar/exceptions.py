"""Exceptions raised by the rotstar solvers.

Every error carries the process exit code the command line front end reports for it.
"""

from __future__ import annotations

from typing import Any


class RotStarError(Exception):
    """Base class for all rotstar errors."""

    exit_code: int = 1


class ConfigError(RotStarError, ValueError):
    """Invalid solver configuration or non-positive discretization sizes."""

    exit_code = 1


class SnapshotError(RotStarError):
    """Unreadable, malformed or incompatible solution snapshot."""

    exit_code = 1


class InvalidIndex(RotStarError, ValueError):
    """Polytropic index outside the accepted range."""

    exit_code = 2


class OutOfDomain(RotStarError, ValueError):
    """Argument outside the domain on which a quantity is defined."""

    exit_code = 2


class CoincidentPoints(RotStarError, ValueError):
    """The azimuthal kernel was evaluated at two coincident points."""

    exit_code = 2


class InvalidMode(RotStarError, ValueError):
    """Legendre mode index that is odd or below the supported range."""

    exit_code = 2


class NoFiniteZero(RotStarError):
    """The Lane-Emden function stays positive up to the probing radius.

    Attrs:
        r_max (float): Radius up to which the integration was carried.
        solution (Any): The partial integration, usable for evaluation on ``[0, r_max]``.
    """

    exit_code = 3

    def __init__(self, message: str, r_max: float, solution: Any = None) -> None:
        """Keep the probing radius and the partial integration."""
        super().__init__(message)
        self.r_max = r_max
        self.solution = solution


class NotContracting(RotStarError):
    """The fixed-point iteration stopped contracting.

    Attrs:
        report (Any): The iteration report accumulated before the failure.
    """

    exit_code = 4

    def __init__(self, message: str, report: Any = None) -> None:
        """Keep the partial iteration report."""
        super().__init__(message)
        self.report = report


class MaxIterExceeded(RotStarError):
    """The fixed-point iteration used up its iteration budget."""

    exit_code = 5

    def __init__(self, message: str, report: Any = None) -> None:
        """Keep the partial iteration report."""
        super().__init__(message)
        self.report = report


class SingularMode(RotStarError):
    """A per-mode resolvent system could not be factorized."""

    def __init__(self, message: str, mode: int) -> None:
        """Keep the failing Legendre mode."""
        super().__init__(message)
        self.mode = mode


class DegenerateMatching(RotStarError):
    """The exterior matching system for a Legendre mode is degenerate."""


class NoBracket(RotStarError):
    """No sign change of the enthalpy inside the surface search interval."""


class IndexOutOfTheoryWarning(UserWarning):
    """Polytropic index below the range in which invertibility is established."""
