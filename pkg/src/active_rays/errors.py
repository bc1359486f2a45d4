"""Exception hierarchy and CLI exit codes."""

from enum import IntEnum
from pathlib import Path
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .evolution_solver import SolverTrace


class ExitCode(IntEnum):
    OK = 0
    IO = 1
    USAGE = 2
    DEGENERATE_SHAPE = 3
    NUMERICAL_FAILURE = 4
    UNMATCHED_PAIR = 5
    DIMENSION_MISMATCH = 6


class ActiveRaysError(Exception):
    """Base class for every error raised by active_rays."""


class InvalidContourError(ActiveRaysError, ValueError):
    """A polar contour (or an argument building one) violates its invariants."""


class LandscapeError(ActiveRaysError, ValueError):
    """Energy maps with the wrong shape, negative or non-finite values."""


class ConfigError(ActiveRaysError, ValueError):
    """Solver or run parameters out of range."""


class FormatError(ActiveRaysError, ValueError):
    """A file could not be decoded."""

    def __init__(self, message: str, path: Optional[Path] = None):
        self.path = path
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class ShapeSpecError(ActiveRaysError, ValueError):
    """Invalid oracle shape description."""


class DegenerateShapeError(ShapeSpecError):
    """The shape encloses zero area."""


class DimensionMismatchError(ActiveRaysError, ValueError):
    """Two rasters that must share H x W do not."""

    def __init__(self, message: str, sample_id: Optional[str] = None):
        self.sample_id = sample_id
        if sample_id is not None:
            message = f"sample '{sample_id}': {message}"
        super().__init__(message)


class UnmatchedPairError(ActiveRaysError):
    """A prediction without ground truth (or vice versa), or nothing to pair."""

    def __init__(self, message: str, sample_id: Optional[str] = None):
        self.sample_id = sample_id
        super().__init__(message)


class NumericalFailure(ActiveRaysError, ArithmeticError):
    """Radii or energy became NaN or infinite during evolution.

    The trace recorded up to the failing iteration is kept on the exception
    so callers can still export it.
    """

    def __init__(self, message: str, trace: "SolverTrace"):
        self.trace = trace
        super().__init__(message)
