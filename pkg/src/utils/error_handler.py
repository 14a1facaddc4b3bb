"""
Exception hierarchy and CLI error handling for the solver and its analyses
"""

import uuid
from functools import wraps
from typing import Any, Dict, Optional

from loguru import logger

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_NUMERICAL_FAILURE = 2


class PMEWaveError(Exception):
    """Base class for every error raised by this package"""

    exit_code = EXIT_NUMERICAL_FAILURE


class ConfigError(PMEWaveError, ValueError):
    """Invalid experiment configuration, optionally tied to a config line"""

    exit_code = EXIT_CONFIG_ERROR

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class AdmissibilityError(ConfigError):
    """Physically inadmissible parameters (c <= c_star, tau outside the domain, ...)"""


class GridMismatchError(PMEWaveError, ValueError):
    """Two fields that must share a grid do not"""


class StencilRangeError(PMEWaveError, IndexError):
    """A stencil was evaluated where its neighbours do not exist"""


class CFLViolationError(PMEWaveError):
    """A time step exceeding the stability bound was requested"""


class NumericalInstabilityError(PMEWaveError):
    """NaN or Inf appeared in a field"""


class BoundaryContactError(PMEWaveError):
    """The support reached the Dirichlet column at x=0"""


class EmptyLadderError(PMEWaveError, ValueError):
    """No levelset of the eps ladder lies above the floor"""

    exit_code = EXIT_CONFIG_ERROR


class InsufficientSamplesError(PMEWaveError, ValueError):
    """Not enough samples for a windowed estimate"""


class DegenerateSlopeError(PMEWaveError, ValueError):
    """Nonpositive interface slope where a positive one is required"""


class SnapshotFormatError(PMEWaveError, ValueError):
    """A snapshot or flow file does not follow the expected layout"""


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the process exit code"""
    if isinstance(error, PMEWaveError):
        return error.exit_code
    if isinstance(error, (FloatingPointError, ArithmeticError)):
        return EXIT_NUMERICAL_FAILURE
    if isinstance(error, (ValueError, FileNotFoundError)):
        return EXIT_CONFIG_ERROR
    return EXIT_NUMERICAL_FAILURE


class ErrorHandler:
    """Log failures with a short id so a run log can be matched to a report"""

    def __init__(self, debug_mode: bool = False):
        self.debug_mode = debug_mode

    def handle_error(self, error: BaseException, context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """
        Log an error and describe it for the caller

        Args:
            error: The exception that occurred
            context: Additional context information

        Returns:
            Error description with id, type, message and exit code
        """
        error_id = str(uuid.uuid4())[:8]
        code = exit_code_for(error)

        bound = logger.bind(error_id=error_id, error_type=type(error).__name__, **(context or {}))
        if self.debug_mode:
            bound.opt(exception=error).error(f"Error {error_id}: {error}")
        else:
            bound.error(f"Error {error_id}: {type(error).__name__}: {error}")

        return {
            "error_id": error_id,
            "error_type": type(error).__name__,
            "message": str(error),
            "exit_code": code,
        }


def cli_error_handler(debug_mode: bool = False):
    """
    Decorator turning package exceptions into exit codes

    The wrapped callable returns an int exit code; exceptions are logged and
    converted instead of propagating to the terminal as a traceback.
    """
    handler = ErrorHandler(debug_mode)

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs) -> int:
            try:
                result = func(*args, **kwargs)
                return EXIT_OK if result is None else int(result)
            except Exception as e:
                report = handler.handle_error(e, {"command": func.__name__})
                return report["exit_code"]

        return wrapper

    return decorator
