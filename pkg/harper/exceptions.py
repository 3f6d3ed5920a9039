"""Error hierarchy.

Every failure the package raises on purpose is a ``HarperError``. Each one
carries a human-readable ``detail`` and the process ``exit_code`` the CLI
returns for it, the same way an HTTP handler pairs a status code with a
detail string.
"""

from typing import Optional

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class HarperError(Exception):
    exit_code = EXIT_NUMERICAL

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


# Validation errors (bad input, exit 2)
class DomainError(HarperError):
    """Parameter outside the domain of the operation."""
    exit_code = EXIT_VALIDATION


class DimensionError(HarperError):
    exit_code = EXIT_VALIDATION


class SymmetryError(HarperError):
    """Input that must be Hermitian is not."""
    exit_code = EXIT_VALIDATION


class NormalizationError(HarperError):
    exit_code = EXIT_VALIDATION


class SingularityError(HarperError):
    """Evaluation requested at a point where the function diverges."""
    exit_code = EXIT_VALIDATION


# Runtime errors (numerical or Monte-Carlo failure, exit 3)
class NumericalError(HarperError):
    exit_code = EXIT_NUMERICAL


class SimulationCapError(HarperError):
    exit_code = EXIT_NUMERICAL


class InsufficientDataError(HarperError):
    exit_code = EXIT_NUMERICAL
