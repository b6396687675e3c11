from typing import Any, Dict, Optional


class WaveguideError(Exception):
    """Base class for every error raised by the toolkit"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.diagnostics = diagnostics or {}


class DomainError(WaveguideError, ValueError):
    """Input outside the physical domain of an operation"""


class SingularInputError(DomainError):
    """Input sits on a branch point or on the cut without a side tag"""


class ResonanceAbsentError(DomainError):
    """No real resonant wavenumber exists for the given parameters"""


class NumericalFailure(WaveguideError, RuntimeError):
    """A numerical procedure did not reach its tolerance"""


class QuadratureError(NumericalFailure):
    """Adaptive quadrature did not converge"""


class ConvergenceError(NumericalFailure):
    """An iterative solver exhausted its iteration budget

    The iterate history is kept in ``diagnostics['history']``.
    """

    @property
    def history(self):
        return self.diagnostics.get('history', [])
