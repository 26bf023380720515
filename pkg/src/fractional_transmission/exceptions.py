"""Exception hierarchy for the fractional transmission solver."""
from typing import List, Optional, Sequence


class FractionalTransmissionError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(FractionalTransmissionError, ValueError):
    """An argument lies outside the supported parameter domain."""


class ConfigError(FractionalTransmissionError, ValueError):
    """A problem configuration violates its invariants or schema."""


class NonConvergence(FractionalTransmissionError):
    """No Mittag-Leffler evaluation method attained the requested tolerance."""

    def __init__(self, message: str, best_bound: float):
        super().__init__(f"{message} (best bound achieved: {best_bound:.3e})")
        self.best_bound = best_bound


class AsymptoticRegimeError(FractionalTransmissionError):
    """The argument is too small for the requested number of asymptotic terms."""


class PositivityViolation(FractionalTransmissionError):
    """The first eigenvalue is not positive."""


class ConvergenceFailure(FractionalTransmissionError):
    """The eigen-solver failed to converge for one eigenvalue."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class InsufficientData(FractionalTransmissionError):
    """Too few samples were supplied for a fit."""


class DegenerateData(FractionalTransmissionError):
    """Error sequence reached the rounding floor; no order can be fitted."""


class DegenerateMode(FractionalTransmissionError):
    """Delta(k) vanishes for mode k; route the problem to solve_degenerate."""

    def __init__(self, k: int, delta: float):
        super().__init__(f"mode {k} is degenerate (|Delta| = {abs(delta):.3e})")
        self.k = k
        self.delta = delta


class Infeasible(FractionalTransmissionError):
    """Orthogonality fails for a degenerate mode: the problem has no solution."""

    def __init__(self, indices: Sequence[int], magnitudes: Sequence[float]):
        self.indices: List[int] = list(indices)
        self.magnitudes: List[float] = [float(m) for m in magnitudes]
        detail = ", ".join(
            f"k={k} (|phi_k|={m:.3e})" for k, m in zip(self.indices, self.magnitudes)
        )
        super().__init__(f"orthogonality violated for degenerate modes: {detail}")


class QuadratureWarning(UserWarning):
    """Estimated quadrature error exceeds the requested accuracy."""
