"""Forms of the jump datum phi(x) on [0, pi] and quadrature helpers."""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from ..exceptions import DomainError

logger = logging.getLogger(__name__)

MIN_QUADRATURE_POINTS = 2049


class PhiSource(ABC):
    """A function on [0, pi] with (exact or estimated) derivatives."""

    #: True when derivatives are computed in closed form.
    exact_derivatives: bool = False

    @abstractmethod
    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate phi at the abscissae x."""

    @abstractmethod
    def derivative(self, order: int, x: np.ndarray) -> np.ndarray:
        """Evaluate the order-th derivative of phi at x."""

    def squared_norm(self) -> float:
        """Integral of phi**2 over [0, pi]."""
        x = np.linspace(0.0, math.pi, 4 * MIN_QUADRATURE_POINTS + 1)
        return float(simpson(self(x) ** 2, x=x))

    def derivative_error(self, order: int) -> float:
        """Estimated absolute error of derivative(order, .) at the endpoints."""
        return 0.0


@dataclass(frozen=True)
class SineSeries(PhiSource):
    """phi(x) = sum_j coeffs[j-1] * sin(j x)."""
    coeffs: Tuple[float, ...]
    exact_derivatives = True

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def _freqs(self) -> np.ndarray:
        return np.arange(1, len(self.coeffs) + 1, dtype=float)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.derivative(0, x)

    def derivative(self, order: int, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.coeffs:
            return np.zeros_like(x)
        j = self._freqs()
        weights = np.asarray(self.coeffs) * j ** order
        return np.sin(np.multiply.outer(x, j) + order * math.pi / 2) @ weights

    def squared_norm(self) -> float:
        return 0.5 * math.pi * float(np.sum(np.square(self.coeffs)))

    def coefficient(self, k: int) -> float:
        """Sine coefficient of sin(k x); zero beyond the stored length."""
        return self.coeffs[k - 1] if 1 <= k <= len(self.coeffs) else 0.0


@dataclass(frozen=True)
class PolynomialSource(PhiSource):
    """phi(x) = sum_i coeffs[i] * x**i (ascending powers)."""
    coeffs: Tuple[float, ...]
    exact_derivatives = True

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.coeffs)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.poly(np.asarray(x, dtype=float))

    def derivative(self, order: int, x: np.ndarray) -> np.ndarray:
        return self.poly.deriv(order)(np.asarray(x, dtype=float)) if order else self(x)

    def squared_norm(self) -> float:
        antiderivative = (self.poly ** 2).integ()
        return float(antiderivative(math.pi) - antiderivative(0.0))


class _ChebyshevDerivatives:
    """Derivative estimates from two Chebyshev fits of different degree."""

    def _fits(self) -> Tuple[Chebyshev, Chebyshev]:
        raise NotImplementedError

    def derivative(self, order: int, x: np.ndarray) -> np.ndarray:
        if order == 0:
            return self(x)  # type: ignore[operator]
        return self._fits()[0].deriv(order)(np.asarray(x, dtype=float))

    def derivative_error(self, order: int) -> float:
        fine, coarse = self._fits()
        ends = np.array([0.0, math.pi])
        if order == 0:
            return 0.0
        return float(np.max(np.abs(fine.deriv(order)(ends) - coarse.deriv(order)(ends))))


class SampledSource(_ChebyshevDerivatives, PhiSource):
    """phi given by samples on a uniform grid of [0, pi] (endpoints included)."""

    def __init__(self, values: Sequence[float]):
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim != 1 or len(self.values) < 4:
            raise DomainError("sampled phi needs at least 4 samples")
        self.grid = np.linspace(0.0, math.pi, len(self.values))
        self._spline = CubicSpline(self.grid, self.values)
        self._cheb: Optional[Tuple[Chebyshev, Chebyshev]] = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self._spline(np.asarray(x, dtype=float))

    def _fits(self) -> Tuple[Chebyshev, Chebyshev]:
        if self._cheb is None:
            deg = max(4, min(32, len(self.values) // 4))
            domain = [0.0, math.pi]
            self._cheb = (
                Chebyshev.fit(self.grid, self.values, deg, domain=domain),
                Chebyshev.fit(self.grid, self.values, max(3, deg - 8), domain=domain),
            )
        return self._cheb


class CallableSource(_ChebyshevDerivatives, PhiSource):
    """phi given as a vectorised Python callable (library use)."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], degree: int = 40):
        self.func = func
        self.degree = degree
        self._cheb: Optional[Tuple[Chebyshev, Chebyshev]] = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def _fits(self) -> Tuple[Chebyshev, Chebyshev]:
        if self._cheb is None:
            domain = [0.0, math.pi]
            self._cheb = (
                Chebyshev.interpolate(self, self.degree, domain=domain),
                Chebyshev.interpolate(self, self.degree - 8, domain=domain),
            )
        return self._cheb


def simpson_with_estimate(values: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Simpson along the last axis with a Richardson error estimate.

    The estimate compares the full grid against every second abscissa.

    Returns:
        (integrals, estimated absolute errors)
    """
    fine = simpson(values, x=x, axis=-1)
    idx = np.arange(0, len(x), 2)
    if idx[-1] != len(x) - 1:
        idx = np.append(idx, len(x) - 1)
    coarse = simpson(values[..., idx], x=x[idx], axis=-1)
    return fine, np.abs(fine - coarse) / 15.0
