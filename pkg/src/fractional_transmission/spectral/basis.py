"""Orthonormal eigenpairs of l(X) = lambda X with X^(2j)(0) = X^(2j)(pi) = 0.

Two realisations are provided:

* the analytic sine basis for l(u) = (-1)^s u^(2s) + p0 with constant p0;
* a numeric basis for s = 1 and variable p0(x), from second-order central
  differences, Sturm-sequence bisection and inverse iteration.
"""
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline
from scipy.linalg import LinAlgError, eigh_tridiagonal

from ..exceptions import (
    ConvergenceFailure,
    DomainError,
    InsufficientData,
    PositivityViolation,
    QuadratureWarning,
)
from .source import (
    MIN_QUADRATURE_POINTS,
    PhiSource,
    SineSeries,
    simpson_with_estimate,
)

logger = logging.getLogger(__name__)

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
QUADRATURE_TOL = 1e-8
PHI_CONDITION_TOL = 1e-8
BISECTION_ABSTOL = 1e-12


@dataclass(frozen=True)
class AnalyticSine:
    """X(x) = sqrt(2/pi) * sin(frequency * x)."""
    frequency: int
    amplitude: float = SQRT_2_OVER_PI

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.amplitude * np.sin(self.frequency * np.asarray(x, dtype=float))

    @property
    def sup_norm(self) -> float:
        return self.amplitude


@dataclass(frozen=True)
class SampledGrid:
    """Eigenfunction sampled on a uniform grid of [0, pi], endpoints included.

    Off-grid values come from a natural cubic spline; X'' = (p0 - lambda) X
    vanishes with X at both ends.
    """
    x: np.ndarray
    values: np.ndarray
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_spline", CubicSpline(self.x, self.values, bc_type="natural"))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self._spline(np.asarray(x, dtype=float))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def step(self) -> float:
        return float(self.x[1] - self.x[0])


Eigenfunction = Union[AnalyticSine, SampledGrid]


@dataclass(frozen=True)
class EigenPair:
    """Index k, eigenvalue lambda_k and orthonormal eigenfunction X_k."""
    k: int
    lambda_k: float
    eigenfunction: Eigenfunction

    @property
    def is_analytic(self) -> bool:
        return isinstance(self.eigenfunction, AnalyticSine)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.eigenfunction(x)


@dataclass
class SourceData:
    """A jump datum together with its Fourier coefficients phi_k = (phi, X_k)."""
    phi: PhiSource
    coefficients: np.ndarray
    quadrature_error: float = 0.0

    def coefficient(self, k: int) -> float:
        return float(self.coefficients[k - 1])


@dataclass
class AsymptoticFit:
    """Least-squares fit lambda_k - k^(2s) ~ c0 + c2 / k^2."""
    c0: float
    c2: float
    residual: float
    indices: List[int]


@dataclass
class PhiReport:
    """Result of checking phi against the smoothness/compatibility conditions."""
    passed: bool
    violations: List[str] = field(default_factory=list)
    values: Dict[str, float] = field(default_factory=dict)
    estimated: bool = False


@dataclass
class BesselReport:
    """Partial sums of X_k(x)^2 / lambda_k^2 at a probe abscissa."""
    x_probe: float
    partial_sums: np.ndarray
    nondecreasing: bool
    tail_increment: float

    @property
    def converged(self) -> bool:
        return self.tail_increment < 1e-8


def analytic_eigens(s: int, p0_const: float, K: int) -> List[EigenPair]:
    """Eigenpairs lambda_k = k^(2s) + p0, X_k = sqrt(2/pi) sin(k x), k = 1..K.

    Raises:
        DomainError: s < 1 or K < 1
        PositivityViolation: lambda_1 = 1 + p0 <= 0
    """
    if s < 1 or K < 1:
        raise DomainError(f"need s >= 1 and K >= 1, got s={s}, K={K}")
    if 1.0 + p0_const <= 0.0:
        raise PositivityViolation(f"lambda_1 = 1 + p0 = {1.0 + p0_const} is not positive")
    return [
        EigenPair(k=k, lambda_k=float(k ** (2 * s)) + p0_const, eigenfunction=AnalyticSine(k))
        for k in range(1, K + 1)
    ]


def _tridiagonal(p0_samples: np.ndarray):
    n = len(p0_samples)
    h = math.pi / (n + 1)
    d = 2.0 / h ** 2 + p0_samples
    e = np.full(n - 1, -1.0 / h ** 2)
    return d, e, h


def numeric_eigens_s1(p0_samples: Sequence[float], K: int) -> List[EigenPair]:
    """Eigenpairs of -X'' + p0(x) X = lambda X, X(0) = X(pi) = 0.

    Args:
        p0_samples: p0 at the n interior points x_i = i*pi/(n+1), i = 1..n
        K: Number of eigenpairs (n >= 8K)

    Returns:
        K eigenpairs with sampled eigenfunctions, normalised by the trapezoid rule

    Raises:
        DomainError: grid too coarse for K
        ConvergenceFailure: bisection or inverse iteration failed
        PositivityViolation: lambda_1 <= 0
    """
    p0 = np.asarray(p0_samples, dtype=float)
    n = len(p0)
    if K < 1 or n < 8 * K:
        raise DomainError(f"need n >= 8K interior points, got n={n}, K={K}")
    d, e, h = _tridiagonal(p0)

    try:
        lambdas, vectors = eigh_tridiagonal(
            d, e, select="i", select_range=(0, K - 1),
            lapack_driver="stebz", tol=BISECTION_ABSTOL,
        )
    except LinAlgError as exc:
        for i in range(K):
            try:
                eigh_tridiagonal(d, e, select="i", select_range=(i, i),
                                 lapack_driver="stebz", tol=BISECTION_ABSTOL)
            except LinAlgError:
                raise ConvergenceFailure(f"eigenvalue {i + 1} did not converge", index=i + 1) from exc
        raise ConvergenceFailure(str(exc)) from exc

    if lambdas[0] <= 0.0:
        raise PositivityViolation(f"lambda_1 = {lambdas[0]} is not positive")
    if np.any(np.diff(lambdas) <= 0.0):
        raise ConvergenceFailure("eigenvalues are not strictly increasing")

    x = np.linspace(0.0, math.pi, n + 2)
    pairs = []
    for i in range(K):
        values = np.zeros(n + 2)
        values[1:-1] = vectors[:, i]
        values /= math.sqrt(trapezoid(values ** 2, x=x))
        lead = values[np.argmax(np.abs(values) > 1e-14 * np.max(np.abs(values)))]
        if lead < 0:
            values = -values
        pairs.append(EigenPair(k=i + 1, lambda_k=float(lambdas[i]),
                               eigenfunction=SampledGrid(x=x, values=values)))
    logger.debug(f"Sturm bisection: {K} eigenvalues on n={n}, lambda_K={lambdas[-1]:.6g}")
    return pairs


def sample_p0(p0: Callable[[np.ndarray], np.ndarray], n: int) -> np.ndarray:
    """p0 at the n interior points of the uniform grid on [0, pi]."""
    x = np.arange(1, n + 1) * math.pi / (n + 1)
    return np.asarray(p0(x), dtype=float) * np.ones(n)


def richardson_eigenvalues(p0: Callable[[np.ndarray], np.ndarray], n: int, K: int) -> np.ndarray:
    """Eigenvalues extrapolated from grids with h and h/2: (4 lam_{h/2} - lam_h) / 3."""
    coarse = [pair.lambda_k for pair in numeric_eigens_s1(sample_p0(p0, n), K)]
    fine = [pair.lambda_k for pair in numeric_eigens_s1(sample_p0(p0, 2 * n + 1), K)]
    return (4.0 * np.asarray(fine) - np.asarray(coarse)) / 3.0


def asymptotic_fit(eigs: Sequence[EigenPair], s: int) -> AsymptoticFit:
    """Fit lambda_k - k^(2s) against {1, k^-2} over the top half of the indices.

    Raises:
        InsufficientData: fewer than 6 eigenpairs
    """
    if len(eigs) < 6:
        raise InsufficientData(f"asymptotic fit needs >= 6 eigenpairs, got {len(eigs)}")
    ordered = sorted(eigs, key=lambda pair: pair.k)
    top = ordered[len(ordered) // 2:]
    k = np.array([pair.k for pair in top], dtype=float)
    rhs = np.array([pair.lambda_k for pair in top]) - k ** (2 * s)
    A = np.column_stack([np.ones_like(k), k ** -2])
    coef, _, _, _ = np.linalg.lstsq(A, rhs, rcond=None)
    residual = float(np.linalg.norm(A @ coef - rhs))
    return AsymptoticFit(c0=float(coef[0]), c2=float(coef[1]), residual=residual,
                         indices=[pair.k for pair in top])


def _quadrature_grid(eigs: Sequence[EigenPair]) -> np.ndarray:
    """Odd-sized Simpson grid of at least MIN_QUADRATURE_POINTS points.

    Sampled eigenfunctions are evaluated on it through their splines.
    """
    n = max(MIN_QUADRATURE_POINTS, 16 * len(eigs) + 1)
    for pair in eigs:
        if isinstance(pair.eigenfunction, SampledGrid):
            n = max(n, len(pair.eigenfunction.x))
    n += 1 - n % 2
    return np.linspace(0.0, math.pi, n)


def _sample_grid(eigs: Sequence[EigenPair]) -> np.ndarray:
    """Grid the eigenfunctions were normalised on, else the quadrature grid."""
    for pair in eigs:
        if isinstance(pair.eigenfunction, SampledGrid):
            return pair.eigenfunction.x
    return _quadrature_grid(eigs)



def fourier_coeffs(phi: PhiSource, eigs: Sequence[EigenPair]) -> SourceData:
    """Fourier coefficients phi_k = integral_0^pi phi(x) X_k(x) dx.

    Sine-series data against the analytic basis uses sine orthogonality
    exactly; everything else uses composite Simpson quadrature.

    Warns:
        QuadratureWarning: estimated quadrature error above 1e-8
    """
    if isinstance(phi, SineSeries) and all(
        isinstance(pair.eigenfunction, AnalyticSine) for pair in eigs
    ):
        coeffs = np.array([
            phi.coefficient(pair.eigenfunction.frequency) / pair.eigenfunction.amplitude
            for pair in eigs
        ])
        return SourceData(phi=phi, coefficients=coeffs, quadrature_error=0.0)

    x = _quadrature_grid(eigs)
    basis = np.array([pair(x) for pair in eigs])
    integrals, errors = simpson_with_estimate(basis * phi(x), x)
    worst = float(np.max(errors)) if len(errors) else 0.0
    if worst > QUADRATURE_TOL:
        logger.warning(f"Fourier quadrature error estimate {worst:.2e} exceeds {QUADRATURE_TOL:.0e}")
        warnings.warn(
            f"estimated quadrature error {worst:.2e} exceeds {QUADRATURE_TOL:.0e}",
            QuadratureWarning,
            stacklevel=2,
        )
    return SourceData(phi=phi, coefficients=np.asarray(integrals, dtype=float), quadrature_error=worst)


def bessel_inequality_check(source: SourceData) -> np.ndarray:
    """Slack of Bessel's inequality, integral(phi^2) - sum_{k<=K} phi_k^2, for every K."""
    return source.phi.squared_norm() - np.cumsum(source.coefficients ** 2)


def validate_phi(phi: PhiSource, s: int, p0_ends: Sequence[float] = (0.0, 0.0),
                 threshold: float = PHI_CONDITION_TOL) -> PhiReport:
    """Check phi^(2j) and (l phi)^(2j) vanish at 0 and pi for j = 0..s-1.

    Violations are reported, never raised; they weaken the convergence
    guarantee of the series solution but do not stop a solve.

    Args:
        phi: Jump datum
        s: Half order of the spatial operator
        p0_ends: p0(0) and p0(pi) (equal to the constant for the analytic path)
        threshold: Absolute threshold for "vanishes"
    """
    ends = np.array([0.0, math.pi])
    sign = (-1.0) ** s
    report = PhiReport(passed=True, estimated=not phi.exact_derivatives)
    p0 = np.asarray(p0_ends, dtype=float)

    for j in range(s):
        checks = {
            f"phi^({2 * j})": (phi.derivative(2 * j, ends), phi.derivative_error(2 * j)),
            f"lphi^({2 * j})": (
                sign * phi.derivative(2 * s + 2 * j, ends) + p0 * phi.derivative(2 * j, ends),
                phi.derivative_error(2 * s + 2 * j),
            ),
        }
        for name, (values, error) in checks.items():
            limit = max(threshold, 10.0 * error)
            for where, value in zip(("0", "pi"), values):
                key = f"{name}({where})"
                report.values[key] = float(value)
                if abs(value) > limit:
                    report.passed = False
                    report.violations.append(f"{key} = {value:.3e}")

    if report.violations:
        logger.warning(f"phi violates boundary compatibility: {', '.join(report.violations)}")
    return report


def bessel_bound_check(eigs: Sequence[EigenPair], x_probe: float) -> BesselReport:
    """Partial sums of sum_k X_k(x)^2 / lambda_k^2 at x_probe.

    Raises:
        InsufficientData: fewer than 2 eigenpairs
    """
    if len(eigs) < 2:
        raise InsufficientData("Bessel bound check needs at least 2 eigenpairs")
    increments = np.array([float(pair(x_probe)) ** 2 / pair.lambda_k ** 2 for pair in eigs])
    sums = np.cumsum(increments)
    return BesselReport(
        x_probe=float(x_probe),
        partial_sums=sums,
        nondecreasing=bool(np.all(np.diff(sums) >= 0.0)),
        tail_increment=float(increments[-1]),
    )


def orthonormality_defect(eigs: Sequence[EigenPair]) -> float:
    """max_{i,j} |<X_i, X_j> - delta_ij| with the trapezoid inner product."""
    x = _sample_grid(eigs)
    basis = np.array([pair(x) for pair in eigs])
    weights = np.full(len(x), x[1] - x[0])
    weights[[0, -1]] *= 0.5
    gram = (basis * weights) @ basis.T
    return float(np.max(np.abs(gram - np.eye(len(eigs)))))


def rayleigh_quotients(eigs: Sequence[EigenPair], p0_samples: Sequence[float]) -> np.ndarray:
    """<X_k, -X_k'' + p0 X_k> on the finite-difference grid (numeric path)."""
    p0 = np.asarray(p0_samples, dtype=float)
    d, e, h = _tridiagonal(p0)
    quotients = []
    for pair in eigs:
        if not isinstance(pair.eigenfunction, SampledGrid):
            raise DomainError("Rayleigh quotients are defined for sampled eigenfunctions")
        v = pair.eigenfunction.values[1:-1]
        Av = d * v
        Av[:-1] += e * v[1:]
        Av[1:] += e * v[:-1]
        quotients.append(h * float(v @ Av))
    return np.asarray(quotients)
