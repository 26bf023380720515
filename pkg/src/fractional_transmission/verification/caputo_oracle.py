"""Finite-difference Caputo operators and time-stepped mode equations.

Independent of the closed forms: the L1 scheme for orders in (0, 1), the
Grunwald-Letnikov scheme applied after removing the affine initial part for
orders in (1, 2), implicit stepping of D v = -lambda v, and halving studies
that fit observed convergence orders.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import rgamma

from ..exceptions import DegenerateData, DomainError, InsufficientData
from ..processing.config import ProblemConfig
from ..processing.mode_solver import FieldSolution, l_image, mode_profile
from ..settings import thread_count
from ..special.mittag_leffler import ml_value

logger = logging.getLogger(__name__)

ORACLE_ML_TOL = 1e-11
ROUNDING_FLOOR = 100.0 * float(np.finfo(float).eps)


@dataclass
class OracleRun:
    """One implicit time-stepping run against its closed-form reference."""
    order: float
    lambda_: float
    dt: float
    horizon: float
    times: np.ndarray
    values: np.ndarray
    reference: np.ndarray
    error_max: float
    error_at_horizon: float
    observed_rate: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            "order": self.order,
            "lambda": self.lambda_,
            "dt": self.dt,
            "horizon": self.horizon,
            "error_max": self.error_max,
            "error_at_horizon": self.error_at_horizon,
            "observed_rate": self.observed_rate,
        }


@dataclass
class ResidualReport:
    """Residual of l(u) + D u = 0 on both sides of the interface under dt halving."""
    dts: List[float]
    upper_residuals: List[float]
    lower_residuals: List[float]
    expected_upper_order: float
    expected_lower_order: float
    window: Tuple[float, float] = (0.5, 1.0)
    notes: List[str] = field(default_factory=list)

    @staticmethod
    def _ratios(residuals: Sequence[float]) -> List[float]:
        return [a / b if b > 0 else math.inf for a, b in zip(residuals, residuals[1:])]

    @property
    def upper_ratios(self) -> List[float]:
        return self._ratios(self.upper_residuals)

    @property
    def lower_ratios(self) -> List[float]:
        return self._ratios(self.lower_residuals)

    @staticmethod
    def _in_band(residuals: Sequence[float], ratios: Sequence[float], order: float,
                 spread: float) -> bool:
        if all(r == 0.0 for r in residuals):
            return True
        target = 2.0 ** order
        return (1.0 - spread) * target <= ratios[-1] <= (1.0 + spread) * target

    def passed(self, spread: float = 0.2) -> bool:
        return (self._in_band(self.upper_residuals, self.upper_ratios, self.expected_upper_order, spread)
                and self._in_band(self.lower_residuals, self.lower_ratios, self.expected_lower_order, spread))

    def to_dict(self) -> Dict:
        return {
            "dts": list(self.dts),
            "upper_residuals": list(self.upper_residuals),
            "lower_residuals": list(self.lower_residuals),
            "upper_ratios": self.upper_ratios,
            "lower_ratios": self.lower_ratios,
            "expected_upper_ratio": 2.0 ** self.expected_upper_order,
            "expected_lower_ratio": 2.0 ** self.expected_lower_order,
            "window": list(self.window),
            "notes": list(self.notes),
            "passed": self.passed(),
        }


def _check_alpha(alpha: float, allow_endpoint: bool) -> None:
    if not (0.0 < alpha < 1.0 or (allow_endpoint and alpha == 1.0)):
        raise DomainError(f"alpha={alpha} outside (0, 1)")


def _check_beta(beta: float, allow_endpoint: bool) -> None:
    if not (1.0 < beta < 2.0 or (allow_endpoint and beta == 2.0)):
        raise DomainError(f"beta={beta} outside (1, 2)")


def l1_weights(alpha: float, count: int) -> np.ndarray:
    """b_j = (j+1)^(1-alpha) - j^(1-alpha), j = 0..count-1 (b_0 = 1)."""
    j = np.arange(count, dtype=float)
    weights = (j + 1.0) ** (1.0 - alpha) - j ** (1.0 - alpha)
    weights[0] = 1.0
    return weights


def gl_weights(beta: float, count: int) -> np.ndarray:
    """w_0 = 1, w_j = w_{j-1} (1 - (beta + 1)/j)."""
    weights = np.empty(count)
    weights[0] = 1.0
    for j in range(1, count):
        weights[j] = weights[j - 1] * (1.0 - (beta + 1.0) / j)
    return weights


def caputo_apply_alpha(samples: Sequence[float], alpha: float, dt: float,
                       allow_endpoint: bool = False) -> np.ndarray:
    """L1 approximation of the Caputo derivative of order alpha in (0, 1).

    The value at node 0 is 0; alpha = 1 (with allow_endpoint) is the
    backward difference.

    Raises:
        DomainError: alpha outside (0, 1), fewer than 2 samples or dt <= 0
    """
    _check_alpha(alpha, allow_endpoint)
    f = np.asarray(samples, dtype=float)
    if f.ndim != 1 or len(f) < 2 or not dt > 0:
        raise DomainError("need at least 2 uniformly spaced samples and dt > 0")
    diffs = np.diff(f)
    scale = dt ** (-alpha) * float(rgamma(2.0 - alpha))
    out = np.zeros_like(f)
    out[1:] = scale * np.convolve(diffs, l1_weights(alpha, len(diffs)))[:len(diffs)]
    return out


def caputo_apply_beta(samples: Sequence[float], beta: float, dt: float, v0: float, v1: float,
                      allow_endpoint: bool = False) -> np.ndarray:
    """Caputo derivative of order beta in (1, 2) by Grunwald-Letnikov weights.

    The affine part v0 + v1 t is removed first, so the Riemann-Liouville
    approximation of the remainder equals the Caputo derivative.

    Raises:
        DomainError: beta outside (1, 2), fewer than 2 samples or dt <= 0
    """
    _check_beta(beta, allow_endpoint)
    f = np.asarray(samples, dtype=float)
    if f.ndim != 1 or len(f) < 2 or not dt > 0:
        raise DomainError("need at least 2 uniformly spaced samples and dt > 0")
    t = dt * np.arange(len(f))
    g = f - (v0 + v1 * t)
    return dt ** (-beta) * np.convolve(g, gl_weights(beta, len(g)))[:len(g)]


@lru_cache(maxsize=200000)
def _ml(mu: float, eta: float, z: float) -> float:
    return ml_value(mu, eta, z, ORACLE_ML_TOL)


def optimal_grading(alpha: float) -> float:
    """Mesh exponent r = (2 - alpha)/alpha that restores order 2 - alpha for L1.

    Solutions of D^alpha v = -lam v behave like 1 - c t^alpha near 0; on a
    uniform mesh this caps the L1 error at first order.
    """
    return max(1.0, (2.0 - alpha) / alpha)


def _grid(dt: float, horizon: float, grading: float = 1.0) -> np.ndarray:
    """Nodes T (j/N)^grading, j = 0..N, with N = round(T/dt)."""
    if not (dt > 0 and horizon > 0):
        raise DomainError("dt and horizon must be positive")
    if grading < 1.0:
        raise DomainError(f"grading must be >= 1, got {grading}")
    steps = int(round(horizon / dt))
    if steps < 2:
        raise DomainError(f"horizon {horizon} holds fewer than 2 steps of {dt}")
    if grading == 1.0:
        return dt * np.arange(steps + 1)
    return horizon * (np.arange(steps + 1) / steps) ** grading


def _finish(order: float, lam: float, dt: float, horizon: float, times: np.ndarray,
            values: np.ndarray, reference: np.ndarray) -> OracleRun:
    errors = np.abs(values - reference)
    run = OracleRun(order=order, lambda_=lam, dt=dt, horizon=horizon, times=times,
                    values=values, reference=reference, error_max=float(np.max(errors)),
                    error_at_horizon=float(errors[-1]))
    logger.debug(f"Oracle order={order} lambda={lam} dt={dt:.3e}: "
                 f"max error {run.error_max:.3e}, at horizon {run.error_at_horizon:.3e}")
    return run


def step_mode_alpha(lam: float, alpha: float, dt: float, horizon: float,
                    allow_endpoint: bool = False, grading: float = 1.0) -> OracleRun:
    """Implicit L1 stepping of D^alpha v = -lam v, v(0) = 1.

    With grading > 1 the nodes cluster at t = 0 (see optimal_grading); dt
    is then the mean step horizon/N. The L1 weights on node n are
    ((t_n - t_{j-1})^(1-alpha) - (t_n - t_j)^(1-alpha)) / (tau_j Gamma(2-alpha)).

    Reference: E_{alpha,1}(-lam t^alpha).
    """
    _check_alpha(alpha, allow_endpoint)
    if lam < 0:
        raise DomainError(f"lambda must be non-negative, got {lam}")
    times = _grid(dt, horizon, grading)
    n_steps = len(times) - 1
    tau = np.diff(times)
    g = float(rgamma(2.0 - alpha))
    values = np.empty(n_steps + 1)
    values[0] = 1.0
    diffs = np.zeros(n_steps)
    for n in range(1, n_steps + 1):
        # last cell; (t_n - t_n)^0 is not usable at alpha = 1
        diagonal = g * tau[n - 1] ** (-alpha)
        history = 0.0
        if n > 1:
            # (s + tau)^p - s^p as s^p expm1(p log1p(tau/s)); cells near 0 are tiny
            span = times[n] - times[1:n]
            cell = tau[:n - 1]
            weights = g * span ** (1.0 - alpha) * np.expm1((1.0 - alpha) * np.log1p(cell / span)) / cell
            history = float(np.dot(weights, diffs[:n - 1]))
        values[n] = (diagonal * values[n - 1] - history) / (diagonal + lam)
        diffs[n - 1] = values[n] - values[n - 1]

    reference = np.array([_ml(alpha, 1.0, -lam * t ** alpha) for t in times])
    return _finish(alpha, lam, dt, horizon, times, values, reference)


def step_mode_beta(lam: float, beta: float, v0: float, v1: float, dt: float, horizon: float,
                   allow_endpoint: bool = False) -> OracleRun:
    """Implicit stepping of D^beta v = -lam v, v(0) = v0, v'(0) = v1.

    Reference: v0 E_{beta,1}(-lam t^beta) + v1 t E_{beta,2}(-lam t^beta).
    """
    _check_beta(beta, allow_endpoint)
    if lam < 0:
        raise DomainError(f"lambda must be non-negative, got {lam}")
    times = _grid(dt, horizon)
    n_steps = len(times) - 1
    scale = dt ** (-beta)
    w = gl_weights(beta, n_steps + 1)
    g = np.zeros(n_steps + 1)
    for n in range(1, n_steps + 1):
        history = float(np.dot(w[1:n + 1], g[n - 1::-1]))
        g[n] = (-lam * (v0 + v1 * times[n]) - scale * history) / (scale * w[0] + lam)
    values = g + v0 + v1 * times
    values[0] = v0

    reference = np.array([
        v0 * _ml(beta, 1.0, -lam * t ** beta) + v1 * t * _ml(beta, 2.0, -lam * t ** beta)
        for t in times
    ])
    return _finish(beta, lam, dt, horizon, times, values, reference)


def observed_order(errors: Sequence[float], steps: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(step).

    Raises:
        InsufficientData: fewer than 3 pairs
        DegenerateData: an error is at or below the rounding floor
    """
    if len(errors) != len(steps) or len(errors) < 3:
        raise InsufficientData(f"need at least 3 (error, step) pairs, got {len(errors)}")
    errors_arr = np.asarray(errors, dtype=float)
    if np.any(~np.isfinite(errors_arr)) or np.any(errors_arr <= ROUNDING_FLOOR):
        raise DegenerateData("errors reached the rounding floor")
    slope, _ = np.polyfit(np.log(np.asarray(steps, dtype=float)), np.log(errors_arr), 1)
    return float(slope)


def halving_study(runner: Callable[[float], OracleRun],
                  steps: Sequence[float]) -> Tuple[List[OracleRun], float]:
    """Run the oracle for every step and fit the order of the horizon error."""
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(runner, steps))
    else:
        runs = [runner(dt) for dt in steps]
    order = observed_order([run.error_at_horizon for run in runs], steps)
    for run in runs:
        run.observed_rate = order
    logger.info(f"Halving study over {len(steps)} steps: observed order {order:.3f}")
    return runs, order


def _side_residual(solution: FieldSolution, dt: float, upper: bool) -> float:
    """max over x and the window [T/2, T] of |D u + l(u)| on one side."""
    cfg = solution.config
    horizon = cfg.b if upper else cfg.a
    n_steps = int(round(horizon / dt))
    t = np.linspace(0.0, horizon, n_steps + 1)
    y = t if upper else -t
    basis = solution.basis_values
    samples = np.zeros((len(solution.x), len(t)))
    for k, m in enumerate(solution.modes):
        if not m.is_zero:
            samples += np.outer(basis[:, k], mode_profile(m, y, cfg))
    if not np.any(samples):
        return 0.0

    image = l_image(solution, y)
    derivative = np.empty_like(samples)
    if upper:
        for i in range(len(solution.x)):
            derivative[i] = caputo_apply_alpha(samples[i], cfg.alpha, t[1], cfg.classical_switch)
    else:
        v0 = basis @ np.array([m.c2 for m in solution.modes])
        v1 = basis @ np.array([m.c3 for m in solution.modes])
        for i in range(len(solution.x)):
            derivative[i] = caputo_apply_beta(samples[i], cfg.beta, t[1], v0[i], v1[i],
                                              cfg.classical_switch)
    window = t >= 0.5 * horizon
    return float(np.max(np.abs(derivative[:, window] + image[:, window])))


def residual_field_check(solution: FieldSolution, cfg: Optional[ProblemConfig] = None,
                         dt: Optional[float] = None, halvings: int = 2) -> ResidualReport:
    """Residual of the equation on both sides under dt, dt/2, ..., dt/2^halvings.

    The discrete Caputo derivative of the field plus its spectral image
    l(u) is evaluated on x-lines over the window [T/2, T] (T = b above the
    interface, a below it in t = -y). Expected decay orders are
    min(1 + alpha, 2 - alpha) above and 1 below.
    """
    cfg = cfg or solution.config
    if dt is None:
        dt = float(solution.y[-1] - solution.y[-2])
    dts = [dt / 2 ** i for i in range(halvings + 1)]
    upper = [_side_residual(solution, h, upper=True) for h in dts]
    lower = [_side_residual(solution, h, upper=False) for h in dts]
    report = ResidualReport(
        dts=dts,
        upper_residuals=upper,
        lower_residuals=lower,
        expected_upper_order=min(1.0 + cfg.alpha, 2.0 - cfg.alpha),
        expected_lower_order=1.0,
    )
    logger.info(f"Residual check: upper {upper}, lower {lower}")
    return report
