"""Two-parameter Mittag-Leffler function E_{mu,eta}(z) on the real axis.

E_{mu,eta}(z) = sum_{n>=0} z**n / Gamma(mu*n + eta)

Three evaluation methods are combined:

* the Taylor series in double precision with compensated summation,
  used for |z| <= 10 when cancellation stays within the tolerance;
* the asymptotic expansion on the negative axis (algebraic terms plus, for
  1 < mu < 2, the exponentially small oscillatory pair), truncated optimally;
* the Taylor series in extended precision (mpmath) for everything else.

Every result carries an absolute error bound for the method used.
"""
import cmath
import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.optimize import bisect
from scipy.special import rgamma

from ..exceptions import AsymptoticRegimeError, DomainError, NonConvergence

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
SERIES_RADIUS = 10.0
ZERO_XTOL = 1e-12
ZERO_VALUE_TOL = 1e-8
MAX_EXTENDED_TERMS = 20000
MAX_ASYMPTOTIC_TERMS = 150
# Terms beyond n_terms scanned for the first two nonzero omitted ones.
_OMITTED_WINDOW = 8

_EPS = float(np.finfo(float).eps)
# Relative error allowance per series term (pow + reciprocal gamma).
_TERM_ULPS = 16.0

# mpmath keeps its working precision in a global context.
_MP_LOCK = threading.Lock()


class MLMethod(Enum):
    """Evaluation method that produced an MLResult."""
    SERIES = "series"
    ASYMPTOTIC = "asymptotic"
    EXTENDED_PRECISION = "extended_precision"


@dataclass(frozen=True)
class MLQuery:
    """One evaluation of E_{mu,eta}(z)."""
    mu: float
    eta: float
    z: float

    def __post_init__(self):
        _check_mu(self.mu, upper_inclusive=True)


@dataclass(frozen=True)
class MLResult:
    """Value of E_{mu,eta}(z) together with an absolute error bound."""
    value: float
    abs_error_bound: float
    method: MLMethod


@dataclass
class ZeroScan:
    """Positive zeros t of t -> E_{mu,eta}(-t) on (0, t_max]."""
    mu: float
    eta: float
    t_max: float
    zeros: List[float] = field(default_factory=list)
    step: float = 0.0

    @property
    def max_zero(self) -> Optional[float]:
        """Largest zero (the constant h of the uniqueness lemma), or None."""
        return self.zeros[-1] if self.zeros else None

    def to_dict(self) -> Dict:
        return {
            "mu": self.mu,
            "eta": self.eta,
            "t_max": self.t_max,
            "step": self.step,
            "zeros": list(self.zeros),
            "max_zero": self.max_zero,
        }


@dataclass
class DecayEnvelope:
    """Empirical constant M of the bound |E_{mu,eta}(-z)| <= M / (1 + z)."""
    mu: float
    eta: float
    z_grid: np.ndarray
    running_sup: np.ndarray

    @property
    def M(self) -> float:
        return float(self.running_sup[-1])

    @property
    def last_decade_growth(self) -> float:
        """Relative growth of the running supremum over the last decade of z."""
        z_last = self.z_grid[-1]
        idx = int(np.searchsorted(self.z_grid, z_last / 10.0))
        previous = float(self.running_sup[max(idx - 1, 0)])
        return (self.M - previous) / self.M if self.M > 0 else 0.0


def _check_mu(mu: float, upper_inclusive: bool) -> None:
    if not np.isfinite(mu) or mu <= 0 or mu > 2 or (mu == 2 and not upper_inclusive):
        bound = "(0, 2]" if upper_inclusive else "(0, 2)"
        raise DomainError(f"mu={mu} outside the supported range {bound}")


def _log_abs_rgamma(x: float) -> Optional[float]:
    """log|1/Gamma(x)|, or None at the poles of Gamma."""
    if x <= 0 and float(x).is_integer():
        return None
    return -math.lgamma(x)


def _tail_ratio(mu: float, eta: float, absz: float, n: int) -> float:
    """Upper bound on |t_{m+1}/t_m| for every m >= n (log-convexity of Gamma)."""
    x = mu * n + eta
    if x <= 0:
        return math.inf
    return absz * math.exp(math.lgamma(x) - math.lgamma(x + mu))


def _series_double(mu: float, eta: float, z: float, tol: float) -> Optional[MLResult]:
    absz = abs(z)
    log_absz = math.log(absz)
    terms: List[float] = []
    n = 0
    while True:
        if n * log_absz > 700.0:
            return None
        terms.append(float(rgamma(mu * n + eta)) * z ** n)
        n += 1
        ratio = _tail_ratio(mu, eta, absz, n)
        if ratio < 1.0:
            next_abs = absz ** n * abs(float(rgamma(mu * n + eta)))
            remainder = next_abs / (1.0 - ratio)
            if remainder <= 0.05 * tol or next_abs == 0.0:
                break

    value = math.fsum(terms)
    rounding = _TERM_ULPS * _EPS * math.fsum(abs(t) for t in terms) + _EPS * abs(value)
    return MLResult(value, remainder + rounding, MLMethod.SERIES)


def _algebraic_terms(mu: float, eta: float, x: float, count: int) -> List[float]:
    """Terms -(-x)**(-j) / Gamma(eta - mu*j), j = 1..count."""
    terms = []
    for j in range(1, count + 1):
        arg = eta - mu * j
        if arg < -170.0:
            break
        terms.append(-((-1.0) ** j) * x ** (-j) * float(rgamma(arg)))
    return terms


def _exponential_part(mu: float, eta: float, x: float) -> Tuple[float, float]:
    """Conjugate-pole contribution on the negative axis.

    Returns (value, extra_bound). For 1 < mu <= 2 the value is
    (2/mu) Re[Z**(1-eta) exp(Z)], Z = x**(1/mu) exp(i pi/mu). For mu = 1 it is
    not added to the value; its magnitude goes into the error bound instead.
    For mu < 1 there is no such contribution.
    """
    if mu < 1.0:
        return 0.0, 0.0
    if mu == 1.0:
        return 0.0, x ** (1.0 - eta) * math.exp(-x)
    Z = x ** (1.0 / mu) * cmath.exp(1j * math.pi / mu)
    return (2.0 / mu) * (Z ** (1.0 - eta) * cmath.exp(Z)).real, 0.0


def _asymptotic_optimal(mu: float, eta: float, x: float, tol: float) -> MLResult:
    terms = _algebraic_terms(mu, eta, x, MAX_ASYMPTOTIC_TERMS)
    kept = 0
    smallest = math.inf
    bound = math.inf
    for j in range(len(terms)):
        if terms[j] != 0.0 and abs(terms[j]) > smallest:
            break
        if terms[j] != 0.0:
            smallest = abs(terms[j])
        kept = j
        tail = terms[j + 1:j + 3]
        bound = max((abs(t) for t in tail), default=math.inf)
        if bound <= 0.25 * tol:
            break
    value = math.fsum(terms[:kept + 1])
    expo, expo_bound = _exponential_part(mu, eta, x)
    return MLResult(value + expo, bound + expo_bound, MLMethod.ASYMPTOTIC)


def ml_asymptotic(mu: float, eta: float, x: float, n_terms: int,
                  include_exponential: bool = True) -> MLResult:
    """Asymptotic expansion of E_{mu,eta}(-x) for large x > 0.

    Value is -sum_{j=1..n_terms} (-x)**(-j) / Gamma(eta - mu*j); for
    1 < mu < 2 the exponentially decaying oscillatory term is added unless
    include_exponential is False. The bound is the sum of the magnitudes of
    the first two nonzero omitted terms; terms on a pole of Gamma are exactly
    zero and are skipped. For mu = 1 the exponential e**-x is never added to
    the value but always enters the bound.

    Args:
        mu: Order, 0 < mu < 2
        eta: Second parameter
        x: Positive argument magnitude
        n_terms: Number of algebraic terms kept (>= 1)
        include_exponential: Add the oscillatory pair for mu > 1

    Returns:
        MLResult with method ASYMPTOTIC

    Raises:
        DomainError: mu outside (0, 2), x <= 0 or n_terms < 1
        AsymptoticRegimeError: x too small for n_terms
    """
    _check_mu(mu, upper_inclusive=False)
    if x <= 0:
        raise DomainError(f"asymptotic expansion needs x > 0, got {x}")
    if n_terms < 1:
        raise DomainError("n_terms must be at least 1")

    terms = _algebraic_terms(mu, eta, x, n_terms + _OMITTED_WINDOW)
    if len(terms) < n_terms:
        raise AsymptoticRegimeError(f"too many terms requested ({n_terms})")
    kept = terms[:n_terms]
    # 1/Gamma vanishes at non-positive integers, so skip exact zeros
    omitted = [abs(t) for t in terms[n_terms:] if t != 0.0][:2]
    last_kept = next((abs(t) for t in reversed(kept) if t != 0.0), 0.0)
    if omitted and omitted[0] >= last_kept:
        raise AsymptoticRegimeError(
            f"x={x} too small for {n_terms} terms: omitted term {omitted[0]:.3e} "
            f">= last kept term {last_kept:.3e}"
        )

    value = math.fsum(kept)
    bound = math.fsum(omitted)
    expo, expo_bound = _exponential_part(mu, eta, x)
    bound += expo_bound
    if include_exponential:
        value += expo
    return MLResult(value, bound, MLMethod.ASYMPTOTIC)


@lru_cache(maxsize=256)
def _rgamma_table(mu: float, eta: float, count: int, dps: int) -> Tuple:
    # caller holds _MP_LOCK with mpmath.mp.dps == dps
    m, e = mpmath.mpf(mu), mpmath.mpf(eta)
    return tuple(mpmath.rgamma(m * n + e) for n in range(count))


def _series_plan(mu: float, eta: float, absz: float, tol: float) -> Optional[Tuple[int, float, float]]:
    """Number of terms, log of the largest term and remainder bound."""
    log_absz = math.log(absz)
    log_target = math.log(0.01 * tol)
    log_max = -math.inf
    n = 0
    while n < MAX_EXTENDED_TERMS:
        log_c = _log_abs_rgamma(mu * n + eta)
        if log_c is not None:
            log_max = max(log_max, n * log_absz + log_c)
        n += 1
        ratio = _tail_ratio(mu, eta, absz, n)
        log_c_next = _log_abs_rgamma(mu * n + eta)
        if ratio < 0.5 and (log_c_next is None or n * log_absz + log_c_next < log_target):
            next_abs = 0.0 if log_c_next is None else math.exp(n * log_absz + log_c_next)
            return n, log_max, next_abs / (1.0 - ratio)
    return None


def _series_extended(mu: float, eta: float, z: float, tol: float) -> Optional[MLResult]:
    plan = _series_plan(mu, eta, abs(z), tol)
    if plan is None:
        return None
    count, log_max, remainder = plan
    digits = max(0.0, log_max / math.log(10.0)) - math.log10(tol) + math.log10(count) + 12
    dps = int(10 * math.ceil(digits / 10.0))
    count = int(64 * math.ceil(count / 64.0))

    with _MP_LOCK:
        with mpmath.workdps(dps):
            coeffs = _rgamma_table(mu, eta, count, dps)
            zz = mpmath.mpf(z)
            acc = mpmath.mpf(0)
            for c in reversed(coeffs):
                acc = acc * zz + c
            value = float(acc)

    rounding = count * math.exp(log_max) * 10.0 ** (2 - dps) + _EPS * abs(value)
    return MLResult(value, remainder + rounding, MLMethod.EXTENDED_PRECISION)


def ml_eval(q: MLQuery, tol: float = DEFAULT_TOL) -> MLResult:
    """Evaluate E_{mu,eta}(z) to absolute accuracy tol.

    Args:
        q: The (mu, eta, z) triple
        tol: Requested absolute accuracy (> 0)

    Returns:
        MLResult whose abs_error_bound is at most tol

    Raises:
        DomainError: mu outside (0, 2] or tol <= 0
        NonConvergence: no method attained tol
    """
    _check_mu(q.mu, upper_inclusive=True)
    if not tol > 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    mu, eta, z = float(q.mu), float(q.eta), float(q.z)

    if z == 0.0:
        return MLResult(float(rgamma(eta)), _EPS, MLMethod.SERIES)

    best = math.inf
    if abs(z) <= SERIES_RADIUS:
        result = _series_double(mu, eta, z, tol)
        if result is not None:
            if result.abs_error_bound <= tol:
                return result
            best = min(best, result.abs_error_bound)

    if z < 0 and mu < 2.0:
        result = _asymptotic_optimal(mu, eta, -z, tol)
        if result.abs_error_bound <= tol:
            return result
        best = min(best, result.abs_error_bound)

    result = _series_extended(mu, eta, z, tol)
    if result is not None:
        if result.abs_error_bound <= tol:
            return result
        best = min(best, result.abs_error_bound)

    raise NonConvergence(f"E_{{{mu},{eta}}}({z}) not resolved to {tol:.1e}", best)


def ml_value(mu: float, eta: float, z: float, tol: float = DEFAULT_TOL) -> float:
    """Shorthand for ml_eval(MLQuery(mu, eta, z), tol).value."""
    return ml_eval(MLQuery(mu, eta, z), tol).value


def ml_values(mu: float, eta: float, z: Sequence[float], tol: float = DEFAULT_TOL) -> np.ndarray:
    """Evaluate E_{mu,eta} elementwise over an array of arguments."""
    z_arr = np.asarray(z, dtype=float)
    out = np.empty_like(z_arr)
    for idx, zi in np.ndenumerate(z_arr):
        out[idx] = ml_value(mu, eta, float(zi), tol)
    return out


def no_real_zeros(mu: float, eta: float) -> bool:
    """Sufficient condition eta >= 3*mu/2 for E_{mu,eta} to have no real zeros.

    False means "not guaranteed", not "has zeros".

    Raises:
        DomainError: mu outside (1, 2)
    """
    if not 1.0 < mu < 2.0:
        raise DomainError(f"zero criterion needs 1 < mu < 2, got mu={mu}")
    return eta >= 1.5 * mu


def ml_real_zeros(mu: float, eta: float, t_max: float, step: Optional[float] = None,
                  tol: float = DEFAULT_TOL) -> ZeroScan:
    """Locate the sign-change zeros of t -> E_{mu,eta}(-t) on (0, t_max].

    The interval is scanned on a uniform grid (default step
    min(1e-2, t_max/1e4)) and every bracketed sign change is refined by
    bisection to 1e-12.

    Args:
        mu: Order, 1 < mu < 2
        eta: Second parameter
        t_max: Right end of the scanned interval (> 0)
        step: Scan step override
        tol: Evaluation tolerance

    Returns:
        ZeroScan with ascending zeros
    """
    if not 1.0 < mu < 2.0:
        raise DomainError(f"zero scan needs 1 < mu < 2, got mu={mu}")
    if t_max <= 0:
        raise DomainError(f"t_max must be positive, got {t_max}")
    step = step or min(1e-2, t_max / 1e4)
    count = int(math.ceil(t_max / step))
    ts = np.linspace(0.0, t_max, count + 1)

    def f(t: float) -> float:
        return ml_value(mu, eta, -t, tol)

    values = np.array([f(t) for t in ts])
    zeros: List[float] = []
    for i in range(len(ts) - 1):
        lo, hi = ts[i], ts[i + 1]
        v_lo, v_hi = values[i], values[i + 1]
        if v_lo == 0.0 and lo > 0.0:
            root = float(lo)
        elif v_lo * v_hi < 0.0:
            root = float(bisect(f, lo, hi, xtol=ZERO_XTOL))
        else:
            continue
        if abs(f(root)) > ZERO_VALUE_TOL:
            logger.warning(f"Discarding bracket [{lo}, {hi}]: |E| too large at {root}")
            continue
        zeros.append(root)

    logger.info(f"E_{{{mu},{eta}}}(-t): {len(zeros)} zeros on (0, {t_max}]")
    return ZeroScan(mu=mu, eta=eta, t_max=t_max, zeros=zeros, step=step)


def ml_decay_envelope(mu: float, eta: float, z_max: float = 1e6, points: int = 240,
                      tol: float = DEFAULT_TOL) -> DecayEnvelope:
    """Running supremum of (1 + z)|E_{mu,eta}(-z)| over a log grid in [0, z_max]."""
    z_grid = np.concatenate(([0.0], np.logspace(-3, math.log10(z_max), points)))
    weighted = np.array([(1.0 + z) * abs(ml_value(mu, eta, -z, tol)) for z in z_grid])
    return DecayEnvelope(mu=mu, eta=eta, z_grid=z_grid,
                         running_sup=np.maximum.accumulate(weighted))


def scaled_erfc(x: float) -> float:
    """exp(x**2) * erfc(x) for x >= 0, independent of scipy.

    Maclaurin series of erf for x < 2, Lentz continued fraction otherwise.
    """
    if x < 0:
        raise DomainError("scaled_erfc is implemented for x >= 0")
    if x < 2.0:
        total, term, n = 0.0, x, 0
        while abs(term) > 1e-17 * max(abs(total), 1e-300) or n < 2:
            total += term / (2 * n + 1)
            n += 1
            term *= -x * x / n
        return math.exp(x * x) * (1.0 - 2.0 / math.sqrt(math.pi) * total)

    # erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    tiny = 1e-300
    f = x
    C, D = x, 0.0
    for n in range(1, 500):
        a = n / 2.0
        D = x + a * D
        D = 1.0 / (D if D != 0.0 else tiny)
        C = x + a / C
        if C == 0.0:
            C = tiny
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return 1.0 / (math.sqrt(math.pi) * f)


def ml_identity_suite(tol: float = DEFAULT_TOL, points: int = 1000) -> Dict[str, float]:
    """Maximum deviations of E_{mu,eta} from its closed-form special cases.

    The recurrence is checked on z <= 0 only: for mu < 1 the function grows
    like exp(z^(1/mu)) on the positive axis and an absolute tol is below
    the rounding of the value there.

    Returns:
        Dictionary of maximum absolute errors keyed by identity name
    """
    z = np.linspace(-50.0, 5.0, points)
    t = np.linspace(20.0 / points, 20.0, points)
    report = {
        "exp": max(abs(ml_value(1.0, 1.0, zi, tol) - math.exp(zi)) for zi in z),
        "cos": max(abs(ml_value(2.0, 1.0, -ti * ti, tol) - math.cos(ti)) for ti in t),
        "sinc": max(abs(ml_value(2.0, 2.0, -ti * ti, tol) - math.sin(ti) / ti) for ti in t),
        "erfc": max(abs(ml_value(0.5, 1.0, -x, tol) - scaled_erfc(x))
                    for x in (0.1, 1.0, 5.0, 10.0)),
    }

    recurrence = 0.0
    for mu, eta in ((0.5, 1.0), (1.5, 1.0), (1.5, 2.0), (0.75, 1.0)):
        for zi in np.linspace(-30.0, 0.0, 23):
            lhs = ml_value(mu, eta, zi, tol)
            rhs = zi * ml_value(mu, mu + eta, zi, tol / max(1.0, abs(zi))) + float(rgamma(eta))
            recurrence = max(recurrence, abs(lhs - rhs))
    report["recurrence"] = recurrence
    return {name: float(value) for name, value in report.items()}



class MittagLeffler:
    """Class for evaluating E_{mu,eta} on the real axis at one tolerance."""

    def __init__(self, tol: float = DEFAULT_TOL):
        """Initialize the evaluator.

        Args:
            tol: Absolute accuracy requested from every evaluation

        Raises:
            DomainError: tol is not positive
        """
        if not tol > 0:
            raise DomainError(f"tolerance must be positive, got {tol}")
        self.tol = tol

    def evaluate(self, mu: float, eta: float, z: float) -> MLResult:
        return ml_eval(MLQuery(mu, eta, z), self.tol)

    def __call__(self, mu: float, eta: float, z: float) -> float:
        return self.evaluate(mu, eta, z).value

    def values(self, mu: float, eta: float, z: Sequence[float]) -> np.ndarray:
        return ml_values(mu, eta, z, self.tol)

    def real_zeros(self, mu: float, eta: float, t_max: float,
                   step: Optional[float] = None) -> ZeroScan:
        """Zeros of E_{mu,eta}(-t) on (0, t_max]; see ml_real_zeros."""
        return ml_real_zeros(mu, eta, t_max, step=step, tol=self.tol)

    def decay_envelope(self, mu: float, eta: float, z_max: float = 1e6,
                       points: int = 240) -> DecayEnvelope:
        return ml_decay_envelope(mu, eta, z_max=z_max, points=points, tol=self.tol)
