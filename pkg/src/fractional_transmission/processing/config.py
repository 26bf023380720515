"""Problem D instances: the validated ProblemConfig and its JSON schema."""
import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from scipy.special import rgamma

from ..exceptions import ConfigError
from ..spectral.basis import EigenPair, analytic_eigens, numeric_eigens_s1
from ..spectral.source import PhiSource, PolynomialSource, SampledSource, SineSeries

logger = logging.getLogger(__name__)

JUMP_CONDITION = "u(x, b) - u(x, -a) = phi(x)"


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds of a solve."""
    ml_tol: float = 1e-12
    degenerate_threshold: float = 1e-8
    orthogonality_tol: float = 1e-10
    jump_tol: float = 1e-9


@dataclass(frozen=True)
class ProblemConfig:
    """A complete Problem D instance.

    p0 is a constant (analytic sine basis, any s) or an array of samples at
    the interior points of a uniform grid of [0, pi] (numeric basis, s = 1).
    """
    s: int
    alpha: float
    beta: float
    a: float
    b: float
    phi: PhiSource
    K: int
    p0: Union[float, np.ndarray] = 0.0
    nx: int = 64
    ny: int = 64
    tolerances: Tolerances = field(default_factory=Tolerances)
    classical_switch: bool = False

    def __post_init__(self):
        alpha_ok = 0.0 < self.alpha < 1.0 or (self.classical_switch and self.alpha == 1.0)
        beta_ok = 1.0 < self.beta < 2.0 or (self.classical_switch and self.beta == 2.0)
        if not alpha_ok:
            raise ConfigError(f"alpha={self.alpha} must lie strictly inside (0, 1)")
        if not beta_ok:
            raise ConfigError(f"beta={self.beta} must lie strictly inside (1, 2)")
        if not (self.a > 0 and self.b > 0):
            raise ConfigError(f"a and b must be positive, got a={self.a}, b={self.b}")
        if self.s < 1 or self.K < 1:
            raise ConfigError(f"need s >= 1 and K >= 1, got s={self.s}, K={self.K}")
        if self.nx < 1 or self.ny < 2:
            raise ConfigError(f"grid needs nx >= 1 and ny >= 2, got ({self.nx}, {self.ny})")
        if self.is_numeric:
            samples = np.asarray(self.p0, dtype=float)
            if self.s != 1:
                raise ConfigError("sampled p0 is supported for s = 1 only")
            if samples.ndim != 1 or len(samples) < 8 * self.K:
                raise ConfigError(f"sampled p0 needs at least 8K = {8 * self.K} interior samples")
            object.__setattr__(self, "p0", samples)
        elif 1.0 + float(self.p0) <= 0.0:
            raise ConfigError(f"lambda_1 = 1 + p0 = {1.0 + float(self.p0)} must be positive")

    @property
    def is_numeric(self) -> bool:
        return not np.isscalar(self.p0)

    @property
    def p0_ends(self) -> Tuple[float, float]:
        """p0 at x = 0 and x = pi (end samples for the numeric path)."""
        if self.is_numeric:
            samples = np.asarray(self.p0)
            return float(samples[0]), float(samples[-1])
        return float(self.p0), float(self.p0)

    @cached_property
    def eigens(self) -> List[EigenPair]:
        """The K eigenpairs of the spatial problem for this configuration."""
        if self.is_numeric:
            return numeric_eigens_s1(self.p0, self.K)
        return analytic_eigens(self.s, float(self.p0), self.K)

    @property
    def limit_delta(self) -> float:
        """lim Delta(k) = -1 / (a^(beta-1) Gamma(2-beta)); zero when beta = 2."""
        return -float(rgamma(2.0 - self.beta)) / self.a ** (self.beta - 1.0)

    def y_grid(self) -> np.ndarray:
        """Union of uniform grids on [-a, 0] and [0, b] with ny intervals in total."""
        n_minus = int(round(self.ny * self.a / (self.a + self.b)))
        n_minus = min(max(n_minus, 1), self.ny - 1)
        n_plus = self.ny - n_minus
        lower = np.linspace(-self.a, 0.0, n_minus + 1)
        upper = np.linspace(0.0, self.b, n_plus + 1)
        return np.concatenate((lower, upper[1:]))

    def x_grid(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.nx + 1)

    def to_dict(self) -> Dict:
        p0 = {"samples": np.asarray(self.p0).tolist()} if self.is_numeric else float(self.p0)
        return {
            "s": self.s,
            "alpha": self.alpha,
            "beta": self.beta,
            "a": self.a,
            "b": self.b,
            "p0": p0,
            "phi": _phi_to_dict(self.phi),
            "K": self.K,
            "grid": {"nx": self.nx, "ny": self.ny},
            "tolerances": self.tolerances.__dict__.copy(),
            "classical_switch": self.classical_switch,
        }


def _phi_to_dict(phi: PhiSource) -> Dict:
    if isinstance(phi, SineSeries):
        return {"sine_coeffs": list(phi.coeffs)}
    if isinstance(phi, PolynomialSource):
        return {"poly_coeffs": list(phi.coeffs)}
    if isinstance(phi, SampledSource):
        return {"samples": phi.values.tolist()}
    return {"callable": repr(phi)}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SamplesModel(_Strict):
    samples: List[float]


class PhiModel(_Strict):
    sine_coeffs: Optional[List[float]] = None
    samples: Optional[List[float]] = None
    poly_coeffs: Optional[List[float]] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "PhiModel":
        given = [name for name in ("sine_coeffs", "samples", "poly_coeffs")
                 if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"phi needs exactly one of sine_coeffs/samples/poly_coeffs, got {given}")
        return self

    def to_source(self) -> PhiSource:
        if self.sine_coeffs is not None:
            return SineSeries(tuple(self.sine_coeffs))
        if self.poly_coeffs is not None:
            return PolynomialSource(tuple(self.poly_coeffs))
        return SampledSource(self.samples or [])


class GridModel(_Strict):
    nx: int = Field(64, ge=1)
    ny: int = Field(64, ge=2)


class TolerancesModel(_Strict):
    ml_tol: float = Field(1e-12, gt=0)
    degenerate_threshold: float = Field(1e-8, gt=0)
    orthogonality_tol: float = Field(1e-10, gt=0)
    jump_tol: float = Field(1e-9, gt=0)


class ConfigFile(_Strict):
    """Schema of a JSON problem file; unknown keys are rejected."""
    s: int = Field(ge=1)
    alpha: float
    beta: float
    a: float
    b: float
    p0: Union[float, SamplesModel] = 0.0
    phi: PhiModel
    K: int = Field(ge=1)
    grid: GridModel = GridModel()
    tolerances: TolerancesModel = TolerancesModel()
    classical_switch: bool = False

    def to_problem(self) -> ProblemConfig:
        p0: Union[float, np.ndarray]
        p0 = np.asarray(self.p0.samples, dtype=float) if isinstance(self.p0, SamplesModel) else self.p0
        return ProblemConfig(
            s=self.s,
            alpha=self.alpha,
            beta=self.beta,
            a=self.a,
            b=self.b,
            phi=self.phi.to_source(),
            K=self.K,
            p0=p0,
            nx=self.grid.nx,
            ny=self.grid.ny,
            tolerances=Tolerances(**self.tolerances.model_dump()),
            classical_switch=self.classical_switch,
        )


def parse_config(document: Dict) -> ProblemConfig:
    """Validate a decoded JSON document and build the ProblemConfig.

    Raises:
        ConfigError: schema or invariant violation
    """
    try:
        return ConfigFile.model_validate(document).to_problem()
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path: Union[str, Path]) -> ProblemConfig:
    """Read and validate a JSON problem file."""
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    logger.info(f"Loaded configuration from {path}")
    return parse_config(document)

