"""Ordered verification report behind the `verify` command."""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..exceptions import DegenerateData, FractionalTransmissionError
from ..processing.config import JUMP_CONDITION, ProblemConfig
from ..processing.mode_solver import (
    FieldSolution,
    classical_mode_reference,
    eval_mode,
    mode_jump_residual,
    solve,
    transmission_check,
    verify_mode_linear_system,
)
from ..special.mittag_leffler import ml_identity_suite
from ..spectral.basis import (
    asymptotic_fit,
    bessel_bound_check,
    bessel_inequality_check,
    orthonormality_defect,
    rayleigh_quotients,
)
from .caputo_oracle import (
    halving_study,
    optimal_grading,
    residual_field_check,
    step_mode_alpha,
    step_mode_beta,
)

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-10
ERFC_TOL = 1e-9
LINEAR_SYSTEM_TOL = 1e-8
CLASSICAL_TOL = 1e-8
FIELD_FILE_TOL = 1e-12
ORDER_SPREAD = 0.25


class VerifyLevel(Enum):
    """How much of the oracle matrix to run."""
    FAST = "fast"
    FULL = "full"


@dataclass
class CheckItem:
    """One named check with its verdict and measured numbers."""
    name: str
    passed: bool
    measurements: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {"name": self.name, "passed": self.passed, "measurements": self.measurements}


@dataclass
class VerificationReport:
    level: VerifyLevel
    items: List[CheckItem] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    @property
    def failures(self) -> List[str]:
        return [item.name for item in self.items if not item.passed]

    def to_dict(self) -> Dict:
        return {
            "level": self.level.value,
            "jump_condition": JUMP_CONDITION,
            "passed": self.passed,
            "items": [item.to_dict() for item in self.items],
        }


def check_ml_identities(level: VerifyLevel) -> CheckItem:
    points = 1000 if level is VerifyLevel.FULL else 200
    try:
        deviations = ml_identity_suite(tol=1e-12, points=points)
    except FractionalTransmissionError as exc:
        return CheckItem("ml_identities", False, {"error": f"{type(exc).__name__}: {exc}"})
    limits = {"exp": IDENTITY_TOL, "cos": IDENTITY_TOL, "sinc": IDENTITY_TOL,
              "erfc": ERFC_TOL, "recurrence": ERFC_TOL}
    passed = all(deviations[name] <= limit for name, limit in limits.items())
    return CheckItem("ml_identities", passed, {"deviations": deviations, "limits": limits})


def check_eigens(cfg: ProblemConfig, source_norms: Optional[np.ndarray] = None) -> CheckItem:
    eigs = cfg.eigens
    defect = orthonormality_defect(eigs)
    measurements: Dict = {"orthonormality_defect": defect,
                          "lambda_1": eigs[0].lambda_k, "lambda_K": eigs[-1].lambda_k}
    passed = defect <= max(cfg.tolerances.orthogonality_tol, 1e-9)
    passed = passed and all(b > a for a, b in zip(
        [pair.lambda_k for pair in eigs], [pair.lambda_k for pair in eigs[1:]]))

    if len(eigs) >= 6:
        fit = asymptotic_fit(eigs, cfg.s)
        measurements["asymptotic_fit"] = {"c0": fit.c0, "c2": fit.c2, "residual": fit.residual}
    if len(eigs) >= 2:
        bessel = bessel_bound_check(eigs, 0.5 * math.pi)
        measurements["bessel_partial_sum"] = float(bessel.partial_sums[-1])
        passed = passed and bessel.nondecreasing
    if cfg.is_numeric:
        quotients = rayleigh_quotients(eigs, cfg.p0)
        lambdas = np.array([pair.lambda_k for pair in eigs])
        gap = float(np.max(np.abs(quotients - lambdas) / lambdas))
        measurements["rayleigh_relative_gap"] = gap
        passed = passed and gap <= 1e-6
    if source_norms is not None:
        slack = float(np.min(source_norms))
        measurements["bessel_inequality_slack"] = slack
        passed = passed and slack >= -1e-9
    return CheckItem("eigen_checks", passed, measurements)


def check_modes(solution: FieldSolution) -> CheckItem:
    cfg = solution.config
    worst_system = 0.0
    worst_jump = 0.0
    for m in solution.modes:
        if m.is_zero:
            continue
        worst_system = max(worst_system, verify_mode_linear_system(m, cfg))
        scale = max(1.0, abs(m.c1), abs(m.c3))
        worst_jump = max(worst_jump, abs(mode_jump_residual(m, cfg)) / scale)
    passed = worst_system <= LINEAR_SYSTEM_TOL and worst_jump <= 10 * cfg.tolerances.ml_tol
    return CheckItem("mode_conditions", passed, {
        "linear_system_deviation": worst_system,
        "scaled_mode_jump_residual": worst_jump,
    })


def check_classical(solution: FieldSolution) -> CheckItem:
    cfg = solution.config
    worst = 0.0
    for m in solution.modes:
        if m.is_zero:
            continue
        for y in solution.y:
            worst = max(worst, abs(eval_mode(m, float(y), cfg) - classical_mode_reference(m, float(y))))
    return CheckItem("classical_limit", worst <= CLASSICAL_TOL, {"max_deviation": worst})


def check_oracle(cfg: ProblemConfig, level: VerifyLevel) -> CheckItem:
    """Halving studies of both mode equations at fixed horizon 1.

    The L1 runs use the graded mesh of optimal_grading and must show order
    2 - alpha within ORDER_SPREAD; the beta runs must show first order.
    """
    exponents = range(8, 13) if level is VerifyLevel.FULL else range(7, 11)
    steps = [2.0 ** -e for e in exponents]
    lam = cfg.eigens[0].lambda_k
    switch = cfg.classical_switch
    measurements: Dict = {"steps": steps}
    passed = True

    cases = [(lam, cfg.alpha)]
    if level is VerifyLevel.FULL and not switch:
        cases = [(lv, av) for av in (0.25, 0.5, 0.75) for lv in (1.0, 10.0, 100.0)]
    alpha_orders = []
    for lv, av in cases:
        try:
            _, order = halving_study(
                lambda dt: step_mode_alpha(lv, av, dt, 1.0, switch, optimal_grading(av)), steps)
        except DegenerateData:
            order = math.nan
        ok = abs(order - (2.0 - av)) <= ORDER_SPREAD
        alpha_orders.append({"alpha": av, "lambda": lv, "order": order, "expected": 2.0 - av,
                             "grading": optimal_grading(av), "passed": ok})
        passed = passed and ok
    measurements["alpha_orders"] = alpha_orders

    try:
        _, beta_order = halving_study(
            lambda dt: step_mode_beta(lam, cfg.beta, 1.0, lam, dt, 1.0, switch), steps)
    except DegenerateData:
        beta_order = math.nan
    beta_ok = abs(beta_order - 1.0) <= ORDER_SPREAD
    measurements["beta_order"] = beta_order
    return CheckItem("oracle_orders", passed and beta_ok, measurements)


def check_field_file(solution: FieldSolution, frame: pd.DataFrame) -> CheckItem:
    """Compare a CSV written by `solve` against a fresh assembly."""
    expected = solution.to_frame()
    if list(frame.columns) != ["x", "y", "u"] or len(frame) != len(expected):
        return CheckItem("field_file", False, {"reason": "shape or header mismatch"})
    grid_gap = float(np.max(np.abs(frame[["x", "y"]].to_numpy() - expected[["x", "y"]].to_numpy())))
    value_gap = float(np.max(np.abs(frame["u"].to_numpy() - expected["u"].to_numpy())))

    values = frame["u"].to_numpy().reshape(len(solution.x), len(solution.y))
    jump = values[:, -1] - values[:, 0] - solution.config.phi(solution.x)
    return CheckItem("field_file", grid_gap <= FIELD_FILE_TOL and value_gap <= FIELD_FILE_TOL, {
        "grid_gap": grid_gap,
        "value_gap": value_gap,
        "jump_residual": float(np.max(np.abs(jump))),
    })


def check_transmission(solution: FieldSolution) -> CheckItem:
    report = transmission_check(solution)
    return CheckItem("transmission", report.passed, report.to_dict())


def check_pde_residual(solution: FieldSolution) -> CheckItem:
    report = residual_field_check(solution)
    return CheckItem("pde_residual", report.passed(), report.to_dict())


def _guarded(name: str, check: Callable[[], CheckItem]) -> CheckItem:
    """Run one check; a package error becomes a failed item."""
    try:
        return check()
    except FractionalTransmissionError as exc:
        logger.error(f"{name} raised {type(exc).__name__}: {exc}")
        return CheckItem(name, False, {"error": f"{type(exc).__name__}: {exc}"})


def run_verification(cfg: ProblemConfig, level: VerifyLevel = VerifyLevel.FAST,
                     field_frame: Optional[pd.DataFrame] = None) -> VerificationReport:
    """Run every check in order; failures are recorded, not raised."""
    report = VerificationReport(level=level)
    report.items.append(check_ml_identities(level))

    try:
        solution = solve(cfg)
    except FractionalTransmissionError as exc:
        report.items.append(CheckItem("solve", False, {"error": str(exc)}))
        return report

    slack = bessel_inequality_check(solution.source) if solution.source is not None else None
    checks: List[Tuple[str, Callable[[], CheckItem]]] = [
        ("eigen_checks", lambda: check_eigens(cfg, slack)),
        ("transmission", lambda: check_transmission(solution)),
        ("mode_conditions", lambda: check_modes(solution)),
        ("pde_residual", lambda: check_pde_residual(solution)),
        ("oracle_orders", lambda: check_oracle(cfg, level)),
    ]
    if cfg.classical_switch and cfg.alpha == 1.0 and cfg.beta == 2.0:
        checks.append(("classical_limit", lambda: check_classical(solution)))
    if field_frame is not None:
        frame = field_frame
        checks.append(("field_file", lambda: check_field_file(solution, frame)))
    report.items.extend(_guarded(name, check) for name, check in checks)

    for item in report.items:
        log = logger.info if item.passed else logger.warning
        log(f"{item.name}: {'pass' if item.passed else 'FAIL'}")
    return report
