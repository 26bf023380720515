"""Tests for the eigenbasis and the jump-datum coefficients."""
import math

import numpy as np
import pytest

from fractional_transmission.exceptions import (
    DomainError,
    InsufficientData,
    PositivityViolation,
    QuadratureWarning,
)
from fractional_transmission.spectral.basis import (
    SQRT_2_OVER_PI,
    AnalyticSine,
    analytic_eigens,
    asymptotic_fit,
    bessel_bound_check,
    bessel_inequality_check,
    fourier_coeffs,
    numeric_eigens_s1,
    orthonormality_defect,
    rayleigh_quotients,
    richardson_eigenvalues,
    sample_p0,
    validate_phi,
)
from fractional_transmission.spectral.source import (
    CallableSource,
    PolynomialSource,
    SampledSource,
    SineSeries,
    simpson_with_estimate,
)


def fd_eigenvalue(k, n):
    """Closed-form eigenvalue of the second-difference matrix with n interior points."""
    h = math.pi / (n + 1)
    return 4.0 / h ** 2 * math.sin(0.5 * k * h) ** 2


def test_analytic_eigenvalues():
    eigs = analytic_eigens(1, 0.0, 5)
    assert [pair.lambda_k for pair in eigs] == [1.0, 4.0, 9.0, 16.0, 25.0]
    assert all(pair.is_analytic for pair in eigs)

    quartic = analytic_eigens(2, 1.0, 3)
    assert [pair.lambda_k for pair in quartic] == [2.0, 17.0, 82.0]


def test_analytic_eigenfunction_values():
    pair = analytic_eigens(1, 0.0, 3)[2]
    assert isinstance(pair.eigenfunction, AnalyticSine)
    assert pair(math.pi / 6) == pytest.approx(SQRT_2_OVER_PI)
    assert pair.eigenfunction.sup_norm == SQRT_2_OVER_PI


def test_analytic_eigens_rejects_bad_input():
    with pytest.raises(PositivityViolation):
        analytic_eigens(1, -1.0, 4)
    with pytest.raises(DomainError):
        analytic_eigens(0, 0.0, 4)
    with pytest.raises(DomainError):
        analytic_eigens(1, 0.0, 0)


@pytest.mark.slow
def test_numeric_eigenvalues_on_fine_grid():
    eigs = numeric_eigens_s1(np.zeros(2000), 10)
    for pair in eigs:
        assert abs(pair.lambda_k / pair.k ** 2 - 1.0) <= 1e-4
    shifted = numeric_eigens_s1(np.ones(2000), 10)
    for plain, shift in zip(eigs, shifted):
        assert abs(shift.lambda_k - plain.lambda_k - 1.0) <= 1e-8


def test_numeric_eigenvalues_match_difference_formula():
    n = 127
    eigs = numeric_eigens_s1(np.zeros(n), 8)
    for pair in eigs:
        assert pair.lambda_k == pytest.approx(fd_eigenvalue(pair.k, n), abs=1e-9)
        assert not pair.is_analytic
    # Second-order accurate against the continuous eigenvalues k^2
    assert eigs[0].lambda_k == pytest.approx(1.0, rel=1e-3)


def test_numeric_eigenfunctions_are_sampled_sines():
    n = 127
    eigs = numeric_eigens_s1(np.zeros(n), 4)
    x = eigs[0].eigenfunction.x
    assert len(x) == n + 2
    assert x[0] == 0.0 and x[-1] == pytest.approx(math.pi)
    for pair in eigs:
        expected = SQRT_2_OVER_PI * np.sin(pair.k * x)
        assert np.max(np.abs(pair.eigenfunction.values - expected)) <= 1e-8


def test_numeric_eigens_needs_fine_grid():
    with pytest.raises(DomainError):
        numeric_eigens_s1(np.zeros(10), 2)


def test_numeric_eigens_positivity():
    with pytest.raises(PositivityViolation):
        numeric_eigens_s1(np.full(64, -2.0), 4)


def test_sampled_eigenfunction_interpolates_between_nodes():
    pair = numeric_eigens_s1(np.zeros(64), 4)[0]
    x = np.linspace(0.0, math.pi, 1001)
    assert np.max(np.abs(pair(x) - SQRT_2_OVER_PI * np.sin(x))) <= 1e-6
    assert pair(pair.eigenfunction.x) == pytest.approx(pair.eigenfunction.values, abs=1e-15)


def test_fourier_coeffs_numeric_basis_on_fine_grid():
    eigs = numeric_eigens_s1(np.zeros(64), 4)
    source = fourier_coeffs(SineSeries((1.0,)), eigs)
    assert source.coefficient(1) == pytest.approx(math.sqrt(math.pi / 2.0), abs=1e-6)
    for k in (2, 3, 4):
        assert abs(source.coefficient(k)) <= 1e-5
    assert source.quadrature_error <= 1e-8


def test_orthonormality_defect():
    assert orthonormality_defect(analytic_eigens(1, 0.0, 8)) <= 1e-12
    p0 = sample_p0(lambda x: np.cos(x), 127)
    assert orthonormality_defect(numeric_eigens_s1(p0, 8)) <= 1e-9


def test_rayleigh_quotients_reproduce_eigenvalues():
    p0 = sample_p0(lambda x: 1.0 + 0.5 * np.sin(x), 127)
    eigs = numeric_eigens_s1(p0, 6)
    lambdas = np.array([pair.lambda_k for pair in eigs])
    assert rayleigh_quotients(eigs, p0) == pytest.approx(lambdas, rel=1e-9)


def test_rayleigh_quotients_need_sampled_basis():
    with pytest.raises(DomainError):
        rayleigh_quotients(analytic_eigens(1, 0.0, 2), np.zeros(16))


def test_sample_p0_broadcasts_constants():
    samples = sample_p0(lambda x: 2.5, 16)
    assert samples.shape == (16,)
    assert np.all(samples == 2.5)


def test_richardson_extrapolation():
    lambdas = richardson_eigenvalues(lambda x: 0.0 * x, 64, 4)
    assert lambdas == pytest.approx([1.0, 4.0, 9.0, 16.0], abs=1e-4)


def test_asymptotic_fit_recovers_constant_shift():
    fit = asymptotic_fit(analytic_eigens(1, 0.5, 10), 1)
    assert fit.c0 == pytest.approx(0.5, abs=1e-10)
    assert fit.c2 == pytest.approx(0.0, abs=1e-8)
    assert fit.residual <= 1e-10
    assert fit.indices == [6, 7, 8, 9, 10]


def test_asymptotic_fit_needs_six_pairs():
    with pytest.raises(InsufficientData):
        asymptotic_fit(analytic_eigens(1, 0.0, 5), 1)


def test_fourier_coeffs_sine_series_exact():
    source = fourier_coeffs(SineSeries((1.0, 0.0, 0.5)), analytic_eigens(1, 0.0, 6))
    scale = math.sqrt(math.pi / 2.0)
    assert source.quadrature_error == 0.0
    assert source.coefficient(1) == pytest.approx(scale)
    assert source.coefficient(3) == pytest.approx(0.5 * scale)
    for k in (2, 4, 5, 6):
        assert source.coefficient(k) == 0.0


def test_fourier_coeffs_parabola_by_quadrature():
    eigs = analytic_eigens(1, 0.0, 9)
    source = fourier_coeffs(PolynomialSource((0.0, math.pi, -1.0)), eigs)
    for pair in eigs:
        expected = SQRT_2_OVER_PI * 4.0 / pair.k ** 3 if pair.k % 2 else 0.0
        assert source.coefficient(pair.k) == pytest.approx(expected, abs=1e-9)
    assert source.quadrature_error <= 1e-8


def test_fourier_coeffs_warns_on_rough_data():
    step = CallableSource(lambda x: (x > 1.0).astype(float))
    with pytest.warns(QuadratureWarning):
        source = fourier_coeffs(step, analytic_eigens(1, 0.0, 4))
    assert source.quadrature_error > 1e-8


def test_bessel_inequality_slack():
    source = fourier_coeffs(SineSeries((1.0, 0.0, 0.5)), analytic_eigens(1, 0.0, 4))
    slack = bessel_inequality_check(source)
    assert slack[0] == pytest.approx(0.5 * math.pi * 0.25)
    assert slack[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(slack) <= 1e-15)


def test_validate_phi_accepts_sine_data():
    report = validate_phi(SineSeries((1.0, 0.5)), s=2)
    assert report.passed
    assert report.violations == []
    assert not report.estimated
    assert "lphi^(2)(pi)" in report.values


def test_validate_phi_flags_parabola():
    report = validate_phi(PolynomialSource((0.0, math.pi, -1.0)), s=1)
    assert not report.passed
    assert report.values["phi^(0)(0)"] == 0.0
    assert report.values["lphi^(0)(0)"] == pytest.approx(2.0)
    assert len(report.violations) == 2
    assert all(v.startswith("lphi^(0)") for v in report.violations)


def test_validate_phi_estimated_for_samples():
    x = np.linspace(0.0, math.pi, 257)
    report = validate_phi(SampledSource(np.sin(x)), s=1)
    assert report.estimated


def test_callable_source_derivatives():
    phi = CallableSource(np.sin)
    ends = np.array([0.0, math.pi])
    assert phi.derivative(2, ends) == pytest.approx([0.0, 0.0], abs=1e-8)
    assert phi.derivative(1, ends) == pytest.approx([1.0, -1.0], abs=1e-8)


def test_sampled_source_needs_samples():
    with pytest.raises(DomainError):
        SampledSource([0.0, 1.0])


def test_source_squared_norms():
    assert PolynomialSource((1.0,)).squared_norm() == pytest.approx(math.pi)
    assert SineSeries((1.0, 1.0)).squared_norm() == pytest.approx(math.pi)
    assert CallableSource(np.sin).squared_norm() == pytest.approx(0.5 * math.pi, rel=1e-10)


def test_sine_series_derivative():
    phi = SineSeries((1.0, 0.0, 2.0))
    x = np.array([0.3, 1.1])
    expected = -np.sin(x) - 18.0 * np.sin(3 * x)
    assert phi.derivative(2, x) == pytest.approx(expected)
    assert phi.coefficient(3) == 2.0
    assert phi.coefficient(7) == 0.0


def test_bessel_bound_check():
    report = bessel_bound_check(analytic_eigens(1, 0.0, 20), 0.5 * math.pi)
    assert report.nondecreasing
    assert report.converged
    assert report.partial_sums[0] == pytest.approx(2.0 / math.pi)
    with pytest.raises(InsufficientData):
        bessel_bound_check(analytic_eigens(1, 0.0, 1), 0.5 * math.pi)


def test_simpson_with_estimate():
    x = np.linspace(0.0, math.pi, 101)
    integral, error = simpson_with_estimate(np.sin(x), x)
    assert integral == pytest.approx(2.0, abs=1e-7)
    assert 0.0 < error <= 1e-6
