"""Tests for the Mittag-Leffler evaluator."""
import math

import pytest
from scipy.special import erfcx, gamma, rgamma

from fractional_transmission.exceptions import AsymptoticRegimeError, DomainError, NonConvergence
from fractional_transmission.special.mittag_leffler import (
    MLMethod,
    MLQuery,
    MittagLeffler,
    ml_asymptotic,
    ml_decay_envelope,
    ml_eval,
    ml_identity_suite,
    ml_real_zeros,
    ml_value,
    ml_values,
    no_real_zeros,
    scaled_erfc,
)


def test_exponential_special_case():
    result = ml_eval(MLQuery(1.0, 1.0, -1.0))
    assert result.value == pytest.approx(0.3678794412, abs=1e-10)
    assert result.abs_error_bound <= 1e-10


def test_half_order_matches_scaled_erfc():
    assert ml_value(0.5, 1.0, -1.0) == pytest.approx(0.4275836, abs=1e-7)
    for x in (0.1, 1.0, 5.0, 10.0):
        assert abs(ml_value(0.5, 1.0, -x, 1e-12) - scaled_erfc(x)) <= 1e-9


def test_scaled_erfc_against_math_erfc():
    for x in (0.0, 0.3, 1.0, 1.9, 2.0, 3.5, 5.0):
        expected = math.exp(x * x) * math.erfc(x)
        assert scaled_erfc(x) == pytest.approx(expected, rel=1e-10)


def test_zero_argument_is_reciprocal_gamma():
    assert ml_value(0.7, 2.5, 0.0) == float(rgamma(2.5))
    assert ml_value(1.5, 1.0, 0.0) == 1.0


@pytest.mark.parametrize("mu", [0.0, -0.5, 2.5, float("nan")])
def test_query_rejects_mu_outside_domain(mu):
    with pytest.raises(DomainError):
        MLQuery(mu, 1.0, -1.0)


def test_nonpositive_tolerance_rejected():
    with pytest.raises(DomainError):
        ml_eval(MLQuery(0.5, 1.0, -1.0), tol=0.0)


def test_method_selection():
    assert ml_eval(MLQuery(0.5, 1.0, -1.0)).method is MLMethod.SERIES
    assert ml_eval(MLQuery(0.5, 1.0, -1e4)).method is MLMethod.ASYMPTOTIC
    assert ml_eval(MLQuery(0.5, 1.0, 30.0)).method is MLMethod.EXTENDED_PRECISION


@pytest.mark.parametrize("z", [-35.0, -12.0, -3.0, 2.0, 5.0])
def test_error_bound_respects_tolerance(z):
    result = ml_eval(MLQuery(1.0, 1.0, z), tol=1e-12)
    assert result.abs_error_bound <= 1e-12
    assert result.value == pytest.approx(math.exp(z), abs=1e-12)


@pytest.mark.parametrize("order", [0.25, 0.4, 0.75])
def test_leading_asymptotics_fractional_order(order):
    x = 1e4
    assert abs(x * gamma(1.0 - order) * ml_value(order, 1.0, -x) - 1.0) <= 1e-2


@pytest.mark.parametrize("order", [1.2, 1.5, 1.8])
def test_leading_asymptotics_between_one_and_two(order):
    x = 1e4
    assert abs(x * gamma(1.0 - order) * ml_value(order, 1.0, -x, 1e-12) - 1.0) <= 1e-2
    assert abs(x * gamma(2.0 - order) * ml_value(order, 2.0, -x, 1e-12) - 1.0) <= 1e-2


def test_asymptotic_expansion_within_its_bound():
    result = ml_asymptotic(0.5, 1.0, 50.0, 6)
    reference = ml_value(0.5, 1.0, -50.0, 1e-12)
    assert abs(result.value - reference) <= result.abs_error_bound + 1e-11
    assert result.method is MLMethod.ASYMPTOTIC


def test_asymptotic_bound_skips_terms_on_gamma_poles():
    # term 4 sits on the pole of Gamma at -1; terms 5 and 7 carry the bound
    result = ml_asymptotic(0.5, 1.0, 100.0, 3)
    assert result.abs_error_bound >= 4e-11
    assert abs(result.value - erfcx(100.0)) <= result.abs_error_bound
    assert abs(result.value - scaled_erfc(100.0)) <= result.abs_error_bound


def test_asymptotic_bound_is_exponential_only_for_exp():
    # E_{1,1}(-x) = exp(-x): every algebraic term vanishes
    result = ml_asymptotic(1.0, 1.0, 30.0, 5)
    assert result.value == 0.0
    assert result.abs_error_bound == pytest.approx(math.exp(-30.0))


def test_asymptotic_expansion_with_oscillatory_pair():
    result = ml_asymptotic(1.5, 1.0, 200.0, 4)
    reference = ml_value(1.5, 1.0, -200.0, 1e-12)
    assert abs(result.value - reference) <= result.abs_error_bound + 1e-11


def test_asymptotic_expansion_rejects_small_argument():
    with pytest.raises(AsymptoticRegimeError):
        ml_asymptotic(0.5, 1.0, 0.5, 10)


def test_asymptotic_expansion_domain():
    with pytest.raises(DomainError):
        ml_asymptotic(2.0, 1.0, 10.0, 3)
    with pytest.raises(DomainError):
        ml_asymptotic(0.5, 1.0, -1.0, 3)


def test_vectorised_values():
    values = ml_values(1.0, 1.0, [0.0, -1.0, -2.0])
    assert values == pytest.approx([1.0, math.exp(-1.0), math.exp(-2.0)], abs=1e-10)


def test_no_real_zeros_criterion():
    assert no_real_zeros(1.2, 2.0)
    assert not no_real_zeros(1.5, 2.0)
    with pytest.raises(DomainError):
        no_real_zeros(0.5, 2.0)


def test_zero_scan_finds_sign_change():
    scan = ml_real_zeros(1.9, 1.0, 10.0, step=0.01)
    assert len(scan.zeros) >= 1
    assert scan.zeros == sorted(scan.zeros)
    assert scan.max_zero == scan.zeros[-1]
    for zero in scan.zeros:
        assert abs(ml_value(1.9, 1.0, -zero)) <= 1e-8


def test_zero_scan_without_zeros():
    scan = ml_real_zeros(1.2, 2.0, 30.0, step=0.05)
    assert scan.zeros == []
    assert scan.max_zero is None
    assert scan.to_dict()["max_zero"] is None


def test_zero_scan_domain():
    with pytest.raises(DomainError):
        ml_real_zeros(0.8, 1.0, 10.0)
    with pytest.raises(DomainError):
        ml_real_zeros(1.5, 1.0, 0.0)


def test_decay_envelope_constant():
    envelope = ml_decay_envelope(0.5, 1.0, z_max=1e4, points=60)
    assert envelope.M == pytest.approx(1.0)
    assert envelope.last_decade_growth == pytest.approx(0.0, abs=1e-12)


def test_identity_suite():
    deviations = ml_identity_suite(tol=1e-12, points=100)
    assert deviations["exp"] <= 1e-10
    assert deviations["cos"] <= 1e-10
    assert deviations["sinc"] <= 1e-10
    assert deviations["erfc"] <= 1e-9
    assert deviations["recurrence"] <= 1e-9


@pytest.mark.slow
def test_zero_scan_finds_zeros_of_second_kind():
    scan = ml_real_zeros(1.9, 2.0, 1e3, step=0.05)
    assert scan.zeros
    assert not no_real_zeros(1.9, 2.0)
    for zero in scan.zeros:
        before = ml_value(1.9, 2.0, -(zero - 1e-3))
        after = ml_value(1.9, 2.0, -(zero + 1e-3))
        assert before * after < 0.0


def test_zero_scan_on_criterion_boundary():
    # eta = 3 mu / 2 exactly
    assert no_real_zeros(1.5, 2.25)
    scan = ml_real_zeros(1.5, 2.25, 50.0, step=0.05)
    assert scan.zeros == []
    assert scan.max_zero is None


@pytest.mark.parametrize("eta", [1.0, 2.0])
def test_decay_envelope_between_one_and_two(eta):
    envelope = ml_decay_envelope(1.5, eta, z_max=1e4, points=80)
    assert math.isfinite(envelope.M)
    assert envelope.M >= 1.0 / gamma(eta)
    assert envelope.last_decade_growth <= 0.05


def test_evaluator_class():
    ml = MittagLeffler(tol=1e-12)
    assert ml(1.0, 1.0, -2.0) == pytest.approx(math.exp(-2.0), abs=1e-12)
    result = ml.evaluate(0.5, 1.0, -1.0)
    assert result.method is MLMethod.SERIES
    assert result.value == pytest.approx(scaled_erfc(1.0), abs=1e-9)
    assert ml.values(2.0, 1.0, [0.0, -1.0]) == pytest.approx([1.0, math.cos(1.0)], abs=1e-12)
    scan = ml.real_zeros(1.9, 1.0, 10.0, step=0.01)
    assert scan.zeros == ml_real_zeros(1.9, 1.0, 10.0, step=0.01, tol=1e-12).zeros
    assert ml.decay_envelope(0.5, 1.0, z_max=1e3, points=30).M == pytest.approx(1.0)


def test_evaluator_class_rejects_bad_tolerance():
    with pytest.raises(DomainError):
        MittagLeffler(tol=0.0)


def test_positive_axis_beyond_tolerance_raises():
    # E_{1/2,1}(3) ~ 1.6e4; 1e-12 absolute is below its rounding
    with pytest.raises(NonConvergence):
        ml_value(0.5, 1.0, 3.0, 1e-12)
