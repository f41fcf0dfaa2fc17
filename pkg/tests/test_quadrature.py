import math

import numpy as np
import pytest
from scipy import integrate, special

from domain import DomainError, NonConvergence
from domain.quadrature import (
    integrate_01_singular,
    integrate_01_singular_batch,
    integrate_interval,
    integrate_rect2d,
)


@pytest.mark.parametrize('a, b', [(-0.5, -0.5), (1.0, -0.5), (-0.9, 0.3), (0.0, 0.0), (2.0, 5.0)])
def test_weight_mass_is_beta_function(a, b):
    res = integrate_01_singular(lambda t, tc: np.ones_like(t), a, b, tol=1e-12)
    assert res.value == pytest.approx(special.beta(a + 1.0, b + 1.0), abs=1e-11)
    assert res.error_estimate >= 0.0
    assert res.evaluations > 0


@pytest.mark.parametrize('c', [0.0, 1.0, 7.5, 40.0])
def test_cosine_against_bessel_closed_form(c):
    # int_0^1 cos(c t) / sqrt(t (1 - t)) dt = pi cos(c/2) J_0(c/2)
    res = integrate_01_singular(lambda t, tc: np.cos(c * t), -0.5, -0.5, tol=1e-12)
    assert res.value == pytest.approx(math.pi * math.cos(c / 2) * special.j0(c / 2), abs=1e-10)


def test_complement_is_passed_accurately():
    # (1 - t)**0.5 written through the complement: the weight alone gives B(1, 1.5).
    res = integrate_01_singular(lambda t, tc: tc ** 0.5, 0.0, -0.5, tol=1e-12)
    assert res.value == pytest.approx(1.0, abs=1e-11)


def test_batch_rows_are_independent_integrals():
    c = np.array([0.0, 2.0, 5.0])[:, np.newaxis]
    res = integrate_01_singular_batch(lambda t, tc: np.cos(c * t), -0.5, -0.5, tol=1e-12)
    expected = math.pi * np.cos(c.ravel() / 2) * special.j0(c.ravel() / 2)
    assert np.allclose(res.values, expected, atol=1e-10)
    assert res.values.shape == (3,)


def test_rejects_nonintegrable_exponent():
    with pytest.raises(DomainError):
        integrate_01_singular(lambda t, tc: t, -1.0, 0.0)


def test_budget_exhaustion_reports_best_value():
    with pytest.raises(NonConvergence) as info:
        integrate_01_singular(lambda t, tc: np.cos(2000.0 * t), 0.0, 0.0, tol=1e-14, max_evaluations=400)
    assert math.isfinite(info.value.value)
    assert info.value.error_estimate > 0


def test_interval_rule_is_exact_for_polynomials():
    res = integrate_interval(lambda x: 3 * x ** 2 + x, 0.0, 2.0, tol=1e-12)
    assert res.value == pytest.approx(10.0, abs=1e-12)


def test_interval_rule_adapts_to_peaks():
    res = integrate_interval(lambda x: 1.0 / (1e-4 + x ** 2), -1.0, 1.0, tol=1e-9)
    assert res.value == pytest.approx(2.0 * 100.0 * math.atan(100.0), rel=1e-10)


def test_rect2d_product_integrands():
    res = integrate_rect2d(lambda x, y: x * y, (0.0, 1.0), (0.0, 2.0), tol=1e-10)
    assert res.value == pytest.approx(1.0, abs=1e-10)
    res = integrate_rect2d(lambda x, y: np.exp(x + y), (0.0, 1.0), (-1.0, 1.0), tol=1e-10)
    assert res.value == pytest.approx((math.e - 1.0) * (math.e - 1.0 / math.e), abs=1e-9)


def test_weight_mass_near_minus_one():
    # Nearly all of the mass sits below the smallest tanh-sinh node without the split.
    res = integrate_01_singular(lambda t, tc: np.ones_like(t), -0.98, -0.98)
    assert res.value == pytest.approx(special.beta(0.02, 0.02), rel=1e-10)
    res = integrate_01_singular(lambda t, tc: np.cos(3.0 * t), -0.97, 0.5, tol=1e-11)
    expected, _ = integrate.quad(lambda t: math.cos(3.0 * t), 0.0, 1.0, weight='alg', wvar=(-0.97, 0.5), epsabs=1e-13)
    assert res.value == pytest.approx(expected, abs=1e-9)


def test_square_root_cosine():
    # Substituting u = sqrt(t) gives 2 int_0^1 cos(10 u) du.
    res = integrate_01_singular(lambda t, tc: np.cos(10.0 * np.sqrt(t)), -0.5, 0.0, tol=1e-12)
    assert res.value == pytest.approx(2.0 * math.sin(10.0) / 10.0, abs=1e-11)


def test_diamond_indicator_area():
    res = integrate_rect2d(lambda x, y: np.where(np.abs(x) + np.abs(y) < 1.0, 1.0, 0.0),
                           (-1.0, 1.0), (-1.0, 1.0), tol=1e-6)
    assert res.value == pytest.approx(2.0, abs=1e-5)


CALIBRATION = [
    (lambda t, tc: np.ones_like(t), -0.5, -0.5, math.pi),
    (lambda t, tc: np.cos(7.5 * t), -0.5, -0.5, math.pi * math.cos(3.75) * special.j0(3.75)),
    (lambda t, tc: np.cos(10.0 * np.sqrt(t)), -0.5, 0.0, 0.2 * math.sin(10.0)),
    (lambda t, tc: t * t, 0.0, 0.0, 1.0 / 3.0),
    (lambda t, tc: np.exp(t), 0.0, 0.0, math.e - 1.0),
    (lambda t, tc: 1.0 / (1.0 + t), 0.0, 0.0, math.log(2.0)),
    (lambda t, tc: np.ones_like(t), -0.9, 0.3, special.beta(0.1, 1.3)),
    (lambda t, tc: np.ones_like(t), -0.95, -0.95, special.beta(0.05, 0.05)),
    (lambda t, tc: tc ** 0.5, 0.0, -0.5, 1.0),
    (lambda t, tc: t, 2.0, 5.0, special.beta(4.0, 6.0)),
]


@pytest.mark.parametrize('f, a, b, truth', CALIBRATION)
def test_halving_tol_never_loses_accuracy(f, a, b, truth):
    for tol in (1e-4, 1e-6, 1e-8, 1e-10):
        coarse = abs(integrate_01_singular(f, a, b, tol=tol).value - truth)
        fine = abs(integrate_01_singular(f, a, b, tol=tol / 2.0).value - truth)
        assert fine <= max(coarse, 1e-13 * max(1.0, abs(truth)))
