import math

import numpy as np
import pytest
from scipy import integrate, special

from domain import DomainError, PExponent, PlanePoint, SeriesEnvelopeError
from domain.gen_bessel import (
    j0p_quad,
    j0p_series,
    jomega,
    jomega_many,
    jomega_normalized,
    jomega_quad,
    jomega_series,
    kratzel_j,
    normalized_origin,
    order_profile,
    radial_transform,
    richards_j,
)
from domain.lattice import d_cal_closed


def _circle_points():
    angles = np.linspace(0.0, 0.5 * math.pi, 5)
    radii = [0.5, 2.0, 4.5, 7.0, 10.0]
    return [PlanePoint(r * math.cos(a), r * math.sin(a)) for r in radii for a in angles]


@pytest.mark.parametrize('omega', [0.0, 0.5, 1.0, 2.0, 3.5])
def test_circle_case_reduces_to_classical_bessel(omega):
    p = PExponent.of(2.0)
    worst = 0.0
    for eta in _circle_points():
        radius = math.hypot(eta.eta1, eta.eta2)
        value = jomega(p, omega, eta).value
        worst = max(worst, abs(value - special.jv(omega, radius)))
    assert worst <= 1e-8


@pytest.mark.parametrize('p_value', [0.5, 1.0, 2.0, 3.0])
def test_j0p_at_origin(p_value):
    p = PExponent.of(p_value)
    expected = (2.0 / p_value) ** 2 / special.gamma(2.0 / p_value)
    assert j0p_series(p, PlanePoint(0.0, 0.0)).value == pytest.approx(expected, abs=1e-12)
    assert j0p_quad(p, PlanePoint(0.0, 0.0)).value == pytest.approx(expected, abs=1e-10)


ETA_POINTS = [(0.3, 0.0), (1.0, 1.0), (0.0, 2.5), (3.0, 4.0), (5.0, 0.7), (2.2, 5.0), (4.0, 4.0), (0.1, 3.3), (5.0, 5.0)]


@pytest.mark.parametrize('p_value', [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize('omega', [0.0, 1.0, 2.0])
def test_series_and_quadrature_agree(p_value, omega):
    p = PExponent.of(p_value)
    for eta1, eta2 in ETA_POINTS:
        eta = PlanePoint(eta1, eta2)
        series = jomega_series(p, omega, eta)
        quad = jomega_quad(p, omega, eta, tol=1e-10)
        assert abs(series.value - quad.value) <= 1e-7, (eta1, eta2)


def test_series_outside_envelope_is_rejected():
    with pytest.raises(SeriesEnvelopeError):
        j0p_series(PExponent.of(2.0), PlanePoint(40.0, 0.0))


def test_jomega_vanishes_at_origin_for_positive_order():
    assert jomega_quad(PExponent.of(3.0), 1.5, PlanePoint(0.0, 0.0)).value == 0.0


def test_normalized_is_continuous_at_origin():
    p = PExponent.of(1.5)
    at_zero = jomega_normalized(p, 2.0, PlanePoint(0.0, 0.0))
    near = jomega_normalized(p, 2.0, PlanePoint(1e-4, 2e-4))
    assert at_zero.method == 'closed_form'
    assert at_zero.value == pytest.approx(normalized_origin(p, 2.0), rel=1e-15)
    assert near.value == pytest.approx(at_zero.value, rel=1e-6)


def test_normalized_rejects_zero_order():
    with pytest.raises(DomainError):
        jomega_normalized(PExponent.of(2.0), 0.0, PlanePoint(1.0, 0.0))


def test_negative_order_rejected():
    with pytest.raises(DomainError):
        jomega_quad(PExponent.of(2.0), -0.5, PlanePoint(1.0, 0.0))


@pytest.mark.parametrize('p_value, omega', [(2.0, 2.0), (3.0, 3.0), (0.5, 4.0)])
def test_profile_matches_direct_evaluation(p_value, omega):
    p = PExponent.of(p_value)
    points = [(0.0, 0.0), (1.5, 0.2), (7.0, 3.0), (20.0, 11.0), (35.0, 2.0)]
    eta1 = np.array([a for a, _ in points])
    eta2 = np.array([b for _, b in points])
    values, errors = jomega_many(p, omega, eta1, eta2, tol=1e-12)
    for (a, b), value in zip(points, values):
        direct = jomega_normalized(p, omega, PlanePoint(a, b), tol=1e-12).value
        assert value == pytest.approx(direct, abs=1e-10)
    assert np.all(errors >= 0.0)


def test_profile_is_cached_per_order():
    p = PExponent.of(3.0)
    first = order_profile(p, 2.0, 10.0)
    second = order_profile(p, 2.0, 20.0)
    assert first is second
    with pytest.raises(DomainError):
        first.g(np.array([first.c_max + 1.0]))


def test_kratzel_reduces_to_classical_bessel_for_circle():
    res = kratzel_j(2.0, 1.0, 3.0)
    assert res.value == pytest.approx(special.jv(1.0, 3.0), abs=1e-9)


def test_kratzel_against_direct_integral():
    p, nu, r = 3.0, 2.0 / 3.0, 2.0 * math.pi
    integral, _ = integrate.quad(lambda t: (1.0 - t ** p) ** (nu - 1.0 / p) * math.cos(r * t), 0.0, 1.0,
                                 epsabs=1e-13, limit=200)
    expected = 2.0 / (math.sqrt(math.pi) * special.gamma(nu + 1.0 - 1.0 / p)) * (r / 2.0) ** (p * nu / 2.0) * integral
    assert kratzel_j(p, nu, r).value == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize('p, nu, r', [(0.5, 1.0, 1.0), (3.0, -1.0, 1.0), (3.0, 1.0, 0.0)])
def test_kratzel_domain(p, nu, r):
    with pytest.raises(DomainError):
        kratzel_j(p, nu, r)


def test_richards_normalization():
    p = PExponent.of(4.0)
    eta = PlanePoint(1.2, 0.4)
    expected = 4.0 * special.gamma(0.25) ** 2 * j0p_quad(p, eta).value
    assert richards_j(p, eta).value == pytest.approx(expected, rel=1e-9)


def test_radial_transform_reproduces_continuous_sum():
    p = PExponent.of(2.0)
    xi = PlanePoint(0.3, 0.1)
    res = radial_transform(p, lambda r: 1.0 - r ** 2, xi, tol=1e-9)
    expected = special.gamma(2.0) * d_cal_closed(p, 1.0, 1.0, xi).value
    assert res.value == pytest.approx(expected, abs=1e-7)


SYMMETRY_GRID = [(0.37 * k, 6.0 - 0.55 * k) for k in range(20)]


@pytest.mark.parametrize('p_value', [0.5, 1.0, 2.0, 3.0])
def test_j0p_symmetries_and_bound(p_value):
    p = PExponent.of(p_value)
    peak = (2.0 / p_value) ** 2 / special.gamma(2.0 / p_value)
    for a, b in SYMMETRY_GRID:
        value = j0p_quad(p, PlanePoint(a, b)).value
        for s1, s2 in ((-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)):
            assert j0p_quad(p, PlanePoint(s1 * a, s2 * b)).value == pytest.approx(value, abs=1e-12)
        assert j0p_quad(p, PlanePoint(b, a)).value == pytest.approx(value, abs=1e-12)
        assert abs(value) <= peak + 1e-10


@pytest.mark.parametrize('p_value', [30.0, 50.0])
def test_j0p_large_p_at_origin(p_value):
    # The endpoint exponents 1/p - 1 are close to -1 here.
    p = PExponent.of(p_value)
    expected = (2.0 / p_value) ** 2 / special.gamma(2.0 / p_value)
    assert j0p_quad(p, PlanePoint(0.0, 0.0)).value == pytest.approx(expected, rel=1e-8)
    away = j0p_quad(p, PlanePoint(1.0, 2.0)).value
    assert math.isfinite(away)
    assert abs(away) <= expected + 1e-10


@pytest.mark.parametrize('nu', [0.0, 1.0, 2.0])
@pytest.mark.parametrize('r', [0.5, 2.0, 5.0, 9.3])
def test_kratzel_circle_orders(nu, r):
    assert kratzel_j(2.0, nu, r).value == pytest.approx(special.jv(nu, r), abs=1e-9)


@pytest.mark.filterwarnings('error::RuntimeWarning')
def test_profile_quadrature_is_warning_free():
    p = PExponent.of(3.0)
    res = jomega_quad(p, 2.0, PlanePoint(1.5, 0.7))
    assert math.isfinite(res.value)
    values, _ = jomega_many(p, 2.5, np.array([0.0, 2.0]), np.array([1.0, 3.0]))
    assert np.all(np.isfinite(values))
