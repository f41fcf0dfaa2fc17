import math

import numpy as np
import pytest
from scipy import integrate, special

from domain import DomainError, IdentityReport, PExponent, PlanePoint, PreconditionViolation
from domain.lattice import d_cal_closed
from application.identity import (
    hardy_cosine_partial,
    hardy_partial,
    kn_series_check,
    kn_term,
    kratzel_remainder,
    second_main_term,
    shell_indices,
    theorem_residual,
    theorem_series_rhs,
    theorem_term,
    theorem_terms,
)

ORIGIN = PlanePoint(0.0, 0.0)


def test_shells_are_ordered_and_complete():
    n1, n2, shell = shell_indices(3)
    assert len(n1) == 7 * 7 - 1
    assert np.all(np.diff(shell) >= 0)
    assert [(int(a), int(b)) for a, b in zip(n1[:8], n2[:8])] == [
        (-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1),
    ]


def test_single_term_both_paths():
    s = 1.5
    z = 2.0 * math.pi * math.sqrt(s)
    expected = s ** 2 * 4.0 * math.pi * special.jv(2.0, z) / z ** 2
    classical = kn_term(1.0, s, ORIGIN, (1, 0))
    general = theorem_term(PExponent.of(2.0), 1.0, s, ORIGIN, (1, 0))
    assert classical == pytest.approx(expected, abs=1e-12)
    assert abs(classical - general) <= 1e-10


def test_first_shell_symmetry():
    n1, n2, _, terms = theorem_terms(PExponent.of(2.0), 1.0, 0.5, ORIGIN, 1)
    axis = terms[(n1 == 0) | (n2 == 0)]
    diagonal = terms[(n1 != 0) & (n2 != 0)]
    assert len(axis) == 4 and len(diagonal) == 4
    assert np.ptp(axis) <= 1e-12
    assert np.ptp(diagonal) <= 1e-12


def test_trace_extends_shell_by_shell():
    report = theorem_series_rhs(PExponent.of(2.0), 2.0, 1.5, ORIGIN, 12)
    assert [k for k, _ in report.trace] == list(range(1, 13))
    assert report.rhs_truncated == report.trace[-1][1]
    assert math.isnan(report.lhs)
    assert len(report.shell_magnitudes) == 12
    assert report.tail_bound >= 0.0


def test_circle_anchor():
    report = theorem_residual(PExponent.of(2.0), 1.0, 1.5, ORIGIN, 40)
    assert report.lhs == pytest.approx(3.5 - 1.125 * math.pi, abs=1e-12)
    assert report.passes(1e-3)


@pytest.mark.parametrize('p_value, beta, s, x', [
    (2.0, 2.0, 1.5, (0.0, 0.0)),
    (1.0, 2.0, 0.5, (0.25, 0.0)),
    (3.0, 2.0, 2.2, (0.1, 0.4)),
    (0.5, 3.0, 1.2, (0.0, 0.0)),
])
def test_identity_residuals(p_value, beta, s, x):
    report = theorem_residual(PExponent.of(p_value), beta, s, PlanePoint(*x), 40)
    assert abs(report.residual) <= max(1e-3, 3.0 * report.tail_bound)
    # Absolute convergence shows up as decaying shell magnitudes.
    assert report.shell_magnitudes[39] * 20.0 <= report.shell_magnitudes[4]
    assert abs(report.lhs - report.trace[39][1]) <= abs(report.lhs - report.trace[9][1])


def test_single_point_lhs():
    p = PExponent.of(1.0)
    report = theorem_residual(p, 2.0, 0.5, PlanePoint(0.25, 0.0), 30)
    expected = 0.125 / 2.0 - d_cal_closed(p, 2.0, 0.5, PlanePoint(0.25, 0.0)).value
    assert report.lhs == pytest.approx(expected, abs=1e-12)


def test_point_outside_torus_rejected():
    with pytest.raises(PreconditionViolation):
        theorem_series_rhs(PExponent.of(2.0), 2.0, 1.0, PlanePoint(0.7, 0.0), 5)
    with pytest.raises(PreconditionViolation):
        theorem_series_rhs(PExponent.of(2.0), 2.0, 1.0, PlanePoint(-0.5, 0.0), 5)


def test_classical_series_agrees_with_general_series():
    report = kn_series_check(0.75, 1.0, PlanePoint(0.3, 0.3), 20)
    assert report.path_gap <= 1e-9
    assert abs(report.residual) <= max(1e-3, 3.0 * report.tail_bound)


def test_classical_series_needs_beta_above_half():
    with pytest.raises(PreconditionViolation):
        kn_series_check(0.5, 1.0, ORIGIN, 5)


def test_circle_cross_identity():
    general = theorem_series_rhs(PExponent.of(2.0), 1.0, 1.5, ORIGIN, 25)
    classical = kn_series_check(1.0, 1.5, ORIGIN, 25)
    assert abs(general.rhs_truncated - classical.rhs_truncated) <= 1e-9


def test_hardy_small_radius():
    report = hardy_partial(0.5, 10_000)
    assert report.lhs == pytest.approx(1.0 - math.pi / 4.0, abs=1e-15)
    assert [n for n, _ in report.trace] == [10, 100, 1000, 10_000]
    residuals = [abs(report.lhs - partial) for _, partial in report.trace]
    assert sum(b < a for a, b in zip(residuals, residuals[1:])) >= 2
    assert abs(report.residual) <= 0.05


@pytest.mark.parametrize('r', [1.3, 2.5])
def test_hardy_trend(r):
    report = hardy_partial(r, 10_000)
    residuals = [abs(report.lhs - partial) for _, partial in report.trace]
    assert sum(b < a for a, b in zip(residuals, residuals[1:])) >= 2


def test_hardy_lhs_values():
    assert hardy_partial(1.3, 10).lhs == pytest.approx(5 - 1.69 * math.pi, abs=1e-12)
    assert hardy_partial(2.5, 10).lhs == pytest.approx(21 - 6.25 * math.pi, abs=1e-12)


def test_hardy_integer_square_rejected():
    with pytest.raises(PreconditionViolation):
        hardy_partial(math.sqrt(2.0), 100)


def test_hardy_cosine_form_is_finite():
    res = hardy_cosine_partial(10.3, 2000)
    assert math.isfinite(res.value)
    assert res.terms > 0


def test_second_main_term_single_term():
    p, r = 3.0, 1.0
    nu = 2.0 / p
    x = 2.0 * math.pi * r
    integral, _ = integrate.quad(lambda t: (1.0 - t ** p) ** (nu - 1.0 / p) * math.cos(x * t), 0.0, 1.0,
                                 epsabs=1e-13, limit=200)
    kratzel = 2.0 / (math.sqrt(math.pi) * special.gamma(nu + 1.0 - 1.0 / p)) * (x / 2.0) ** (p * nu / 2.0) * integral
    expected = 8.0 * math.sqrt(math.pi) * special.gamma(1.0 + 1.0 / p) * (r / math.pi) * kratzel
    assert second_main_term(p, r, 1).value == pytest.approx(expected, abs=1e-9)


def test_second_main_term_settles():
    settled = second_main_term(4.0, 0.1, 50)
    longer = second_main_term(4.0, 0.1, 60)
    assert settled.tail <= 1e-3
    assert abs(longer.value - settled.value) <= 5e-3


def test_second_main_term_growth_bound():
    res = second_main_term(3.0, 5.0, 60)
    assert math.isfinite(res.value)
    assert abs(res.value) <= 20.0 * 5.0 ** (2.0 / 3.0)


def test_second_main_term_needs_p_above_two():
    with pytest.raises(DomainError):
        second_main_term(2.0, 1.0, 10)


def test_kratzel_remainder_is_difference():
    rem = kratzel_remainder(3.0, 2.3, 20)
    smt = second_main_term(3.0, 2.3, 20)
    from domain.lattice import error_term

    assert rem.value == pytest.approx(error_term(PExponent.of(3.0), 2.3).error - smt.value, abs=1e-12)


def test_infinite_tail_bound_never_passes():
    report = IdentityReport(lhs=0.0, rhs_truncated=0.0, tail_bound=math.inf, residual=0.0, cutoff=3)
    assert not report.passes(1e-3)
    assert not report.passes(math.inf)


def test_non_shrinking_series_fails():
    # Below the integrability threshold the shells do not decay.
    report = theorem_residual(PExponent.of(2.0), -0.5, 1.5, ORIGIN, 10)
    assert not report.passes(1e-3)


def test_large_p_residual_is_finite():
    report = theorem_residual(PExponent.of(30.0), 2.0, 1.5, PlanePoint(0.1, 0.2), 10)
    assert math.isfinite(report.lhs)
    assert math.isfinite(report.rhs_truncated)
    assert math.isfinite(report.residual)
