import math

import numpy as np
import pytest

from domain import DomainError, InsufficientData, PExponent, RingCell, SweepRecord
from application.analysis import beta_scan, fit_growth_exponent, ring_integral, ring_verdict, sweep
from application.workers import WorkerMap, resolve_threads


def _records(errors, radii=None):
    radii = np.geomspace(2.0, 200.0, len(errors)) if radii is None else radii
    return [SweepRecord(p=2.0, r=float(r), count=0, area=0.0, error=float(e)) for r, e in zip(radii, errors)]


def test_constant_error_has_zero_slope():
    fit = fit_growth_exponent(_records([2.0] * 40))
    assert abs(fit.slope) <= 0.02
    assert fit.n_samples == 40


def test_power_law_slope_is_recovered():
    radii = np.geomspace(2.0, 200.0, 60)
    fit = fit_growth_exponent(_records(3.0 * radii ** 0.5, radii))
    assert fit.slope == pytest.approx(0.5, abs=1e-6)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-6)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)
    assert fit.window_max_slope == pytest.approx(0.5, abs=1e-6)


def test_slope_is_scale_equivariant():
    radii = np.geomspace(5.0, 500.0, 80)
    rng = np.random.default_rng(7)
    errors = radii ** 0.6 * (1.0 + 0.5 * rng.standard_normal(radii.size)) + 0.1
    base = fit_growth_exponent(_records(errors, radii))
    scaled = fit_growth_exponent(_records(17.0 * errors, radii))
    assert scaled.slope == pytest.approx(base.slope, abs=1e-9)
    assert scaled.intercept - base.intercept == pytest.approx(math.log(17.0), abs=1e-9)


def test_oscillating_error_fits_window_maxima():
    radii = np.geomspace(10.0, 1000.0, 400)
    errors = radii ** 0.5 * np.sin(radii)
    fit = fit_growth_exponent(_records(errors, radii), window=3)
    assert fit.window_max_slope == pytest.approx(0.5, abs=0.05)
    assert math.isfinite(fit.omega_slope)


def test_near_zero_samples_are_skipped():
    errors = [0.0] * 5 + [1.0] * 12
    fit = fit_growth_exponent(_records(errors))
    assert fit.n_samples == 12


@pytest.mark.parametrize(
    'errors, radii',
    [
        ([1.0] * 9, None),
        ([0.0] * 20, None),
        ([1.0] * 12, [1.0 + i for i in range(11)] + [5.0]),
    ],
)
def test_fit_rejects_insufficient_data(errors, radii):
    with pytest.raises(InsufficientData):
        fit_growth_exponent(_records(errors, radii))


def test_sweep_order_does_not_depend_on_threads():
    p = PExponent.of(2.0)
    radii = list(np.geomspace(1.0, 40.0, 25))
    single = sweep(p, radii, threads=1)
    pooled = sweep(p, radii, threads=3)
    assert single == pooled
    assert [rec.r for rec in single] == radii


def test_sweep_rejects_empty_grid():
    with pytest.raises(DomainError):
        sweep(PExponent.of(2.0), [])


def test_worker_map_keeps_input_order():
    with WorkerMap(4) as run:
        assert run(lambda v: v * v, range(20)) == [v * v for v in range(20)]
    assert resolve_threads('auto') >= 1
    with pytest.raises(ValueError):
        resolve_threads(0)


def test_ring_verdict_on_power_laws():
    decaying = [RingCell(1.0, r, r ** -0.5, 0.0, 'profile') for r in (1.0, 2.0, 4.0, 8.0, 16.0)]
    growing = [RingCell(0.25, r, r ** 0.25, 0.0, 'profile') for r in (1.0, 2.0, 4.0, 8.0, 16.0)]
    assert ring_verdict(decaying).integrable
    assert ring_verdict(decaying).decay_exponent == pytest.approx(-0.5, abs=1e-12)
    assert not ring_verdict(growing).integrable


def test_ring_verdict_drops_innermost_radius_and_failed_cells():
    cells = [RingCell(1.0, 1.0, 50.0, 0.0, 'profile')]
    cells += [RingCell(1.0, r, r ** -1.0, 0.0, 'profile') for r in (2.0, 4.0, 8.0, 16.0)]
    cells.append(RingCell(1.0, 32.0, math.nan, math.inf, 'failed', failed=True))
    verdict = ring_verdict(cells)
    assert verdict.decay_exponent == pytest.approx(-1.0, abs=1e-12)
    assert verdict.failed_cells == 1


def test_ring_verdict_with_too_few_cells():
    verdict = ring_verdict([RingCell(1.0, 1.0, 0.0, 0.0, 'profile')])
    assert math.isnan(verdict.decay_exponent)
    assert not verdict.integrable


def test_ring_integral_small_radius_is_positive():
    cell = ring_integral(PExponent.of(2.0), 1.0, 1.0)
    assert cell.ring_integral > 0
    assert not cell.failed


def test_beta_scan_separates_circle_thresholds():
    scan = beta_scan(PExponent.of(2.0), (0.25, 1.0), (1.0, 2.0, 4.0, 8.0, 16.0))
    assert len(scan.cells) == 10
    assert all(not c.failed for c in scan.cells)
    high = scan.verdict(1.0)
    assert high.integrable
    assert high.decay_exponent == pytest.approx(-0.5, abs=0.15)
    assert not scan.verdict(0.25).integrable


@pytest.mark.parametrize('betas, radii', [((-1.0,), (1.0, 2.0)), ((7.0,), (1.0, 2.0)), ((1.0,), (2.0, 1.0))])
def test_beta_scan_rejects_bad_grid(betas, radii):
    with pytest.raises(DomainError):
        beta_scan(PExponent.of(2.0), betas, radii)


def test_beta_scan_flags_extreme_orders():
    scan = beta_scan(PExponent.of(2.0), (0.0, 2.0), (1.0, 2.0, 4.0, 8.0, 16.0))
    assert not scan.verdict(0.0).integrable
    assert scan.verdict(2.0).integrable


def test_gauss_circle_window_maxima_stay_below_three_quarters():
    records = sweep(PExponent.of(2.0), np.geomspace(10.0, 2000.0, 500), threads=2)
    fit = fit_growth_exponent(records)
    assert fit.n_samples >= 10
    assert fit.window_max_slope <= 0.75
