"""Empirical asymptotics: error-term sweeps, growth-exponent fits and the ring scan.

The ring integral of |Dcal_beta(1: y)| over R <= |y|_p <= 2R is taken in
p-polar coordinates y = rho (+-t**(1/p), +-(1-t)**(1/p)), whose area element
is (rho / p) (t (1-t))**(1/p-1) d rho dt.  Dcal is even in each coordinate, so

    ring(R) = (4 / p) int_R^{2R} rho int_0^1 |Dcal(1: rho t**(1/p), rho (1-t)**(1/p))|
                                               (t (1-t))**(1/p-1) dt d rho,

computed with a Gauss-Legendre rule in rho and a Gauss-Jacobi rule in t.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from domain import (
    DEFAULT_TOLERANCES,
    BetaScan,
    BetaVerdict,
    ComputationError,
    DomainError,
    ExponentFit,
    InsufficientData,
    PExponent,
    PlanePoint,
    RingCell,
    SweepRecord,
    Tolerances,
)
from domain.lattice import d_cal_closed_many, d_cal_quad, error_term

from .workers import WorkerMap

LogCallback = Callable[[str], None]

MIN_SAMPLES = 10
ZERO_FLOOR = 1e-9
BETA_MAX = 6.0
RING_NODES_PER_UNIT = 16
RING_MIN_NODES = 32
FALLBACK_NODES = 8


def _emit(log_cb: LogCallback | None, message: str) -> None:
    if log_cb:
        log_cb(message)


# --- sweeps -------------------------------------------------------------------


def sweep(
    p: PExponent,
    r_values: Sequence[float],
    threads: int | str | None = 1,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    log_cb: LogCallback | None = None,
) -> list[SweepRecord]:
    """P_p(r) for each r, in input order regardless of the worker count."""
    radii = [float(r) for r in r_values]
    if not radii:
        raise DomainError('error_empty_grid', 'no radii')
    # The largest radius fails the enumeration budget before any work starts.
    error_term(p, max(radii), tolerances)
    with WorkerMap(threads) as run:
        records = run(lambda r: error_term(p, r, tolerances), radii)
    _emit(log_cb, f'sweep p={p.p:g}: {len(records)} radii in [{radii[0]:g}, {radii[-1]:g}]')
    return records


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), r_squared


def _window_maxima(
    r: np.ndarray,
    values: np.ndarray,
    window: int,
    ratio: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Largest |value| per geometric window [r0 ratio**k, r0 ratio**(k+1)) and where it sits.

    Windows holding fewer than ``window`` samples are skipped.
    """
    index = np.floor(np.log(r / r[0]) / math.log(ratio)).astype(np.int64)
    where: list[float] = []
    peaks: list[float] = []
    for k in np.unique(index):
        members = np.flatnonzero(index == k)
        if members.size < window:
            continue
        best = members[int(np.argmax(values[members]))]
        if values[best] > ZERO_FLOOR:
            where.append(float(r[best]))
            peaks.append(float(values[best]))
    return np.array(where), np.array(peaks)


def fit_growth_exponent(
    records: Sequence[SweepRecord],
    window: int = 1,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ExponentFit:
    """Least-squares slope of log|P_p(r)| against log r, plus window-maximum fits.

    Samples with |P_p| <= 1e-9 are left out of the plain fit.  ``window`` is the
    minimum number of samples a geometric window needs to contribute a maximum.
    ``omega_slope`` fits the lower envelope of those maxima and is never asserted.
    """
    if len(records) < MIN_SAMPLES:
        raise InsufficientData('error_insufficient_samples', f'{len(records)} < {MIN_SAMPLES}')
    r = np.array([rec.r for rec in records], dtype=float)
    values = np.abs(np.array([rec.error for rec in records], dtype=float))
    if np.any(np.diff(r) <= 0) or r[0] <= 0:
        raise InsufficientData('error_r_not_increasing', 'radii must be positive and strictly increasing')
    usable = values > ZERO_FLOOR
    if int(usable.sum()) < MIN_SAMPLES:
        raise InsufficientData('error_insufficient_samples', f'{int(usable.sum())} usable < {MIN_SAMPLES}')
    slope, intercept, r_squared = _linear_fit(np.log(r[usable]), np.log(values[usable]))

    where, peaks = _window_maxima(r, values, max(1, int(window)), tolerances.window_ratio)
    window_slope = math.nan
    omega_slope = math.nan
    if peaks.size >= 2:
        window_slope, _, _ = _linear_fit(np.log(where), np.log(peaks))
        envelope = np.minimum.accumulate(peaks[::-1])[::-1]
        omega_slope, _, _ = _linear_fit(np.log(where), np.log(envelope))
    return ExponentFit(
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        window_max_slope=window_slope,
        n_samples=int(usable.sum()),
        omega_slope=omega_slope,
    )


# --- ring scan ------------------------------------------------------------------


def _check_scan_grid(betas: Sequence[float], radii: Sequence[float]) -> None:
    for beta in betas:
        if not -1.0 < beta <= BETA_MAX:
            raise DomainError('error_beta_range', f'beta={beta!r} outside (-1, {BETA_MAX:g}]')
    if len(radii) == 0 or radii[0] <= 0 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise DomainError('error_radius_grid', f'radii={list(radii)!r}')


def _ring_nodes(p: PExponent, radius: float, per_unit: int, minimum: int):
    """Product rule for the ring: rho nodes/weights and t nodes/weights."""
    n_rho = max(minimum, int(math.ceil(per_unit * radius)))
    x, w = np.polynomial.legendre.leggauss(n_rho)
    rho = radius * (1.5 + 0.5 * x)
    rho_w = 0.5 * radius * w * rho
    a = p.inv - 1.0
    n_t = max(3 * minimum // 2, int(math.ceil(per_unit * radius)))
    u, v = roots_jacobi(n_t, a, a)
    t = 0.5 * (1.0 + u)
    t_w = v * 0.5 ** (2.0 * a + 1.0)
    return rho, rho_w, t, t_w


def _ring_points(p: PExponent, rho: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    inv = p.inv
    tc = 1.0 - t
    y1 = np.outer(rho, t ** inv)
    y2 = np.outer(rho, tc ** inv)
    return y1, y2


def _ring_closed(p: PExponent, beta: float, radius: float, tol: float, tolerances: Tolerances) -> RingCell:
    rho, rho_w, t, t_w = _ring_nodes(p, radius, RING_NODES_PER_UNIT, RING_MIN_NODES)
    y1, y2 = _ring_points(p, rho, t)
    values, errors = d_cal_closed_many(p, beta, 1.0, y1.ravel(), y2.ravel(), tol, tolerances)
    weights = np.outer(rho_w, t_w).ravel() * 4.0 / p.p
    integral = float(np.dot(weights, np.abs(values)))
    error = float(np.dot(weights, errors))
    return RingCell(beta=beta, radius=radius, ring_integral=integral, error_estimate=error, method='profile')


def _ring_defining(p: PExponent, beta: float, radius: float, tol: float) -> RingCell:
    """Coarse product rule with Dcal from its defining integral."""
    rho, rho_w, t, t_w = _ring_nodes(p, radius, 1, FALLBACK_NODES)
    y1, y2 = _ring_points(p, rho, t)
    total = 0.0
    error = 0.0
    for (i, j), _ in np.ndenumerate(y1):
        res = d_cal_quad(p, beta, 1.0, PlanePoint(float(y1[i, j]), float(y2[i, j])), tol)
        weight = rho_w[i] * t_w[j] * 4.0 / p.p
        total += weight * abs(res.value)
        error += weight * res.error_estimate
    return RingCell(beta=beta, radius=radius, ring_integral=total, error_estimate=error, method='defining_integral')


def ring_integral(
    p: PExponent,
    beta: float,
    radius: float,
    tol: float = 1e-8,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    log_cb: LogCallback | None = None,
) -> RingCell:
    """One cell of the scan; failures are recorded on the cell rather than raised."""
    try:
        return _ring_closed(p, beta, radius, tol, tolerances)
    except ComputationError as exc:
        _emit(log_cb, f'ring beta={beta:g}, R={radius:g}: closed form failed ({exc}); using defining integral')
    try:
        return _ring_defining(p, beta, radius, max(tol, 1e-6))
    except ComputationError as exc:
        _emit(log_cb, f'ring beta={beta:g}, R={radius:g}: failed ({exc})')
        return RingCell(
            beta=beta,
            radius=radius,
            ring_integral=math.nan,
            error_estimate=math.inf,
            method='failed',
            failed=True,
        )


def ring_verdict(cells: Sequence[RingCell], tolerances: Tolerances = DEFAULT_TOLERANCES) -> BetaVerdict:
    """Decay exponent of the ring integrals in R; integrable when it is at most the threshold.

    With four or more radii the innermost one is dropped from the fit, since the
    decay law only holds away from the origin.
    """
    beta = cells[0].beta
    usable = [c for c in cells if not c.failed and c.ring_integral > 0 and math.isfinite(c.ring_integral)]
    failed = sum(1 for c in cells if c.failed)
    if len(usable) >= 4:
        usable = usable[1:]
    if len(usable) < 2:
        return BetaVerdict(beta=beta, decay_exponent=math.nan, integrable=False, failed_cells=failed)
    x = np.log([c.radius for c in usable])
    y = np.log([c.ring_integral for c in usable])
    slope = float(np.polyfit(x, y, 1)[0])
    return BetaVerdict(
        beta=beta,
        decay_exponent=slope,
        integrable=slope <= tolerances.ring_decay_threshold,
        failed_cells=failed,
    )


def beta_scan(
    p: PExponent,
    betas: Sequence[float],
    radii: Sequence[float],
    tol: float = 1e-8,
    threads: int | str | None = 1,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    log_cb: LogCallback | None = None,
) -> BetaScan:
    """Ring integrals of |Dcal_beta(1: .)| for every (beta, R) and a verdict per beta."""
    betas = [float(b) for b in betas]
    radii = [float(r) for r in radii]
    _check_scan_grid(betas, radii)
    grid = [(beta, radius) for beta in betas for radius in radii]

    def run_cell(cell: tuple[float, float]) -> RingCell:
        result = ring_integral(p, cell[0], cell[1], tol, tolerances, log_cb)
        _emit(log_cb, f'ring beta={cell[0]:g}, R={cell[1]:g}: {result.ring_integral:.6e} ({result.method})')
        return result

    with WorkerMap(threads) as run:
        cells = run(run_cell, grid)
    scan = BetaScan(p=p.p, cells=cells)
    for beta in betas:
        scan.verdicts.append(ring_verdict([c for c in cells if c.beta == beta], tolerances))
    return scan
