"""Generalized Bessel functions attached to the p-norm.

J0p(eta)    = (2/p)**2 / Gamma(1/p)**2 * int_0^1 cos(eta1 t**(1/p)) cos(eta2 (1-t)**(1/p))
                                          * t**(1/p-1) (1-t)**(1/p-1) dt
J_omega(eta) = |eta|_p**omega / (p**(omega-1) Gamma(omega))
               * int_0^1 J0p(tau eta) tau (1 - tau**p)**(omega-1) dtau

Both have a quadrature path and an anti-diagonal power series.  Swapping the two
integrals of J_omega gives the form used for bulk evaluation:

    J_omega(eta) / |eta|_p**omega = K * int_0^1 w(t) (G(a + b) + G(a - b)) / 2 dt

with a = |eta1| t**(1/p), b = |eta2| (1-t)**(1/p), w the Beta weight,
K = (2/p)**2 / (Gamma(1/p)**2 p**(omega-1) Gamma(omega)) and

    G(c) = int_0^1 cos(c tau) tau (1 - tau**p)**(omega-1) dtau.

``OrderProfile`` tabulates G once per (p, omega) and interpolates it with a
quintic spline on a grid mirrored through c = 0 (G is even), which turns
thousands of J_omega evaluations into one batched quadrature over t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np
from scipy.interpolate import BSpline, make_interp_spline

from .errors import DomainError, NonConvergence, SeriesEnvelopeError
from .models import DEFAULT_TOLERANCES, EvalResult, PExponent, PlanePoint, Tolerances
from .quadrature import integrate_01_singular, integrate_01_singular_batch, integrate_interval
from .special_core import beta as beta_fn
from .special_core import gamma, log_gamma

_PROFILE_BLOCK = 128
_EVAL_CHUNK = 256
_STABLE_BLOCKS = 3


def _weight_constant(p: PExponent) -> float:
    return (2.0 / p.p) ** 2 / p.gamma_inv_p ** 2


def _normalized_constant(p: PExponent, omega: float) -> float:
    return _weight_constant(p) / (p.p ** (omega - 1.0) * gamma(omega))


def normalized_origin(p: PExponent, omega: float) -> float:
    """Limit of J_omega(eta) / |eta|_p**omega at eta = 0."""
    return p.p ** (-omega) * (2.0 / p.p) ** 2 / gamma(2.0 / p.p + omega)


def _check_omega(omega: float) -> None:
    if not omega >= 0 or math.isinf(omega):
        raise DomainError('error_omega_negative', f'omega={omega!r}')


def _check_tol(tol: float) -> None:
    if not tol > 0:
        raise DomainError('error_tol_nonpositive', f'tol={tol!r}')


# --- quadrature paths -------------------------------------------------------


def j0p_many(p: PExponent, eta1: np.ndarray, eta2: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """J0p on arrays of points; returns values and error estimates."""
    e1 = np.abs(np.asarray(eta1, dtype=float))[:, np.newaxis]
    e2 = np.abs(np.asarray(eta2, dtype=float))[:, np.newaxis]
    inv = p.inv
    const = _weight_constant(p)

    def integrand(t: np.ndarray, tc: np.ndarray) -> np.ndarray:
        return np.cos(e1 * t ** inv) * np.cos(e2 * tc ** inv)

    res = integrate_01_singular_batch(integrand, inv - 1.0, inv - 1.0, tol=tol / const)
    return const * res.values, const * res.error_estimates


def j0p_quad(p: PExponent, eta: PlanePoint, tol: float = DEFAULT_TOLERANCES.quad_tol) -> EvalResult:
    _check_tol(tol)
    inv = p.inv
    const = _weight_constant(p)
    e1, e2 = abs(eta.eta1), abs(eta.eta2)
    res = integrate_01_singular(
        lambda t, tc: np.cos(e1 * t ** inv) * np.cos(e2 * tc ** inv),
        inv - 1.0,
        inv - 1.0,
        tol=tol / const,
    )
    return EvalResult(const * res.value, const * res.error_estimate, 'quadrature', res.evaluations)


def _profile_values(p: float, omega: float, c: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """G(c) = int_0^1 cos(c tau) tau (1 - tau**p)**(omega-1) dtau, batched over c.

    The weight tau (1 - tau)**(omega-1) goes to the integrator; the remaining
    factor ((1 - tau**p) / (1 - tau))**(omega-1) is smooth and tends to p**(omega-1).
    """
    c_col = np.asarray(c, dtype=float)[:, np.newaxis]

    def integrand(t: np.ndarray, tc: np.ndarray) -> np.ndarray:
        small = t < 0.5
        log_t = np.empty_like(t)
        log_t[small] = np.log(t[small])
        log_t[~small] = np.log1p(-tc[~small])
        ratio = -np.expm1(p * log_t) / tc
        return np.cos(c_col * t) * ratio ** (omega - 1.0)

    res = integrate_01_singular_batch(integrand, 1.0, omega - 1.0, tol=tol)
    return res.values, res.error_estimates


def _normalized_quad(p: PExponent, omega: float, eta: PlanePoint, tol: float) -> EvalResult:
    inv = p.inv
    const = _normalized_constant(p, omega)
    weight_mass = beta_fn(inv, inv)
    outer_tol = 0.5 * tol / const
    inner_tol = 0.5 * tol / (const * weight_mass)
    e1, e2 = abs(eta.eta1), abs(eta.eta2)
    inner_err = [0.0]

    def outer(t: np.ndarray, tc: np.ndarray) -> np.ndarray:
        a = e1 * t ** inv
        b = e2 * tc ** inv
        c = np.concatenate([a + b, a - b])
        g, g_err = _profile_values(p.p, omega, c, inner_tol)
        inner_err[0] = max(inner_err[0], float(g_err.max(initial=0.0)))
        half = len(a)
        return 0.5 * (g[:half] + g[half:])

    res = integrate_01_singular(outer, inv - 1.0, inv - 1.0, tol=outer_tol)
    error = const * (res.error_estimate + weight_mass * inner_err[0])
    return EvalResult(const * res.value, error, 'quadrature', res.evaluations)


def jomega_quad(
    p: PExponent,
    omega: float,
    eta: PlanePoint,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
) -> EvalResult:
    _check_omega(omega)
    _check_tol(tol)
    if omega == 0:
        return j0p_quad(p, eta, tol)
    norm = eta.p_norm(p.p)
    if norm == 0.0:
        return EvalResult(0.0, 0.0, 'closed_form')
    scale = norm ** omega
    res = _normalized_quad(p, omega, eta, tol / scale)
    return EvalResult(scale * res.value, scale * res.error_estimate, res.method, res.terms)


# --- series paths -----------------------------------------------------------


@dataclass(frozen=True)
class _SeriesSum:
    value: float
    error_estimate: float
    blocks: int


def _series_blocks(p: float, omega: float, eta1: float, eta2: float, max_k: int) -> Iterator[np.ndarray]:
    """Signed terms of each anti-diagonal block k = m1 + m2 (without the prefactor)."""
    inv = 1.0 / p
    m = np.arange(max_k + 1)
    lg_odd = log_gamma((2.0 * m + 1.0) * inv)
    lg_fact = log_gamma(2.0 * m + 1.0)
    log1 = math.log(eta1) if eta1 > 0 else None
    log2 = math.log(eta2) if eta2 > 0 else None
    for k in range(max_k + 1):
        m1 = np.arange(k + 1)
        m2 = k - m1
        keep = np.ones(k + 1, dtype=bool)
        if log1 is None:
            keep &= m1 == 0
        if log2 is None:
            keep &= m2 == 0
        m1, m2 = m1[keep], m2[keep]
        if len(m1) == 0:
            yield np.zeros(0)
            continue
        logs = lg_odd[m1] + lg_odd[m2] - lg_fact[m1] - lg_fact[m2]
        if log1 is not None:
            logs = logs + 2.0 * m1 * log1
        if log2 is not None:
            logs = logs + 2.0 * m2 * log2
        logs = logs - log_gamma(2.0 * (k + 1) * inv + omega)
        sign = -1.0 if k % 2 else 1.0
        yield sign * np.exp(logs)


def _sum_series(
    p: float,
    omega: float,
    eta: PlanePoint,
    prefactor: float,
    max_k: int,
    tol: float,
    tolerances: Tolerances,
) -> _SeriesSum:
    if max_k < 1:
        raise DomainError('error_max_k', f'max_k={max_k!r}')
    if eta.sup_norm() > tolerances.series_envelope:
        raise SeriesEnvelopeError(
            'error_series_envelope',
            f'|eta|_inf={eta.sup_norm():.6g} > {tolerances.series_envelope:g}',
        )
    terms: list[float] = []
    quiet = 0
    blocks = 0
    last_block = math.inf
    for block in _series_blocks(p, omega, abs(eta.eta1), abs(eta.eta2), max_k):
        blocks += 1
        scaled = prefactor * block
        terms.extend(scaled.tolist())
        last_block = abs(math.fsum(scaled))
        running = abs(math.fsum(terms))
        quiet = quiet + 1 if last_block < tol * max(running, 1.0) else 0
        if quiet >= _STABLE_BLOCKS:
            value = math.fsum(terms)
            # Each term carries one rounding; cancellation exposes their sum.
            rounding = 4.0 * np.finfo(float).eps * math.fsum(abs(v) for v in terms)
            return _SeriesSum(value, last_block + rounding, blocks)
    raise NonConvergence(
        'error_series_nonconvergence',
        f'max_k={max_k}, last block={last_block:.3e}',
        value=math.fsum(terms),
        error_estimate=last_block,
    )


def j0p_series(
    p: PExponent,
    eta: PlanePoint,
    max_k: int = DEFAULT_TOLERANCES.series_max_k,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EvalResult:
    _check_tol(tol)
    res = _sum_series(p.p, 0.0, eta, _weight_constant(p), max_k, tol, tolerances)
    return EvalResult(res.value, res.error_estimate, 'series', res.blocks)


def jomega_series(
    p: PExponent,
    omega: float,
    eta: PlanePoint,
    max_k: int = DEFAULT_TOLERANCES.series_max_k,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EvalResult:
    _check_omega(omega)
    _check_tol(tol)
    if omega == 0:
        return j0p_series(p, eta, max_k, tol, tolerances)
    norm = eta.p_norm(p.p)
    if norm == 0.0:
        return EvalResult(0.0, 0.0, 'closed_form')
    scale = norm ** omega
    res = _normalized_series(p, omega, eta, max_k, tol / scale, tolerances)
    return EvalResult(scale * res.value, scale * res.error_estimate, 'series', res.terms)


def _normalized_series(
    p: PExponent,
    omega: float,
    eta: PlanePoint,
    max_k: int,
    tol: float,
    tolerances: Tolerances,
) -> EvalResult:
    prefactor = p.p ** (-omega) * _weight_constant(p)
    res = _sum_series(p.p, omega, eta, prefactor, max_k, tol, tolerances)
    return EvalResult(res.value, res.error_estimate, 'series', res.blocks)


def jomega_normalized(
    p: PExponent,
    omega: float,
    eta: PlanePoint,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EvalResult:
    """J_omega(eta) / |eta|_p**omega, continuous through eta = 0.

    The series is used inside its envelope when it reaches ``tol``; anything
    else goes through quadrature.
    """
    if not omega > 0:
        raise DomainError('error_omega_positive', f'omega={omega!r}')
    if eta.eta1 == 0.0 and eta.eta2 == 0.0:
        return EvalResult(normalized_origin(p, omega), 0.0, 'closed_form')
    if eta.sup_norm() <= tolerances.series_envelope:
        try:
            res = _normalized_series(p, omega, eta, tolerances.series_max_k, tol, tolerances)
        except NonConvergence:
            res = None
        if res is not None and res.error_estimate <= tol:
            return res
    return _normalized_quad(p, omega, eta, tol)


def jomega(
    p: PExponent,
    omega: float,
    eta: PlanePoint,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EvalResult:
    """J_omega(eta) by whichever path reaches ``tol``; omega = 0 is J0p."""
    _check_omega(omega)
    _check_tol(tol)
    if eta.sup_norm() <= tolerances.series_envelope:
        try:
            res = jomega_series(p, omega, eta, tolerances.series_max_k, tol, tolerances)
        except NonConvergence:
            res = None
        if res is not None and res.error_estimate <= tol:
            return res
    return jomega_quad(p, omega, eta, tol)


# --- tabulated order profile --------------------------------------------------


@dataclass(frozen=True)
class OrderProfile:
    """Spline of G on [0, c_max] for one (p, omega); immutable and shareable."""

    p: PExponent
    omega: float
    c_max: float
    spline: BSpline
    interpolation_error: float

    def g(self, c: np.ndarray) -> np.ndarray:
        c = np.abs(c)
        if c.size and float(c.max()) > self.c_max:
            raise DomainError('error_profile_range', f'c={float(c.max()):.6g} > {self.c_max:.6g}')
        return self.spline(c)

    def normalized_many(
        self,
        eta1: np.ndarray,
        eta2: np.ndarray,
        tol: float = DEFAULT_TOLERANCES.quad_tol,
    ) -> tuple[np.ndarray, np.ndarray]:
        """J_omega / |eta|_p**omega on arrays, chunked by magnitude."""
        e1 = np.abs(np.asarray(eta1, dtype=float)).ravel()
        e2 = np.abs(np.asarray(eta2, dtype=float)).ravel()
        inv = self.p.inv
        const = _normalized_constant(self.p, self.omega)
        floor = const * beta_fn(inv, inv) * self.interpolation_error
        values = np.empty(e1.size)
        errors = np.empty(e1.size)
        order = np.argsort(e1 + e2, kind='stable')
        for start in range(0, e1.size, _EVAL_CHUNK):
            idx = order[start:start + _EVAL_CHUNK]
            a_col = e1[idx][:, np.newaxis]
            b_col = e2[idx][:, np.newaxis]

            def integrand(t: np.ndarray, tc: np.ndarray) -> np.ndarray:
                a = a_col * t ** inv
                b = b_col * tc ** inv
                return 0.5 * (self.g(a + b) + self.g(a - b))

            res = integrate_01_singular_batch(integrand, inv - 1.0, inv - 1.0, tol=tol / const)
            values[idx] = const * res.values
            errors[idx] = const * res.error_estimates + floor
        return values.reshape(np.shape(eta1)), errors.reshape(np.shape(eta1))


@lru_cache(maxsize=32)
def _cached_profile(p: float, omega: float, c_cap: float, step: float, tol: float) -> OrderProfile:
    grid = np.arange(0.0, c_cap + 3.0 * step, step)
    values = np.empty_like(grid)
    for start in range(0, grid.size, _PROFILE_BLOCK):
        block = grid[start:start + _PROFILE_BLOCK]
        values[start:start + _PROFILE_BLOCK], _ = _profile_values(p, omega, block, tol)
    # Mirrored knots keep the even symmetry without boundary conditions at 0.
    spline = make_interp_spline(np.concatenate([-grid[:0:-1], grid]), np.concatenate([values[:0:-1], values]), k=5)
    # Midpoints of a spread of cells measure the interpolation error directly.
    probe_idx = np.unique(np.linspace(0, grid.size - 2, 17).astype(int))
    probes = grid[probe_idx] + 0.5 * step
    exact, _ = _profile_values(p, omega, probes, tol)
    error = float(np.max(np.abs(spline(probes) - exact))) + tol
    return OrderProfile(
        p=PExponent.of(p),
        omega=omega,
        c_max=float(grid[-1]),
        spline=spline,
        interpolation_error=error,
    )


def order_profile(
    p: PExponent,
    omega: float,
    c_max: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> OrderProfile:
    if not omega > 0:
        raise DomainError('error_omega_positive', f'omega={omega!r}')
    # Rounded up so nearby requests share one table.
    c_cap = 32.0 * math.ceil(max(c_max, 1.0) / 32.0)
    return _cached_profile(p.p, float(omega), c_cap, tolerances.profile_grid_step, 1e-12)


def jomega_many(
    p: PExponent,
    omega: float,
    eta1: np.ndarray,
    eta2: np.ndarray,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized J_omega on arrays through the tabulated profile."""
    e1 = np.asarray(eta1, dtype=float)
    e2 = np.asarray(eta2, dtype=float)
    c_max = float(np.max(np.abs(e1) + np.abs(e2), initial=0.0))
    profile = order_profile(p, omega, c_max, tolerances)
    return profile.normalized_many(e1, e2, tol)


# --- Kratzel's function and related transforms --------------------------------


def kratzel_j(p: float, nu: float, r: float, tol: float = DEFAULT_TOLERANCES.quad_tol) -> EvalResult:
    """Kratzel's J_nu^(p)(r), defined for p >= 1, nu > 1/p - 1 and r > 0."""
    p, nu, r = float(p), float(nu), float(r)
    if not p >= 1:
        raise DomainError('error_kratzel_p', f'p={p!r}')
    if not nu > 1.0 / p - 1.0:
        raise DomainError('error_kratzel_nu', f'nu={nu!r}, p={p!r}')
    if not r > 0:
        raise DomainError('error_kratzel_r', f'r={r!r}')
    _check_tol(tol)
    inv = 1.0 / p
    const = 2.0 / (math.sqrt(math.pi) * gamma(nu + 1.0 - inv)) * (r / 2.0) ** (p * nu / 2.0)
    # u = t**p moves the weight onto u**(1/p-1) (1-u)**(nu-1/p).
    res = integrate_01_singular(
        lambda u, uc: inv * np.cos(r * u ** inv),
        inv - 1.0,
        nu - inv,
        tol=tol / max(const, 1e-300),
    )
    return EvalResult(const * res.value, const * res.error_estimate, 'quadrature', res.evaluations)


def richards_j(p: PExponent, eta: PlanePoint, tol: float = DEFAULT_TOLERANCES.quad_tol) -> EvalResult:
    """Two-dimensional J_{2,p}: the boundary integral of exp(i x.xi) against xi1 dxi2 - xi2 dxi1."""
    scale = p.p * p.gamma_inv_p ** 2
    res = j0p_quad(p, eta, tol / scale)
    return EvalResult(scale * res.value, scale * res.error_estimate, res.method, res.terms)


def radial_transform(
    p: PExponent,
    phi: Callable[[np.ndarray], np.ndarray],
    xi: PlanePoint,
    support: float = 1.0,
    tol: float = 1e-8,
) -> EvalResult:
    """Fourier transform of the p-radial function phi(|y|_p) supported in |y|_p <= support.

    Evaluated as p Gamma(1/p)**2 int_0^support J0p(2 pi r xi) phi(r) r dr.
    """
    scale = p.p * p.gamma_inv_p ** 2
    inner_tol = 0.1 * tol / (scale * max(support, 1.0) ** 2)
    inner_err = [0.0]

    def radial(r: np.ndarray) -> np.ndarray:
        vals, errs = j0p_many(p, 2.0 * math.pi * r * xi.eta1, 2.0 * math.pi * r * xi.eta2, inner_tol)
        inner_err[0] = max(inner_err[0], float(errs.max(initial=0.0)))
        return vals * np.asarray(phi(r), dtype=float) * r

    res = integrate_interval(radial, 0.0, support, tol=0.5 * tol / scale)
    error = scale * (res.error_estimate + inner_err[0] * support ** 2)
    return EvalResult(scale * res.value, error, 'quadrature', res.evaluations)
