"""Deterministic quadrature on (0, 1) with endpoint singularities and on rectangles.

``integrate_01_singular`` is a nested tanh-sinh (double exponential) rule for

    integral_0^1 f(t) t**a (1 - t)**b dt,        a, b > -1.

Nodes t_k = 1 / (1 + exp(-pi sinh(u_k))) with u_k = k h, |u_k| <= 6; level l has
h = 2**-l and 12 * 2**l + 1 nodes, and each level adds only the odd nodes.  The
integrand receives ``(t, 1 - t)`` where the complement is formed without
cancellation, so factors like (1 - t)**(1/p) stay accurate next to t = 1.
For exponents near -1 (large p) the weight mass sits below the smallest node, so
such integrals are split at 1/2 and each half is mapped by t = v**(1/(a+1)) / 2.

``integrate_rect2d`` is an iterated adaptive Gauss-Kronrod (7, 15) rule that
bisects the panel with the largest error estimate.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NonConvergence
from .models import DEFAULT_TOLERANCES, QuadResult

Integrand01 = Callable[[np.ndarray, np.ndarray], np.ndarray]

_U_MAX = 6.0
_MIN_LEVEL = 3
_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny
# Endpoint exponents at or below this use the split change of variables.
_SPLIT_BELOW = -0.9


@dataclass(frozen=True)
class BatchQuadResult:
    values: np.ndarray
    error_estimates: np.ndarray
    evaluations: int


def _tanh_sinh_nodes(level: int, odd_only: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Nodes t, 1 - t, log of the jacobian and the node count for one level."""
    h = 2.0 ** -level
    n_half = int(round(_U_MAX / h))
    k = np.arange(-n_half, n_half + 1)
    if odd_only:
        k = k[k % 2 != 0]
    u = k * h
    z = 0.5 * math.pi * np.sinh(u)
    e = np.exp(-2.0 * np.abs(z))
    inv = 1.0 / (1.0 + e)
    big = inv
    little = e * inv
    t = np.where(z >= 0, big, little)
    tc = np.where(z >= 0, little, big)
    # (pi/4) cosh(u) sech(z)**2 with sech(z)**2 = 4 e / (1 + e)**2
    log_jac = math.log(math.pi) + np.log(np.cosh(u)) - 2.0 * np.abs(z) - 2.0 * np.log1p(e)
    return t, tc, log_jac, len(k)


_T_MIN = float(_tanh_sinh_nodes(0, odd_only=False)[1][-1])


def _check_exponents(left: float, right: float) -> None:
    if not left > -1.0 or not right > -1.0:
        raise DomainError('error_singular_exponent', f'left={left!r}, right={right!r}')


def _endpoint_tail(left: float, right: float, edge_values: np.ndarray) -> np.ndarray:
    """Mass of the weight beyond the outermost nodes, times the integrand size there."""
    t_min = _T_MIN
    tail = t_min ** (left + 1.0) / (left + 1.0) + t_min ** (right + 1.0) / (right + 1.0)
    return tail * edge_values


def _split_halves(f: Integrand01, left: float, right: float) -> Integrand01:
    """The same integral after t = v**(1/(left+1)) / 2 on (0, 1/2) and its mirror on (1/2, 1).

    With that change of variables t**a dt = (1 / (a+1)) 2**-(a+1) dv, so both halves
    become regular integrals in v and the endpoint mass is no longer lost below
    the smallest representable node.
    """
    c_left = 1.0 / (left + 1.0)
    c_right = 1.0 / (right + 1.0)
    scale_left = c_left / 2.0 ** (left + 1.0)
    scale_right = c_right / 2.0 ** (right + 1.0)

    def halves(v: np.ndarray, vc: np.ndarray) -> np.ndarray:
        t_left = np.maximum(0.5 * v ** c_left, _TINY)
        tc_right = np.maximum(0.5 * v ** c_right, _TINY)
        t = np.concatenate([t_left, 1.0 - tc_right])
        tc = np.concatenate([1.0 - t_left, tc_right])
        values = np.atleast_2d(np.asarray(f(t, tc), dtype=float))
        values = np.broadcast_to(values, (values.shape[0], t.size))
        n = v.size
        return (
            values[:, :n] * (scale_left * (1.0 - t_left) ** right)
            + values[:, n:] * (scale_right * (1.0 - tc_right) ** left)
        )

    return halves


def integrate_01_singular_batch(
    f: Integrand01,
    left: float,
    right: float,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    max_evaluations: int = DEFAULT_TOLERANCES.max_evaluations,
) -> BatchQuadResult:
    """Vectorized form: ``f(t, tc)`` returns shape (B, N) for N nodes.

    Every row must reach ``tol``; the level is shared by the batch.  Exponents at
    or below -0.9 go through the split change of variables.
    """
    _check_exponents(left, right)
    if min(left, right) <= _SPLIT_BELOW:
        return _tanh_sinh(_split_halves(f, left, right), 0.0, 0.0, tol, max_evaluations, cost=2)
    return _tanh_sinh(f, left, right, tol, max_evaluations, cost=1)


def _tanh_sinh(
    f: Integrand01,
    left: float,
    right: float,
    tol: float,
    max_evaluations: int,
    cost: int,
) -> BatchQuadResult:
    totals: np.ndarray | None = None
    abs_totals: np.ndarray | None = None
    previous: np.ndarray | None = None
    edge = None
    evaluations = 0
    level = 0
    while True:
        t, tc, log_jac, count = _tanh_sinh_nodes(level, odd_only=level > 0)
        h = 2.0 ** -level
        weights = np.exp(left * np.log(t) + right * np.log(tc) + log_jac)
        values = np.atleast_2d(np.asarray(f(t, tc), dtype=float))
        values = np.broadcast_to(values, (values.shape[0], count))
        terms = values * weights
        evaluations += cost * count
        if totals is None:
            totals = h * terms.sum(axis=1)
            abs_totals = h * np.abs(terms).sum(axis=1)
            edge = np.maximum(np.abs(values[:, 0]), np.abs(values[:, -1]))
        else:
            totals = 0.5 * totals + h * terms.sum(axis=1)
            abs_totals = 0.5 * abs_totals + h * np.abs(terms).sum(axis=1)
        if not np.all(np.isfinite(totals)):
            raise NonConvergence('error_quad_nonfinite', f'level={level}')
        if previous is not None and level >= _MIN_LEVEL:
            errors = np.abs(totals - previous) + _endpoint_tail(left, right, edge)
            # Rounding floor: cancellation limits what any level can reach.
            reachable = np.maximum(tol, 64.0 * _EPS * abs_totals)
            if np.all(errors <= reachable):
                return BatchQuadResult(values=totals, error_estimates=errors, evaluations=evaluations)
            next_count = cost * (12 * 2 ** (level + 1) + 1)
            if evaluations + next_count > max_evaluations:
                worst = int(np.argmax(errors))
                raise NonConvergence(
                    'error_quad_nonconvergence',
                    f'level={level}, error={errors[worst]:.3e}, tol={tol:.1e}',
                    value=float(totals[worst]),
                    error_estimate=float(errors[worst]),
                )
        previous = totals.copy()
        level += 1


def integrate_01_singular(
    f: Integrand01,
    sing_exponent_left: float,
    sing_exponent_right: float,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    max_evaluations: int = DEFAULT_TOLERANCES.max_evaluations,
) -> QuadResult:
    batch = integrate_01_singular_batch(
        lambda t, tc: np.asarray(f(t, tc), dtype=float)[np.newaxis, ...],
        sing_exponent_left,
        sing_exponent_right,
        tol=tol,
        max_evaluations=max_evaluations,
    )
    return QuadResult(
        value=float(batch.values[0]),
        error_estimate=float(batch.error_estimates[0]),
        evaluations=batch.evaluations,
    )


# Gauss-Kronrod (7, 15) on [-1, 1], QUADPACK qk15 values.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_GK_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GK_GAUSS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes: x[1], x[3], x[5], x[7].
for _i, _w in zip((1, 3, 5), _WG[:3]):
    _GK_GAUSS[_i] = _w
    _GK_GAUSS[14 - _i] = _w
_GK_GAUSS[7] = _WG[3]


def _gk15(g: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    values = np.asarray(g(mid + half * _GK_NODES), dtype=float)
    values = np.broadcast_to(values, _GK_NODES.shape)
    kronrod = half * float(np.dot(_GK_KRONROD, values))
    gauss = half * float(np.dot(_GK_GAUSS, values))
    return kronrod, abs(kronrod - gauss)


def integrate_interval(
    g: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    max_evaluations: int = DEFAULT_TOLERANCES.max_evaluations,
) -> QuadResult:
    """Adaptive G7K15 on [a, b]; bisects the panel with the largest error."""
    if b == a:
        return QuadResult(0.0, 0.0, 0)
    value, err = _gk15(g, a, b)
    evaluations = 15
    heap: list[tuple[float, float, float, float]] = [(-err, a, b, value)]
    total_err = err
    while total_err > max(tol, 64.0 * _EPS * abs(value)):
        if evaluations + 30 > max_evaluations:
            raise NonConvergence(
                'error_quad_nonconvergence',
                f'panels={len(heap)}, error={total_err:.3e}, tol={tol:.1e}',
                value=value,
                error_estimate=total_err,
            )
        neg_err, lo, hi, part = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            raise NonConvergence(
                'error_quad_nonconvergence',
                f'panel [{lo!r}, {hi!r}] cannot be bisected',
                value=value,
                error_estimate=total_err,
            )
        left_val, left_err = _gk15(g, lo, mid)
        right_val, right_err = _gk15(g, mid, hi)
        evaluations += 30
        heapq.heappush(heap, (-left_err, lo, mid, left_val))
        heapq.heappush(heap, (-right_err, mid, hi, right_val))
        value = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
    return QuadResult(value=value, error_estimate=total_err, evaluations=evaluations)


def integrate_rect2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    max_evaluations: int = DEFAULT_TOLERANCES.max_evaluations,
) -> QuadResult:
    """Iterated adaptive rule over [a, b] x [c, d]; ``f(x, y)`` broadcasts."""
    (a, b), (c, d) = x_range, y_range
    width = max(b - a, 1e-300)
    inner_tol = 0.25 * tol / width
    counter = {'evaluations': 0, 'inner_error': 0.0}

    def slice_integral(xs: np.ndarray) -> np.ndarray:
        out = np.empty(len(xs))
        for i, x in enumerate(xs):
            budget = max_evaluations - counter['evaluations']
            res = integrate_interval(lambda ys, x=x: f(np.full_like(ys, x), ys), c, d, inner_tol, budget)
            counter['evaluations'] += res.evaluations
            counter['inner_error'] = max(counter['inner_error'], res.error_estimate)
            out[i] = res.value
        return out

    outer = integrate_interval(slice_integral, a, b, 0.5 * tol, max_evaluations)
    error = outer.error_estimate + width * counter['inner_error']
    return QuadResult(value=outer.value, error_estimate=error, evaluations=counter['evaluations'])
