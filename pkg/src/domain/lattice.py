from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateTermError, DomainError, EnumerationBudgetError
from .gen_bessel import jomega_many, jomega_normalized
from .models import (
    DEFAULT_TOLERANCES,
    EvalResult,
    LatticePoint,
    LatticeSum,
    PExponent,
    PlanePoint,
    QuadResult,
    SweepRecord,
    Tolerances,
)
from .quadrature import integrate_01_singular_batch
from .special_core import beta as beta_fn
from .special_core import gamma, gamma_value

STRICT = 'strict'
CLOSED = 'closed'

_INT64_LIMIT = 2 ** 63


def _integer_p(p: float, reach: int, s: float) -> int | None:
    """Integer exponent when every |m1|**q + |m2|**q and the limit fit in int64."""
    if p != math.floor(p):
        return None
    q = int(p)
    if q * math.log2(reach + 1) > 64 or 2 * (reach + 1) ** q >= _INT64_LIMIT or math.ceil(s) >= _INT64_LIMIT:
        return None
    return q


def _check_s(s: float) -> None:
    if not s > 0 or math.isinf(s):
        raise DomainError('error_s_nonpositive', f's={s!r}')


def _check_beta(beta: float) -> None:
    if not beta > -1:
        raise DomainError('error_beta_range', f'beta={beta!r}')


def _check_boundary(boundary: str) -> None:
    if boundary not in (STRICT, CLOSED):
        raise DomainError('error_boundary_mode', f'boundary={boundary!r}')


def _reach(p: PExponent, s: float, tolerances: Tolerances) -> int:
    # One unit of padding absorbs rounding in s ** (1/p).
    reach = int(math.ceil(s ** p.inv)) + 1
    points = (2 * reach + 1) ** 2
    if points > tolerances.enumeration_budget:
        raise EnumerationBudgetError(
            'error_enumeration_budget',
            f'{points} points > budget {tolerances.enumeration_budget}',
        )
    return reach


def _guard(s: float, tolerances: Tolerances) -> float:
    return tolerances.boundary_guard * max(1.0, s)


def _integer_heights(q: int, limits: np.ndarray) -> np.ndarray:
    """Largest k >= 0 with k**q <= limit per entry, -1 where limit < 0 (exact)."""
    safe = np.maximum(limits, 0)
    k = np.floor(safe.astype(float) ** (1.0 / q)).astype(np.int64)
    for _ in range(3):
        k = np.where((k + 1) ** q <= safe, k + 1, k)
        k = np.where(k ** q > safe, k - 1, k)
    return np.where(limits < 0, -1, k)


def _float_heights(p: float, limits: np.ndarray, strict: bool) -> np.ndarray:
    """Largest k >= 0 with k**p < limit (strict) or <= limit (closed), else -1."""

    def inside(k: np.ndarray) -> np.ndarray:
        v = np.power(k.astype(float), p)
        return v < limits if strict else v <= limits

    k = np.floor(np.maximum(limits, 0.0) ** (1.0 / p)).astype(np.int64)
    for _ in range(3):
        k = np.where(inside(k + 1), k + 1, k)
        k = np.where((k >= 0) & ~inside(np.maximum(k, 0)), k - 1, k)
    return np.where(inside(np.zeros_like(k)), k, -1)


def column_heights(
    p: PExponent,
    s: float,
    boundary: str = STRICT,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[np.ndarray, np.ndarray]:
    """Per column m1, the largest |m2| inside the p-circle (-1 for empty columns)."""
    _check_s(s)
    _check_boundary(boundary)
    reach = _reach(p, s, tolerances)
    m1 = np.arange(-reach, reach + 1, dtype=np.int64)
    q = _integer_p(p.p, reach, s)
    if q is not None:
        # |m|_p**p is an integer, so "< s" is "<= ceil(s) - 1" and "<= s" is "<= floor(s)".
        top = math.ceil(s) - 1 if boundary == STRICT else math.floor(s)
        limits = top - np.abs(m1) ** q
        return m1, _integer_heights(q, limits)
    guard = _guard(s, tolerances)
    cut = s - guard if boundary == STRICT else s + guard
    limits = cut - np.power(np.abs(m1).astype(float), p.p)
    return m1, _float_heights(p.p, limits, boundary == STRICT)


def count_lattice(
    p: PExponent,
    s: float,
    boundary: str = STRICT,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> int:
    _, heights = column_heights(p, s, boundary, tolerances)
    filled = heights[heights >= 0]
    return int(np.sum(2 * filled + 1))


def error_term(p: PExponent, r: float, tolerances: Tolerances = DEFAULT_TOLERANCES) -> SweepRecord:
    if not r > 0:
        raise DomainError('error_r_nonpositive', f'r={r!r}')
    count = count_lattice(p, r ** p.p, STRICT, tolerances)
    area = p.area_const * r * r
    return SweepRecord(p=p.p, r=r, count=count, area=area, error=count - area)


def lattice_points(
    p: PExponent,
    s: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Points of the closed guard-banded p-disc: m1, m2, |m|_p**p and a boundary flag.

    Points flagged as boundary sit within the guard band of s (exactly on it for
    integer p) and are outside the strict disc.
    """
    m1_cols, heights = column_heights(p, s, CLOSED, tolerances)
    keep = heights >= 0
    m1_cols, heights = m1_cols[keep], heights[keep]
    m1 = np.repeat(m1_cols, 2 * heights + 1)
    offsets = np.concatenate([np.arange(-h, h + 1) for h in heights]) if len(heights) else np.zeros(0, np.int64)
    m2 = offsets.astype(np.int64)
    q = _integer_p(p.p, _reach(p, s, tolerances), s)
    if q is not None:
        values = (np.abs(m1) ** q + np.abs(m2) ** q).astype(float)
        on_boundary = values >= s
    else:
        values = np.power(np.abs(m1).astype(float), p.p) + np.power(np.abs(m2).astype(float), p.p)
        on_boundary = np.abs(values - s) <= _guard(s, tolerances)
    return m1, m2, values, on_boundary


def d_sum(
    p: PExponent,
    beta: float,
    s: float,
    x: PlanePoint,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> LatticeSum:
    """(1 / Gamma(beta + 1)) * sum over |m|_p**p < s of (s - |m|_p**p)**beta e(x.m)."""
    _check_beta(beta)
    _check_s(s)
    m1, m2, values, on_boundary = lattice_points(p, s, tolerances)
    if beta < 0 and bool(np.any(on_boundary)):
        index = int(np.argmax(on_boundary))
        hit = LatticePoint(int(m1[index]), int(m2[index]))
        raise DegenerateTermError(
            'error_degenerate_term',
            f'm=({hit.m1}, {hit.m2}) has |m|_p**p={hit.p_norm_pow(p.p)!r} on the boundary s={s!r}, beta={beta!r}',
        )
    inside = ~on_boundary
    # Log form keeps large beta from overflowing Gamma(beta + 1).
    weights = np.exp(beta * np.log(s - values[inside]) - gamma_value(beta + 1.0).log_value)
    phase = 2.0 * math.pi * (x.eta1 * m1[inside] + x.eta2 * m2[inside])
    terms = weights * np.exp(1j * phase)
    # numpy reduces pairwise in enumeration order.
    return LatticeSum(
        value=complex(np.sum(terms)),
        terms=int(inside.sum()),
        magnitude=float(np.sum(np.abs(terms))),
    )


def _d_cal_constant(p: PExponent, beta: float, s: float) -> float:
    return s ** (beta + 2.0 * p.inv) * p.p ** (beta + 1.0) * p.gamma_inv_p ** 2


def d_cal_closed(
    p: PExponent,
    beta: float,
    s: float,
    x: PlanePoint,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EvalResult:
    """Closed form s**(beta+2/p) p**(beta+1) Gamma(1/p)**2 J_{beta+1}(eta) / |eta|_p**(beta+1).

    eta = 2 pi s**(1/p) x; the normalized Bessel factor is continuous at x = 0.
    """
    _check_beta(beta)
    _check_s(s)
    const = _d_cal_constant(p, beta, s)
    eta = x.scaled(2.0 * math.pi * s ** p.inv)
    res = jomega_normalized(p, beta + 1.0, eta, tol / const, tolerances)
    return EvalResult(const * res.value, const * res.error_estimate, res.method, res.terms)


def d_cal_closed_many(
    p: PExponent,
    beta: float,
    s: float,
    x1: np.ndarray,
    x2: np.ndarray,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[np.ndarray, np.ndarray]:
    _check_beta(beta)
    _check_s(s)
    const = _d_cal_constant(p, beta, s)
    scale = 2.0 * math.pi * s ** p.inv
    values, errors = jomega_many(
        p, beta + 1.0, scale * np.asarray(x1, dtype=float), scale * np.asarray(x2, dtype=float),
        tol / const, tolerances,
    )
    return const * values, const * errors


def d_cal_quad(
    p: PExponent,
    beta: float,
    s: float,
    x: PlanePoint,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
) -> QuadResult:
    """The defining integral of the continuous counterpart, by quadrature.

    With xi = rho (+-t**(1/p), +-(1-t)**(1/p)) per quadrant the area element is
    (rho / p) (t (1-t))**(1/p-1) d rho dt; then rho = (s u)**(1/p) gives

        s**(beta+2/p) / (p**2 Gamma(beta+1))
            * int_0^1 u**(2/p-1) (1-u)**beta [int_0^1 E(u, t) (t (1-t))**(1/p-1) dt] du

    where E sums exp(2 pi i x.xi) over the four quadrants.  The sines cancel in
    that sum, so E = 4 cos(2 pi x1 xi1) cos(2 pi x2 xi2) is real.
    """
    _check_beta(beta)
    _check_s(s)
    inv = p.inv
    const = s ** (beta + 2.0 * inv) / (p.p ** 2 * gamma(beta + 1.0))
    w1, w2 = 2.0 * math.pi * x.eta1, 2.0 * math.pi * x.eta2
    inner_tol = 0.25 * tol / const
    inner_err = [0.0]

    def outer(u: np.ndarray, uc: np.ndarray) -> np.ndarray:
        rho = ((s * u) ** inv)[:, np.newaxis]

        def quadrant_sum(t: np.ndarray, tc: np.ndarray) -> np.ndarray:
            a = w1 * rho * t ** inv
            b = w2 * rho * tc ** inv
            return 4.0 * np.cos(a) * np.cos(b)

        res = integrate_01_singular_batch(quadrant_sum, inv - 1.0, inv - 1.0, tol=inner_tol)
        inner_err[0] = max(inner_err[0], float(res.error_estimates.max(initial=0.0)))
        return res.values

    res = integrate_01_singular_batch(outer, 2.0 * inv - 1.0, beta, tol=0.5 * tol / const)
    value = const * float(res.values[0])
    mass = beta_fn(2.0 * inv, beta + 1.0)
    error = const * (float(res.error_estimates[0]) + mass * inner_err[0])
    return QuadResult(value=value, error_estimate=error, evaluations=res.evaluations)


def scaling_check(
    p: PExponent,
    beta: float,
    s: float,
    x: PlanePoint,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """|D(s: x) - s**(beta+2/p) D(1: s**(1/p) x)| with both sides in closed form."""
    left = d_cal_closed(p, beta, s, x, tolerances=tolerances).value
    right = d_cal_closed(p, beta, 1.0, x.scaled(s ** p.inv), tolerances=tolerances).value
    return abs(left - s ** (beta + 2.0 * p.inv) * right)


def _factorize(n: int) -> dict[int, int]:
    factors: dict[int, int] = {}
    while n % 2 == 0:
        factors[2] = factors.get(2, 0) + 1
        n //= 2
    d = 3
    while d * d <= n:
        while n % d == 0:
            factors[d] = factors.get(d, 0) + 1
            n //= d
        d += 2
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def two_squares_count(n: int) -> int:
    """#{m in Z^2 : m1**2 + m2**2 = n} = 4 (d1(n) - d3(n)), from the factorization."""
    n = int(n)
    if n < 1:
        raise DomainError('error_two_squares_domain', f'n={n!r}')
    count = 4
    for prime, exponent in _factorize(n).items():
        if prime % 4 == 1:
            count *= exponent + 1
        elif prime % 4 == 3 and exponent % 2:
            return 0
    return count


def two_squares_count_enumerated(n: int) -> int:
    n = int(n)
    if n < 1 or n > 10 ** 6:
        raise DomainError('error_two_squares_domain', f'n={n!r}')
    count = 0
    for a in range(-math.isqrt(n), math.isqrt(n) + 1):
        rem = n - a * a
        b = math.isqrt(rem)
        if b * b == rem:
            count += 1 if b == 0 else 2
    return count
