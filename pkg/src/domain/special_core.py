"""Scalar special functions: gamma, log-gamma, beta and the classical Bessel J.

Gamma uses the Lanczos approximation with the lanczos13m53 coefficient set
(g = 6.024680040776729583740234375, 13 terms, exp(g)-scaled rational form as
published in Boost and cephes):

    Gamma(x) = L(x) * ((x + g - 1/2) / e) ** (x - 1/2)

with L(x) = N(x) / D(x), where D(x) = x (x + 1) ... (x + 11) is expanded into
_LANCZOS_DEN.  Arguments below 1 go through Gamma(x) = Gamma(x + 1) / x.
"""

from __future__ import annotations

import math
from typing import overload

import numpy as np
from mpmath import mp

from .errors import DomainError, GammaOverflowError
from .models import DEFAULT_TOLERANCES, GammaValue, Tolerances


LANCZOS_G = 6.024680040776729583740234375

# Highest power first.
_LANCZOS_NUM = np.array([
    0.006061842346248906525783753964555936883222,
    0.5098416655656676188125178644804694509993,
    19.51992788247617482847860966235652136208,
    449.9445569063168119446858607650988409623,
    6955.999602515376140356310115515198987526,
    75999.29304014542649875303443598909137092,
    601859.6171681098786670226533699352302507,
    3481712.15498064590882071018964774556468,
    14605578.08768506808414169982791359218571,
    43338889.32467613834773723740590533316085,
    86363131.28813859145546927288977868422342,
    103794043.1163445451906271053616070238554,
    56906521.91347156388090791033559122686859,
])
_LANCZOS_DEN = np.array([
    1.0, 66.0, 1925.0, 32670.0, 357423.0, 2637558.0, 13339535.0,
    45995730.0, 105258076.0, 150917976.0, 120543840.0, 39916800.0, 0.0,
])

# Largest x with a finite double Gamma(x).
GAMMA_MAX_ARG = 171.6243769563027

_FACTORIAL_LIMIT = 171


def _lanczos_ratio(x: np.ndarray) -> np.ndarray:
    small = x <= 1.0
    safe = np.where(small, 1.0, x)
    # In powers of 1/x for x > 1 so x**12 never overflows.
    y = 1.0 / safe
    large_val = np.polyval(_LANCZOS_NUM[::-1], y) / np.polyval(_LANCZOS_DEN[::-1], y)
    small_val = np.polyval(_LANCZOS_NUM, np.where(small, x, 1.0)) / np.polyval(
        _LANCZOS_DEN, np.where(small, x, 1.0)
    )
    return np.where(small, small_val, large_val)


def _check_positive(name: str, value: float) -> None:
    if not (value > 0) or math.isnan(value):
        raise DomainError('error_gamma_domain', f'{name}={value!r}')


def gamma(x: float) -> float:
    x = float(x)
    _check_positive('x', x)
    if x > GAMMA_MAX_ARG:
        raise GammaOverflowError('error_gamma_overflow', f'x={x!r}')
    if x == math.floor(x) and x <= _FACTORIAL_LIMIT:
        return float(math.factorial(int(x) - 1))
    if x < 1.0:
        return gamma(x + 1.0) / x
    zgh = x + LANCZOS_G - 0.5
    ratio = float(_lanczos_ratio(np.array([x]))[0])
    # Split power so zgh ** (x - 1/2) cannot overflow before the division.
    half = zgh ** ((x - 0.5) / 2.0)
    value = ratio * (half / math.exp(x - 0.5)) * half
    if not math.isfinite(value):
        raise GammaOverflowError('error_gamma_overflow', f'x={x!r}')
    return value


@overload
def log_gamma(x: float) -> float: ...
@overload
def log_gamma(x: np.ndarray) -> np.ndarray: ...


def log_gamma(x):
    """Natural log of Gamma for positive x; accepts scalars and numpy arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError('error_gamma_domain', f'x={x!r}')
    shift = arr < 1.0
    z = np.where(shift, arr + 1.0, arr)
    zgh = z + LANCZOS_G - 0.5
    out = np.log(_lanczos_ratio(z)) + (z - 0.5) * (np.log(zgh) - 1.0)
    out = np.where(shift, out - np.log(arr), out)
    if np.ndim(x) == 0:
        return float(out)
    return out


def gamma_value(x: float) -> GammaValue:
    x = float(x)
    log_value = log_gamma(x)
    try:
        value = gamma(x)
    except GammaOverflowError:
        value = math.inf
    return GammaValue(value=value, log_value=log_value)


def beta(a: float, b: float) -> float:
    a, b = float(a), float(b)
    _check_positive('a', a)
    _check_positive('b', b)
    return math.exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b))


def bessel_crossover(alpha: float, tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    return max(tolerances.bessel_crossover, alpha * alpha / 4.0)


def _bessel_series(alpha: float, s: float) -> float:
    # Terms grow like exp(s) before cancelling, so the working precision grows with s.
    prec = 96 + int(1.5 * s)
    x = mp.fdiv(mp.fmul(s, s, prec=prec), 4, prec=prec)
    term = mp.mpf(1)
    total = mp.mpf(1)
    threshold = mp.mpf('1e-20')
    k = 0
    while True:
        k += 1
        denominator = mp.fmul(k, mp.fadd(alpha, k, prec=prec), prec=prec)
        term = mp.fneg(mp.fdiv(mp.fmul(term, x, prec=prec), denominator, prec=prec))
        total = mp.fadd(total, term, prec=prec)
        if k * k > x and abs(term) <= threshold * abs(total):
            break
    prefactor = math.exp(alpha * math.log(s / 2.0) - log_gamma(alpha + 1.0))
    return prefactor * float(total)


def _bessel_asymptotic(alpha: float, s: float) -> float:
    mu = 4.0 * alpha * alpha
    p_terms = [1.0]
    q_terms: list[float] = []
    term = 1.0
    previous = math.inf
    k = 0
    while k < 200:
        k += 1
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * s)
        size = abs(term)
        if size == 0.0:
            break
        if size > previous and (2 * k - 1) ** 2 > mu:
            break
        previous = size
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p_terms.append(sign * term)
        else:
            q_terms.append(sign * term)
        if size < 1e-17:
            break
    p_sum = math.fsum(p_terms)
    q_sum = math.fsum(q_terms)
    chi = s - (2.0 * alpha + 1.0) * math.pi / 4.0
    return math.sqrt(2.0 / (math.pi * s)) * (p_sum * math.cos(chi) - q_sum * math.sin(chi))


def bessel_j(alpha: float, s: float, tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Classical J_alpha(s) for alpha >= 0 and s >= 0.

    Power series (extended-precision mpmath accumulation) up to the crossover, Hankel
    asymptotic expansion truncated at its smallest term beyond it.
    """
    alpha, s = float(alpha), float(s)
    if alpha < 0 or s < 0 or math.isnan(alpha) or math.isnan(s):
        raise DomainError('error_bessel_domain', f'alpha={alpha!r}, s={s!r}')
    if s == 0.0:
        return 1.0 if alpha == 0.0 else 0.0
    if s <= bessel_crossover(alpha, tolerances):
        return _bessel_series(alpha, s)
    return _bessel_asymptotic(alpha, s)


def bessel_j_many(alpha: float, s: np.ndarray, tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    values = np.asarray(s, dtype=float)
    return np.array([bessel_j(alpha, v, tolerances) for v in values.ravel()]).reshape(values.shape)
