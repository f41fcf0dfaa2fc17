"""Series identities for the weighted lattice sums and the p-circle error term.

The lattice/continuous difference is

    D(s: x) - Dcal(s: x) = C * sum_{n != 0} J_{beta+1}(eta_n) / |eta_n|_p**(beta+1),
    C = s**(beta+2/p) p**(beta+1) Gamma(1/p)**2,   eta_n = 2 pi s**(1/p) (x - n),

summed over expanding sup-norm shells 0 < max(|n1|, |n2|) <= cutoff.  Within a
shell the terms are reduced in lexicographic order of (n1, n2), so the result
does not depend on how the term evaluation was batched.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from domain import (
    DEFAULT_TOLERANCES,
    DomainError,
    EvalResult,
    IdentityReport,
    PExponent,
    PlanePoint,
    PreconditionViolation,
    Tolerances,
    VerificationFailure,
)
from domain.gen_bessel import jomega_many, jomega_normalized, kratzel_j
from domain.lattice import d_cal_closed, d_sum, error_term, two_squares_count
from domain.special_core import bessel_j, bessel_j_many, gamma

LogCallback = Callable[[str], None]

# Share of the tolerance given to each normalized Bessel value.
_TERM_TOL_SHARE = 0.1
PATH_GAP_LIMIT = 1e-9


def _emit(log_cb: LogCallback | None, message: str) -> None:
    if log_cb:
        log_cb(message)


def _check_torus(x: PlanePoint) -> None:
    if not x.in_torus():
        raise PreconditionViolation('error_x_outside_torus', f'x=({x.eta1!r}, {x.eta2!r})')


def _check_cutoff(cutoff: int) -> None:
    if int(cutoff) < 1:
        raise DomainError('error_cutoff', f'cutoff={cutoff!r}')


def shell_indices(cutoff: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """n1, n2 and shell number of every n != 0 with max(|n1|, |n2|) <= cutoff.

    Ordered by shell, then lexicographically by (n1, n2).
    """
    _check_cutoff(cutoff)
    axis = np.arange(-cutoff, cutoff + 1, dtype=np.int64)
    n1, n2 = np.meshgrid(axis, axis, indexing='ij')
    n1, n2 = n1.ravel(), n2.ravel()
    shell = np.maximum(np.abs(n1), np.abs(n2))
    keep = shell > 0
    order = np.argsort(shell[keep], kind='stable')
    return n1[keep][order], n2[keep][order], shell[keep][order]


def _folded(d1: np.ndarray, d2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unique (min, max) of |d| per term plus the map back to the terms.

    The summands are even in each coordinate and symmetric under swapping them.
    """
    a, b = np.abs(d1), np.abs(d2)
    keys = np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)
    unique, inverse = np.unique(keys, axis=0, return_inverse=True)
    return unique, np.asarray(inverse).ravel()


def theorem_constant(p: PExponent, beta: float, s: float) -> float:
    return s ** (beta + 2.0 * p.inv) * p.p ** (beta + 1.0) * p.gamma_inv_p ** 2


def _check_theorem_args(beta: float, s: float) -> None:
    if not beta > -1:
        raise DomainError('error_beta_range', f'beta={beta!r}')
    if not s > 0 or math.isinf(s):
        raise DomainError('error_s_nonpositive', f's={s!r}')


def theorem_terms(
    p: PExponent,
    beta: float,
    s: float,
    x: PlanePoint,
    cutoff: int,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Shell-ordered n1, n2, shell and the series term of each n."""
    _check_theorem_args(beta, s)
    _check_torus(x)
    n1, n2, shell = shell_indices(cutoff)
    const = theorem_constant(p, beta, s)
    scale = 2.0 * math.pi * s ** p.inv
    unique, inverse = _folded(x.eta1 - n1, x.eta2 - n2)
    values, _ = jomega_many(
        p,
        beta + 1.0,
        scale * unique[:, 0],
        scale * unique[:, 1],
        _TERM_TOL_SHARE * tol / const,
        tolerances,
    )
    return n1, n2, shell, const * values[inverse]


def theorem_term(
    p: PExponent,
    beta: float,
    s: float,
    x: PlanePoint,
    n: tuple[int, int],
    tol: float = 1e-11,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """One term of the series, evaluated directly rather than from the profile table."""
    _check_theorem_args(beta, s)
    const = theorem_constant(p, beta, s)
    eta = PlanePoint(x.eta1 - n[0], x.eta2 - n[1]).scaled(2.0 * math.pi * s ** p.inv)
    return const * jomega_normalized(p, beta + 1.0, eta, tol / const, tolerances).value


def _shell_report(
    shell: np.ndarray,
    terms: np.ndarray,
    cutoff: int,
    log_cb: LogCallback | None,
) -> IdentityReport:
    """Partial sums per shell and the geometric tail extrapolation."""
    bounds = np.searchsorted(shell, np.arange(1, cutoff + 2))
    shell_sums: list[float] = []
    magnitudes: list[float] = []
    trace: list[tuple[int, float]] = []
    for k in range(1, cutoff + 1):
        chunk = terms[bounds[k - 1]:bounds[k]]
        shell_sums.append(math.fsum(chunk))
        magnitudes.append(math.fsum(np.abs(chunk)))
        trace.append((k, math.fsum(shell_sums)))
        if k % 10 == 0:
            _emit(log_cb, f'shell {k}: partial={trace[-1][1]:.12g}, |shell|={magnitudes[-1]:.3e}')
    if cutoff < 3:
        tail = magnitudes[-1]
    else:
        last, before = magnitudes[-1], magnitudes[-3]
        if before == 0.0:
            q = 0.0 if last == 0.0 else math.inf
        else:
            q = math.sqrt(last / before)
        tail = last * q / (1.0 - q) if q < 1.0 else math.inf
    rhs = trace[-1][1]
    return IdentityReport(
        lhs=math.nan,
        rhs_truncated=rhs,
        tail_bound=tail,
        residual=math.nan,
        cutoff=cutoff,
        trace=trace,
        shell_magnitudes=magnitudes,
        terms=int(terms.size),
    )


def theorem_series_rhs(
    p: PExponent,
    beta: float,
    s: float,
    x: PlanePoint,
    cutoff: int,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    log_cb: LogCallback | None = None,
) -> IdentityReport:
    """Truncated right-hand side only; ``lhs`` and ``residual`` stay NaN.

    ``tail_bound`` is a heuristic: the last three shell magnitudes extrapolated
    as a geometric series.
    """
    _emit(log_cb, f'series: p={p.p:g}, beta={beta:g}, s={s:g}, x={x.as_tuple()}, cutoff={cutoff}')
    _, _, shell, terms = theorem_terms(p, beta, s, x, cutoff, tol, tolerances)
    return _shell_report(shell, terms, cutoff, log_cb)


def lattice_difference(
    p: PExponent,
    beta: float,
    s: float,
    x: PlanePoint,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """D(s: x) - Dcal(s: x), the left-hand side of the series identity."""
    lattice = d_sum(p, beta, s, x, tolerances)
    continuous = d_cal_closed(p, beta, s, x, tol, tolerances)
    return lattice.value.real - continuous.value


def theorem_residual(
    p: PExponent,
    beta: float,
    s: float,
    x: PlanePoint,
    cutoff: int,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    log_cb: LogCallback | None = None,
) -> IdentityReport:
    report = theorem_series_rhs(p, beta, s, x, cutoff, tol, tolerances, log_cb)
    report.lhs = lattice_difference(p, beta, s, x, tol, tolerances)
    report.residual = report.lhs - report.rhs_truncated
    _emit(log_cb, f'lhs={report.lhs:.12g}, residual={report.residual:.3e}, tail={report.tail_bound:.3e}')
    return report


# --- the circle case through classical Bessel functions -------------------------


def kn_term(beta: float, s: float, x: PlanePoint, n: tuple[int, int]) -> float:
    """s**(beta+1) 2**(beta+1) pi J_{beta+1}(z) / z**(beta+1) with z = 2 pi sqrt(s) |x - n|."""
    z = 2.0 * math.pi * math.sqrt(s) * math.hypot(x.eta1 - n[0], x.eta2 - n[1])
    const = s ** (beta + 1.0) * 2.0 ** (beta + 1.0) * math.pi
    if z == 0.0:
        return const / (2.0 ** (beta + 1.0) * gamma(beta + 2.0))
    return const * bessel_j(beta + 1.0, z) / z ** (beta + 1.0)


def kn_series_check(
    beta: float,
    s: float,
    x: PlanePoint,
    cutoff: int,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    log_cb: LogCallback | None = None,
) -> IdentityReport:
    """The p = 2 series with classical J, checked term by term against the general series.

    ``path_gap`` is the largest term difference between the two evaluations;
    above ``PATH_GAP_LIMIT`` the check fails.
    """
    if not beta > 0.5:
        raise PreconditionViolation('error_kn_beta', f'beta={beta!r}')
    _check_theorem_args(beta, s)
    _check_torus(x)
    p = PExponent.of(2.0)
    n1, n2, shell = shell_indices(cutoff)
    unique, inverse = _folded(x.eta1 - n1, x.eta2 - n2)
    const = s ** (beta + 1.0) * 2.0 ** (beta + 1.0) * math.pi
    z = 2.0 * math.pi * math.sqrt(s) * np.hypot(unique[:, 0], unique[:, 1])
    folded = bessel_j_many(beta + 1.0, z, tolerances) / z ** (beta + 1.0)
    classical = const * folded[inverse]

    _, _, _, general = theorem_terms(p, beta, s, x, cutoff, tol, tolerances)
    gap = float(np.max(np.abs(classical - general), initial=0.0))
    _emit(log_cb, f'classical vs general terms: max gap {gap:.3e}')
    if gap > PATH_GAP_LIMIT:
        raise VerificationFailure('error_path_mismatch', f'max term gap {gap:.3e} > {PATH_GAP_LIMIT:g}')

    report = _shell_report(shell, classical, cutoff, log_cb)
    report.lhs = lattice_difference(p, beta, s, x, tol, tolerances)
    report.residual = report.lhs - report.rhs_truncated
    report.path_gap = gap
    return report


# --- Hardy's identity -----------------------------------------------------------


def _check_hardy_radius(r: float, tolerances: Tolerances) -> None:
    if not r > 0 or math.isinf(r):
        raise DomainError('error_r_nonpositive', f'r={r!r}')
    r2 = r * r
    nearest = round(r2)
    if nearest >= 1 and abs(r2 - nearest) <= tolerances.boundary_guard * max(1.0, r2):
        raise PreconditionViolation('error_hardy_integer_square', f'r**2={r2!r}')


def _decade_checkpoints(n_max: int) -> list[int]:
    marks = []
    decade = 10
    while decade < n_max:
        marks.append(decade)
        decade *= 10
    marks.append(n_max)
    return marks


def hardy_partial(
    r: float,
    n_max: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    log_cb: LogCallback | None = None,
) -> IdentityReport:
    """r * sum_{n <= n_max} R(n) / sqrt(n) * J_1(2 pi sqrt(n) r) against P_2(r).

    The trace holds the partial sums at 10, 100, ... and at n_max.  The tail
    bound is the heuristic fluctuation size n_max**(-1/4) / (pi sqrt(r)).
    """
    r = float(r)
    n_max = int(n_max)
    _check_hardy_radius(r, tolerances)
    if n_max < 1:
        raise DomainError('error_n_max', f'n_max={n_max!r}')
    lhs = error_term(PExponent.of(2.0), r, tolerances).error
    checkpoints = set(_decade_checkpoints(n_max))
    terms: list[float] = []
    trace: list[tuple[int, float]] = []
    for n in range(1, n_max + 1):
        count = two_squares_count(n)
        if count:
            root = math.sqrt(n)
            terms.append(r * count / root * bessel_j(1.0, 2.0 * math.pi * root * r, tolerances))
        if n in checkpoints:
            partial = math.fsum(terms)
            trace.append((n, partial))
            _emit(log_cb, f'hardy r={r:g}: n={n}, partial={partial:.12g}, residual={lhs - partial:.3e}')
    rhs = trace[-1][1]
    return IdentityReport(
        lhs=lhs,
        rhs_truncated=rhs,
        tail_bound=n_max ** -0.25 / (math.pi * math.sqrt(r)),
        residual=lhs - rhs,
        cutoff=n_max,
        trace=trace,
        terms=len(terms),
    )


def hardy_cosine_partial(r: float, n_max: int, tolerances: Tolerances = DEFAULT_TOLERANCES) -> EvalResult:
    """(1/pi) sqrt(r) sum_{n < n_max} R(n) n**(-3/4) cos(2 pi sqrt(n) r - 3 pi / 4)."""
    r = float(r)
    _check_hardy_radius(r, tolerances)
    if int(n_max) < 2:
        raise DomainError('error_n_max', f'n_max={n_max!r}')
    n = np.arange(1, int(n_max))
    counts = np.array([two_squares_count(int(k)) for k in n], dtype=float)
    terms = counts * n ** -0.75 * np.cos(2.0 * math.pi * np.sqrt(n) * r - 0.75 * math.pi)
    scale = math.sqrt(r) / math.pi
    return EvalResult(
        value=scale * math.fsum(terms),
        error_estimate=math.nan,
        method='cosine_series',
        terms=int(np.count_nonzero(counts)),
        tail=scale * float(abs(terms[-1])),
    )


# --- second main term for p > 2 -------------------------------------------------


def second_main_term(
    p: float,
    r: float,
    n_max: int,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    log_cb: LogCallback | None = None,
) -> EvalResult:
    """8 sqrt(pi) Gamma(1 + 1/p) sum_{n <= n_max} (r / (pi n)) J^(p)_{2/p}(2 pi n r).

    ``tail`` is the magnitude of the last term, a heuristic indicator only.
    """
    p, r, n_max = float(p), float(r), int(n_max)
    if not p > 2 or math.isinf(p):
        raise DomainError('error_smt_p', f'p={p!r}')
    if not r > 0:
        raise DomainError('error_r_nonpositive', f'r={r!r}')
    if n_max < 1:
        raise DomainError('error_n_max', f'n_max={n_max!r}')
    front = 8.0 * math.sqrt(math.pi) * gamma(1.0 + 1.0 / p)
    nu = 2.0 / p
    terms: list[float] = []
    error = 0.0
    for n in range(1, n_max + 1):
        weight = front * r / (math.pi * n)
        res = kratzel_j(p, nu, 2.0 * math.pi * n * r, tol / (weight * n_max))
        terms.append(weight * res.value)
        error += weight * res.error_estimate
    value = math.fsum(terms)
    _emit(log_cb, f'second main term p={p:g}, r={r:g}: {value:.12g} after {n_max} terms')
    return EvalResult(value=value, error_estimate=error, method='series', terms=n_max, tail=abs(terms[-1]))


def kratzel_remainder(
    p: float,
    r: float,
    n_max: int,
    tol: float = DEFAULT_TOLERANCES.quad_tol,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EvalResult:
    """P_p(r) minus the truncated second main term; diagnostic data only."""
    smt = second_main_term(p, r, n_max, tol)
    error = error_term(PExponent.of(p), r, tolerances).error
    return EvalResult(
        value=error - smt.value,
        error_estimate=smt.error_estimate,
        method='difference',
        terms=smt.terms,
        tail=smt.tail,
    )
