from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Mapping

from .errors import DomainError


@dataclass(frozen=True)
class Tolerances:
    """Numerical constants shared by the kernels, the CLI and the tests."""

    quad_tol: float = 1e-10
    max_evaluations: int = 2 ** 20
    boundary_guard: float = 1e-12
    enumeration_budget: int = 10 ** 9
    series_envelope: float = 30.0
    series_max_k: int = 400
    bessel_crossover: float = 25.0
    abs_floor: float = 1e-3
    window_ratio: float = 1.25
    ring_decay_threshold: float = -0.1
    profile_grid_step: float = 0.05

    def merged(self, overrides: Mapping[str, Any]) -> 'Tolerances':
        known = {f.name for f in fields(self)}
        values: dict[str, Any] = {}
        for key, raw in overrides.items():
            if key not in known:
                continue
            current = getattr(self, key)
            values[key] = int(raw) if isinstance(current, int) else float(raw)
        return replace(self, **values)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class GammaValue:
    value: float
    log_value: float


@dataclass(frozen=True)
class PExponent:
    p: float
    gamma_inv_p: float
    gamma_2_inv_p: float
    area_const: float

    @classmethod
    def of(cls, p: float) -> 'PExponent':
        # Local import keeps models importable without the kernels.
        from .special_core import gamma

        p = float(p)
        if not math.isfinite(p) or p <= 0:
            raise DomainError('error_p_nonpositive', f'p={p!r}')
        g1 = gamma(1.0 / p)
        g2 = gamma(2.0 / p)
        return cls(p=p, gamma_inv_p=g1, gamma_2_inv_p=g2, area_const=(2.0 / p) * g1 * g1 / g2)

    @property
    def inv(self) -> float:
        return 1.0 / self.p


@dataclass(frozen=True)
class PlanePoint:
    eta1: float
    eta2: float

    def p_norm(self, p: float) -> float:
        a, b = abs(self.eta1), abs(self.eta2)
        top = max(a, b)
        if top == 0.0:
            return 0.0
        # Scaled by the larger component so large p does not overflow.
        return top * ((a / top) ** p + (b / top) ** p) ** (1.0 / p)

    def sup_norm(self) -> float:
        return max(abs(self.eta1), abs(self.eta2))

    def scaled(self, factor: float) -> 'PlanePoint':
        return PlanePoint(self.eta1 * factor, self.eta2 * factor)

    def in_torus(self) -> bool:
        return all(-0.5 < c <= 0.5 for c in (self.eta1, self.eta2))

    def as_tuple(self) -> tuple[float, float]:
        return (self.eta1, self.eta2)


@dataclass(frozen=True)
class LatticePoint:
    m1: int
    m2: int

    def p_norm_pow(self, p: float) -> float:
        return abs(self.m1) ** p + abs(self.m2) ** p


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class EvalResult:
    value: float
    error_estimate: float
    method: str
    terms: int = 0
    tail: float = 0.0


@dataclass(frozen=True)
class LatticeSum:
    value: complex
    terms: int
    magnitude: float


@dataclass(frozen=True)
class SweepRecord:
    p: float
    r: float
    count: int
    area: float
    error: float


@dataclass
class IdentityReport:
    lhs: float
    rhs_truncated: float
    tail_bound: float
    residual: float
    cutoff: int
    trace: list[tuple[int, float]] = field(default_factory=list)
    shell_magnitudes: list[float] = field(default_factory=list)
    terms: int = 0
    path_gap: float = 0.0

    def passes(self, abs_floor: float) -> bool:
        # Shells that stop shrinking give an infinite tail bound, which never passes.
        if not math.isfinite(self.tail_bound):
            return False
        return abs(self.residual) <= max(abs_floor, 3.0 * self.tail_bound)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float
    window_max_slope: float
    n_samples: int
    omega_slope: float = float('nan')


@dataclass(frozen=True)
class RingCell:
    beta: float
    radius: float
    ring_integral: float
    error_estimate: float
    method: str
    failed: bool = False


@dataclass(frozen=True)
class BetaVerdict:
    beta: float
    decay_exponent: float
    integrable: bool
    failed_cells: int


@dataclass
class BetaScan:
    p: float
    cells: list[RingCell] = field(default_factory=list)
    verdicts: list[BetaVerdict] = field(default_factory=list)

    def verdict(self, beta: float) -> BetaVerdict:
        for item in self.verdicts:
            if item.beta == beta:
                return item
        raise KeyError(beta)


@dataclass
class RunConfig:
    command: str
    target: str = 'j0p'
    p: float = 2.0
    beta: float = 2.0
    s: float = 1.0
    x: tuple[float, float] = (0.0, 0.0)
    eta: tuple[float, float] = (0.0, 0.0)
    omega: float = 0.0
    nu: float = 0.0
    r: float = 1.0
    cutoff: int = 40
    n_max: int = 10_000
    r_min: float = 10.0
    r_max: float = 100.0
    r_steps: int = 100
    betas: tuple[float, ...] = (0.0, 0.25, 1.0, 2.0)
    radii: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    fit: bool = False
    window: int = 1
    kn: bool = False
    tol: float = DEFAULT_TOLERANCES.quad_tol
    output_format: str = 'json'
    output_path: str | None = None
    threads: int | None = 1
    language: str = 'en'
