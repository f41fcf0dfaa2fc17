from .errors import (
    ComputationError,
    DegenerateTermError,
    DomainError,
    EnumerationBudgetError,
    GammaOverflowError,
    InsufficientData,
    NonConvergence,
    PreconditionViolation,
    SeriesEnvelopeError,
    VerificationFailure,
)
from .models import (
    DEFAULT_TOLERANCES,
    BetaScan,
    BetaVerdict,
    EvalResult,
    ExponentFit,
    GammaValue,
    IdentityReport,
    LatticePoint,
    LatticeSum,
    PExponent,
    PlanePoint,
    QuadResult,
    RingCell,
    RunConfig,
    SweepRecord,
    Tolerances,
)

__all__ = [
    'DEFAULT_TOLERANCES',
    'BetaScan',
    'BetaVerdict',
    'EvalResult',
    'ExponentFit',
    'GammaValue',
    'IdentityReport',
    'LatticePoint',
    'LatticeSum',
    'PExponent',
    'PlanePoint',
    'QuadResult',
    'RingCell',
    'RunConfig',
    'SweepRecord',
    'Tolerances',
    'ComputationError',
    'DegenerateTermError',
    'DomainError',
    'EnumerationBudgetError',
    'GammaOverflowError',
    'InsufficientData',
    'NonConvergence',
    'PreconditionViolation',
    'SeriesEnvelopeError',
    'VerificationFailure',
]
