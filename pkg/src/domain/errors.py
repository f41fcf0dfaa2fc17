from __future__ import annotations


class ComputationError(Exception):
    def __init__(self, message_key: str, detail: str | None = None) -> None:
        super().__init__(message_key if detail is None else f'{message_key}: {detail}')
        self.message_key = message_key
        self.detail = detail


class DomainError(ComputationError):
    pass


class SeriesEnvelopeError(DomainError):
    pass


class PreconditionViolation(ComputationError):
    pass


class GammaOverflowError(ComputationError):
    pass


class DegenerateTermError(ComputationError):
    pass


class EnumerationBudgetError(ComputationError):
    pass


class InsufficientData(ComputationError):
    pass


class NonConvergence(ComputationError):
    """Raised with the best value reached so callers can still report it."""

    def __init__(
        self,
        message_key: str,
        detail: str | None = None,
        value: float = float('nan'),
        error_estimate: float = float('inf'),
    ) -> None:
        super().__init__(message_key, detail)
        self.value = value
        self.error_estimate = error_estimate


class VerificationFailure(ComputationError):
    pass
