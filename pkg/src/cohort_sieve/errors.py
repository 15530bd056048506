class CohortSieveError(Exception):
    """Base class for all errors raised by this package."""


class OntologyError(CohortSieveError):
    pass


class CriteriaError(CohortSieveError):
    pass


class CorpusError(CohortSieveError):
    pass


class EvaluationError(CohortSieveError):
    pass


class ConfigError(CohortSieveError):
    pass


class TransportError(CohortSieveError):
    """Backend failed after exhausting retries, or returned a non-retryable status."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class AuthenticationError(TransportError):
    pass


class CacheMiss(TransportError):
    pass
