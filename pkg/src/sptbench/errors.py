"""Exception taxonomy shared across the package.

Two base classes split errors the way the CLI exit-code contract needs them:
``UsageError`` covers bad input, bad config, and violated preconditions
(exit 2); ``RuntimeFailure`` covers environment and remote-service failures
(exit 3).
"""

from __future__ import annotations


class SptbenchError(Exception):
    """Base class for all package errors."""


class UsageError(SptbenchError):
    """Bad input, bad configuration, or a violated precondition."""


class RuntimeFailure(SptbenchError):
    """Environment or remote-service failure at run time."""


class ConfigError(UsageError):
    pass


class CorpusFormatError(UsageError):
    pass


class CorpusConflictError(UsageError):
    pass


class BoundsError(UsageError):
    pass


class DomainError(UsageError):
    pass


class DegenerateSetError(UsageError):
    pass


class CapExceededError(UsageError):
    pass


class SandboxEnvironmentError(RuntimeFailure):
    pass


class RegistryError(UsageError):
    pass


class DetectorScoringError(RuntimeFailure):
    pass


class DetectorProtocolError(RuntimeFailure):
    pass


class TransportError(RuntimeFailure):
    pass


class CassetteMissError(RuntimeFailure):
    pass


class DesignParseError(RuntimeFailure):
    """LLM response could not be parsed after exhausting retries."""

    def __init__(self, message: str, raw_response: str = ""):
        super().__init__(message)
        self.raw_response = raw_response
