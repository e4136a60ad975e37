"""Exception hierarchy.

Configuration problems derive from :class:`ConfigError` (CLI exit 2) and
numerical failures from :class:`NumericalError` (CLI exit 3).
"""
from __future__ import annotations


class SatMDIError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SatMDIError):
    pass


class NumericalError(SatMDIError):
    pass


class DomainError(SatMDIError, ValueError):
    """An argument lies outside the domain where a model is defined."""


class FormatError(ConfigError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ChecksumError(FormatError):
    pass


class RangeError(DomainError):
    pass


class PropagationWindowError(DomainError):
    pass


class EmptySearchError(DomainError):
    pass


class BelowHorizonError(DomainError):
    pass


class ConvergenceError(NumericalError):
    pass


class ScheduleGapError(SatMDIError):
    pass


class EmptyWindowError(SatMDIError):
    pass


class DegenerateChannelError(DomainError):
    pass


class ParseError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass


class InvariantError(ConfigError):
    pass
