"""Exception hierarchy shared by the engine, the loaders and the CLI."""

from __future__ import annotations


class DynMarginError(Exception):
    """Base class for every error raised by the package."""


class DomainError(DynMarginError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(DynMarginError, ValueError):
    """One or more invariant violations, each tagged with a location.

    ``issues`` is a list of ``(location, message)`` pairs where ``location`` is
    a human readable path such as ``"row 3, wind_q90"`` or ``"wind_gamma.c"``.
    """

    def __init__(self, issues, source=None):
        if isinstance(issues, str):
            issues = [("", issues)]
        self.issues = list(issues)
        self.source = source
        super().__init__(self._render())

    def _render(self) -> str:
        head = f"{self.source}: " if self.source else ""
        parts = [f"{loc}: {msg}" if loc else msg for loc, msg in self.issues]
        return head + "; ".join(parts)


class SchemaVersionError(ValidationError):
    """The file declares a schema version this build does not read."""


class QuantileCrossingError(ValidationError):
    """A quantile model produced values that decrease with the probability level."""
