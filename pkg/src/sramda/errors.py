"""Exception hierarchy shared by the knowledge-base store, the assessment
state machine, the HTTP service, and the CLI.

The service layer maps these onto HTTP statuses (validation -> 422,
step-order -> 409, unknown id -> 404, parse -> 400); the CLI maps any
SramdaError onto exit code 1.
"""

from __future__ import annotations


class SramdaError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(SramdaError):
    """A source document could not be parsed. Carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateSlugError(SramdaError):
    """Two records claim the same slug."""

    def __init__(self, slug: str, line: int | None = None):
        self.slug = slug
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate slug {slug!r}{where}")


class KbValidationError(SramdaError):
    """A knowledge base failed record-level validation.

    Carries the full ValidationReport so callers can list every violation.
    """

    def __init__(self, report):
        self.report = report
        lines = "; ".join(
            f"{slug}: {v.field}: {v.message}" for slug, v in report.violations
        )
        super().__init__(f"knowledge base invalid: {lines}")


class RecordValidationError(SramdaError):
    """A single record failed validation (e.g. on add or registration)."""

    def __init__(self, slug: str, violations):
        self.slug = slug
        self.violations = list(violations)
        lines = "; ".join(f"{v.field}: {v.message}" for v in self.violations)
        super().__init__(f"record {slug!r} invalid: {lines}")


class UnknownIdError(SramdaError):
    """A referenced slug, motivation, candidate, or session does not exist."""

    def __init__(self, kind: str, value: str):
        self.kind = kind
        self.value = value
        super().__init__(f"unknown {kind}: {value!r}")


class StepOrderError(SramdaError):
    """An assessment operation was invoked outside its legal step window."""


class MissingCountermeasureError(StepOrderError):
    """finalize() was called while a confirmed risk has no countermeasure
    and no explicit no-known-countermeasure marker."""


class IncompleteSpecError(SramdaError):
    """A project specification is missing data required to start a session."""


class RankingError(SramdaError):
    """A ranking decision set is malformed (duplicate rank, gap, missing or
    unknown candidate)."""


class NotConfirmedError(SramdaError):
    """A countermeasure was attached to a risk that is not confirmed."""


class InvalidInputError(SramdaError):
    """An operation payload carries a structurally valid but illegal value
    (empty description, malformed slug, duplicate motivation id, ...)."""


class SessionInvariantError(SramdaError):
    """An imported or replayed session violates state-machine invariants."""


class SchemaVersionError(SramdaError):
    """A document declares a schema version this build does not understand."""

    def __init__(self, found, expected: int):
        self.found = found
        self.expected = expected
        super().__init__(f"unsupported schema_version {found!r} (expected {expected})")
