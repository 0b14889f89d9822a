"""Exception hierarchy shared across the toolkit.

Every error raised on a contract violation derives from HazvizError so the
command line layer can report it verbatim and exit with status 1.
"""
from __future__ import annotations


class HazvizError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(HazvizError):
    """Input data is missing a required column or field."""


class BoundsError(HazvizError):
    """A numeric argument is outside its allowed range."""


class UnresolvedPlaceholderError(HazvizError):
    """A template placeholder has no binding."""

    def __init__(self, placeholder: str, template_id: str) -> None:
        super().__init__(
            f"template {template_id!r} has no binding for placeholder {{{placeholder}}}"
        )
        self.placeholder = placeholder
        self.template_id = template_id


class TemplateChecksumError(HazvizError):
    """A template asset does not match its recorded checksum."""


class WarningParseError(HazvizError):
    """A safety-warning stage response has no SAFETY_WARNING line."""

    def __init__(self, message: str, raw_text: str) -> None:
        super().__init__(message)
        self.raw_text = raw_text


class DependencyError(HazvizError):
    """A pipeline stage was invoked without the description it depends on."""


class ModeMismatchError(HazvizError):
    """A description set was passed to a pipeline of the other mode."""


class IncompleteDescriptionsError(HazvizError):
    """A temporal description set is missing stage texts or its warning."""


class GenerationError(HazvizError):
    """A backend call failed after exhausting its retries."""

    def __init__(self, message: str, stage: str) -> None:
        super().__init__(message)
        self.stage = stage


class BackendUnavailableError(HazvizError):
    """A backend is unknown or failed its startup readiness check."""


class NormalizationError(HazvizError):
    """A vector cannot be scaled to unit length."""


class StatisticsError(HazvizError):
    """A statistic is undefined for the given sample (e.g. zero variance)."""


class CorrespondenceError(HazvizError):
    """A query/gallery correspondence references unknown ids or is empty."""


class ValidationError(HazvizError):
    """A review record violates the ratings wire format."""


class InsufficientOverlapError(HazvizError):
    """No reviewer pair shares co-rated items for an agreement statistic."""
