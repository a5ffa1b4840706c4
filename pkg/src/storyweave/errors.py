"""Exception hierarchy shared by every storyweave module.

Every error carries a stable machine-readable ``code`` so the CLI and the
HTTP service can surface structured errors without string matching.
"""

from __future__ import annotations

from typing import Any


class StoryweaveError(Exception):
    """Base class for all storyweave errors."""

    code = "error"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, **self.details}


class UnknownId(StoryweaveError):
    """An operation referenced an id that does not exist in the project."""

    code = "unknown_id"


class InvariantViolation(StoryweaveError):
    """A mutation would break a structural invariant; names the invariant."""

    code = "invariant_violation"

    def __init__(self, invariant: str, message: str, **details: Any) -> None:
        super().__init__(message, invariant=invariant, **details)
        self.invariant = invariant


class IntegrityError(StoryweaveError):
    """A persisted document failed referential-integrity validation."""

    code = "integrity_error"


class SchemaMismatch(StoryweaveError):
    """A persisted document declares an unsupported schema version."""

    code = "schema_mismatch"


class ConfigError(StoryweaveError):
    code = "config_error"


# ---------------------------------------------------------------------------
# Provider errors


class ProviderError(StoryweaveError):
    code = "provider_error"


class InvalidSchema(StoryweaveError):
    """A structured request carried a schema that is not well-formed."""

    code = "invalid_schema"


class ProviderUnavailable(ProviderError):
    code = "provider_unavailable"


class ProviderTimeout(ProviderError):
    code = "provider_timeout"


class ContentRefused(ProviderError):
    code = "content_refused"


class EmptyScript(ProviderError):
    code = "empty_script"


class SchemaValidationExhausted(ProviderError):
    """Structured output never validated within the retry budget."""

    code = "schema_validation_exhausted"

    def __init__(self, message: str, last_raw: str = "", **details: Any) -> None:
        super().__init__(message, **details)
        self.last_raw = last_raw


class PartialFailure(ProviderError):
    """Some of the n requested outputs failed; survivors are attached."""

    code = "partial_failure"

    def __init__(self, message: str, outputs: list, errors: list, **details: Any) -> None:
        super().__init__(message, **details)
        self.outputs = outputs
        self.errors = errors


# ---------------------------------------------------------------------------
# Pipeline contract errors


class PipelineError(StoryweaveError):
    code = "pipeline_error"


class IncompleteGrouping(PipelineError):
    code = "incomplete_grouping"

    def __init__(self, message: str, orphaned: list, **details: Any) -> None:
        super().__init__(message, orphaned=list(orphaned), **details)
        self.orphaned = list(orphaned)


class PermutationViolation(PipelineError):
    code = "permutation_violation"


class UnknownShotId(PipelineError):
    code = "unknown_shot_id"


class CountViolation(PipelineError):
    code = "count_violation"


class DistinctnessViolation(PipelineError):
    code = "distinctness_violation"


class SpanViolation(PipelineError):
    code = "span_violation"


# ---------------------------------------------------------------------------
# Media / compile errors


class MediaProbeError(StoryweaveError):
    code = "media_probe_error"


class MissingAsset(StoryweaveError):
    code = "missing_asset"


class EmptyScene(StoryweaveError):
    code = "empty_scene"


class ZeroCoverage(StoryweaveError):
    code = "zero_coverage"


class RenderCommandFailed(StoryweaveError):
    code = "render_command_failed"

    def __init__(self, message: str, log: str = "", **details: Any) -> None:
        super().__init__(message, **details)
        self.log = log


class DurationMismatch(StoryweaveError):
    code = "duration_mismatch"


class StaleRevision(StoryweaveError):
    """Optimistic-concurrency conflict: the client's revision is stale."""

    code = "stale_revision"
