"""Exception hierarchy. Every error carries an optional pipeline stage label."""

from __future__ import annotations


class ContracheckError(Exception):
    """Base class for all toolkit errors."""

    stage: str | None = None

    def __init__(self, message: str, *, stage: str | None = None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage


class IngestError(ContracheckError):
    stage = "ingest"


class CorruptionError(ContracheckError):
    stage = "ingest"


class SampleError(ContracheckError):
    stage = "sampling"


class IndexBuildError(ContracheckError):
    stage = "index-build"


class SearchError(ContracheckError):
    stage = "retrieval"


class TemplateError(ContracheckError):
    stage = "prompting"


class TagParseError(ContracheckError):
    """A required <tag> region is absent or unclosed. Carries the raw response."""

    stage = "parsing"

    def __init__(self, message: str, raw_response: str = "", *, stage: str | None = None):
        super().__init__(message, stage=stage)
        self.raw_response = raw_response


class ProviderError(ContracheckError):
    stage = "provider"


class TransportError(ProviderError):
    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class EmptyResponseError(ProviderError):
    pass


class UnmatchedPromptError(ProviderError):
    """Scripted provider had no entry for a prompt; names the nearest key."""

    def __init__(self, message: str, nearest_key: str | None = None):
        super().__init__(message)
        self.nearest_key = nearest_key


class ExtractionError(ContracheckError):
    stage = "fact-extraction"


class VerificationError(ContracheckError):
    stage = "verification"


class ClassificationError(ContracheckError):
    stage = "nli-classification"


class AgentError(ContracheckError):
    stage = "agent"


class ToolError(ContracheckError):
    stage = "agent-tool"


class MutationError(ContracheckError):
    stage = "fault-injection"


class MetricError(ContracheckError):
    stage = "evaluation"


class CoverageError(MetricError):
    pass


class EstimationError(ContracheckError):
    stage = "estimation"


class ConfigError(ContracheckError):
    stage = "config"
