"""Exception types shared across the toolkit."""


class InterasrError(Exception):
    """Base class for all toolkit errors."""


class ModeMismatch(InterasrError):
    """Token sequences (or vectors) that must agree in mode/length do not."""


class EmptyReference(InterasrError):
    """An error rate was requested against an empty reference."""


class EmptyBatch(InterasrError):
    """A batch-level statistic was requested over zero items."""


class DegenerateInput(InterasrError):
    """Input has no variance (or is otherwise statistically unusable)."""


class ConfigError(InterasrError):
    """Invalid run configuration or backend binding."""


class BackendUnavailable(InterasrError):
    """A live endpoint could not be reached after retries."""


class ScriptExhausted(InterasrError):
    """A scripted provider has no entry (and no default) for a request key."""


class UnparseableResponse(InterasrError):
    """An LLM response failed its grammar after all parse retries."""

    def __init__(self, message: str, raw_response: str = ""):
        super().__init__(message)
        self.raw_response = raw_response


class MalformedManifest(InterasrError):
    """A manifest or annotation file failed validation."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
