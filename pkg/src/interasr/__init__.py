"""Interactive ASR correction and semantic evaluation toolkit."""

from .errors import (
    BackendUnavailable,
    ConfigError,
    DegenerateInput,
    EmptyBatch,
    EmptyReference,
    InterasrError,
    MalformedManifest,
    ModeMismatch,
    ScriptExhausted,
    UnparseableResponse,
)
from .gateway import AudioRef, BackendBinding, ModelGateway, ScenarioScript, ScriptKey
from .metrics import AlignmentCounts, JudgeOutcomeVector, MetricReport
from .textnorm import NormalizedText, TokenSequence, normalize, tokenize

__all__ = [
    "AlignmentCounts",
    "AudioRef",
    "BackendBinding",
    "BackendUnavailable",
    "ConfigError",
    "DegenerateInput",
    "EmptyBatch",
    "EmptyReference",
    "InterasrError",
    "JudgeOutcomeVector",
    "MalformedManifest",
    "MetricReport",
    "ModeMismatch",
    "ModelGateway",
    "NormalizedText",
    "ScenarioScript",
    "ScriptExhausted",
    "ScriptKey",
    "TokenSequence",
    "UnparseableResponse",
    "normalize",
    "tokenize",
]

__version__ = "0.1.0"
