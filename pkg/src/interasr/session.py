"""Live interactive session state machine.

Each turn either adopts the new hypothesis directly (new utterance) or routes
it through the reasoning corrector (corrective intent). Failed turns are
recorded but never mutate the current transcript.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field
from typing import Any

from . import agents
from .errors import BackendUnavailable, ConfigError, InterasrError, ScriptExhausted, UnparseableResponse
from .gateway import AudioRef, ModelGateway, ScriptKey


@dataclass(frozen=True)
class TurnRecord:
    t: int
    input: dict[str, str]  # {"text": ...} or {"audio": locator}
    hypothesis: str
    route: dict[str, str] | None
    correction: dict[str, Any] | None
    resulting_transcript: str
    latency: dict[str, float]
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "input": self.input,
            "hypothesis": self.hypothesis,
            "route": self.route,
            "correction": self.correction,
            "resulting_transcript": self.resulting_transcript,
            "latency": self.latency,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TurnRecord":
        return cls(
            t=data["t"],
            input=data["input"],
            hypothesis=data["hypothesis"],
            route=data.get("route"),
            correction=data.get("correction"),
            resulting_transcript=data["resulting_transcript"],
            latency=data.get("latency", {}),
            error=data.get("error"),
        )


@dataclass
class SessionState:
    session_id: str
    current_transcript: str = ""
    turn_index: int = 0
    history: list[TurnRecord] = field(default_factory=list)


class Session:
    """One live interactive session. ``step`` is sequential per session."""

    def __init__(
        self,
        gateway: ModelGateway,
        templates: agents.TemplateSet,
        session_id: str | None = None,
    ):
        for role in ("asr", "llm"):
            if role not in gateway.bindings:
                raise ConfigError(f"session requires an {role} binding")
        self.gateway = gateway
        self.templates = templates
        self.state = SessionState(session_id=session_id or uuid.uuid4().hex)

    @property
    def session_id(self) -> str:
        return self.state.session_id

    def step(self, *, text: str | None = None, audio: AudioRef | None = None) -> TurnRecord:
        """Run one turn: transcribe (if audio), route, and correct or adopt."""
        if (text is None) == (audio is None):
            raise ValueError("step takes exactly one of text or audio")
        if text is not None and not text.strip():
            raise ValueError("text input must be non-empty")

        t = self.state.turn_index
        prev = self.state.current_transcript
        input_field = {"text": text} if text is not None else {"audio": audio.locator}
        latency: dict[str, float] = {}
        hypothesis = ""
        route = None
        correction = None

        try:
            if audio is not None:
                started = time.perf_counter()
                hypothesis = self.gateway.transcribe(
                    audio, key=ScriptKey(self.session_id, t, "asr")
                )
                latency["asr"] = time.perf_counter() - started
            else:
                hypothesis = text

            started = time.perf_counter()
            decision = agents.route_intent(
                hypothesis,
                prev,
                self.gateway,
                self.templates,
                key=ScriptKey(self.session_id, t, "route"),
            )
            latency["route"] = time.perf_counter() - started
            route = {"kind": decision.kind, "raw_response": decision.raw_response}

            if decision.kind == "corrective_intent":
                started = time.perf_counter()
                result = agents.correct(
                    prev,
                    hypothesis,
                    self.gateway,
                    self.templates,
                    key=ScriptKey(self.session_id, t, "refine"),
                )
                latency["correct"] = time.perf_counter() - started
                correction = {
                    "corrected_text": result.corrected_text,
                    "trace": result.trace,
                    "raw_response": result.raw_response,
                }
                resulting = result.corrected_text
            else:
                resulting = hypothesis
            record = TurnRecord(
                t=t,
                input=input_field,
                hypothesis=hypothesis,
                route=route,
                correction=correction,
                resulting_transcript=resulting,
                latency=latency,
            )
        except (BackendUnavailable, ScriptExhausted, UnparseableResponse) as exc:
            # Failed turns are non-destructive: transcript stays put.
            record = TurnRecord(
                t=t,
                input=input_field,
                hypothesis=hypothesis,
                route=route,
                correction=None,
                resulting_transcript=prev,
                latency=latency,
                error=f"{type(exc).__name__}: {exc}",
            )

        self.state.history.append(record)
        self.state.turn_index = t + 1
        if record.error is None:
            self.state.current_transcript = record.resulting_transcript
        return record

    def trajectory(self) -> list[TurnRecord]:
        return list(self.state.history)


def start_session(
    gateway: ModelGateway,
    templates: agents.TemplateSet,
    session_id: str | None = None,
) -> Session:
    return Session(gateway, templates, session_id=session_id)


def write_trajectory(records: list[TurnRecord], path) -> None:
    """One TurnRecord per line, stable field order."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_trajectory(path) -> list[TurnRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(TurnRecord.from_dict(json.loads(line)))
    return records
