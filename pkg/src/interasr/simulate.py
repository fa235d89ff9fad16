"""Automated single-utterance correction simulation.

The loop judges the current transcript against the ground truth; on a
mismatch the simulated user produces a correction instruction which (after
optional TTS + re-transcription) is fed to the reasoning corrector. The
intent router is bypassed: every simulated turn is a correction by
construction. A pass is absorbing: once judged equivalent, the utterance is
frozen at its passing transcript for all later loop rows.
"""

from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import agents
from .errors import (
    BackendUnavailable,
    EmptyBatch,
    MalformedManifest,
    ScriptExhausted,
    UnparseableResponse,
)
from .gateway import AudioRef, ModelGateway, ScriptKey
from .metrics import MetricReport, align
from .textnorm import MODES, normalize, tokenize

SIM_MODES = ("text_shortcut", "audio_loop")

TOKEN_METRIC_NAME = {"word": "WER", "char": "CER", "mixed": "MER"}


@dataclass(frozen=True)
class UtteranceManifestEntry:
    id: str
    reference_text: str
    dataset_tag: str
    metric_mode: str
    audio: AudioRef | None = None


@dataclass(frozen=True)
class SimState:
    loop: int
    transcript: str
    verdict: int  # 0 | 1


@dataclass
class SimTrajectory:
    utterance_id: str
    states: list[SimState]
    terminal_reason: str  # judge_pass | max_loops | stalled_error

    def to_dict(self) -> dict[str, Any]:
        return {
            "utterance_id": self.utterance_id,
            "states": [
                {"loop": s.loop, "transcript": s.transcript, "verdict": s.verdict}
                for s in self.states
            ],
            "terminal_reason": self.terminal_reason,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SimTrajectory":
        return cls(
            utterance_id=data["utterance_id"],
            states=[
                SimState(loop=s["loop"], transcript=s["transcript"], verdict=s["verdict"])
                for s in data["states"]
            ],
            terminal_reason=data["terminal_reason"],
        )


@dataclass(frozen=True)
class AnnotationRecord:
    item_id: str
    annotator_id: str
    rating: int  # 0 | 1
    cohort: str  # nonexpert | expert


@dataclass
class BatchResult:
    """Per-loop metric rows per dataset tag, plus all trajectories."""

    reports: dict[str, list[MetricReport]]
    modes: dict[str, str]
    trajectories: list[SimTrajectory]
    max_loops: int
    stalled_ids: list[str] = field(default_factory=list)


def load_manifest(path: str | Path) -> list[UtteranceManifestEntry]:
    """Load and validate a JSONL utterance manifest."""
    entries: list[UtteranceManifestEntry] = []
    seen: set[str] = set()
    path = Path(path)
    if not path.exists():
        raise MalformedManifest(f"manifest not found: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedManifest(f"invalid JSON: {exc}", lineno)
            if not isinstance(obj, dict):
                raise MalformedManifest("entry is not an object", lineno)
            uid = obj.get("id")
            if not uid or not isinstance(uid, str):
                raise MalformedManifest("missing or invalid id", lineno)
            if uid in seen:
                raise MalformedManifest(f"duplicate id {uid!r}", lineno)
            seen.add(uid)
            ref = obj.get("reference_text")
            if not ref or not isinstance(ref, str):
                raise MalformedManifest(f"missing reference_text for {uid!r}", lineno)
            mode = obj.get("metric_mode", "word")
            if mode not in MODES:
                raise MalformedManifest(f"invalid metric_mode {mode!r}", lineno)
            audio = None
            if obj.get("audio"):
                audio = AudioRef(
                    locator=obj["audio"], sample_rate=obj.get("sample_rate")
                )
            entries.append(
                UtteranceManifestEntry(
                    id=uid,
                    reference_text=ref,
                    dataset_tag=obj.get("dataset_tag", "default"),
                    metric_mode=mode,
                    audio=audio,
                )
            )
    return entries


def _utterance_seed(base_seed: int, utterance_id: str) -> int:
    digest = hashlib.sha256(f"{base_seed}:{utterance_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def run_utterance_sim(
    entry: UtteranceManifestEntry,
    gateway: ModelGateway,
    templates: agents.TemplateSet,
    max_loops: int = 10,
    mode: str = "text_shortcut",
    seed: int = 0,
) -> SimTrajectory:
    """Iteratively correct one utterance until the judge passes or the loop
    limit is hit. Unrecoverable backend failures stall with a partial
    trajectory; unparseable judge responses count as mismatch."""
    if mode not in SIM_MODES:
        raise ValueError(f"unknown simulation mode: {mode!r}")
    if mode == "audio_loop" and entry.audio is None:
        raise MalformedManifest(f"entry {entry.id!r} has no audio for audio_loop mode")
    if mode == "audio_loop" and ("tts" not in gateway.bindings or "asr" not in gateway.bindings):
        raise MalformedManifest("audio_loop mode requires asr and tts bindings")

    rng = random.Random(_utterance_seed(seed, entry.id))
    source_audio = entry.audio or AudioRef(locator=f"manifest:{entry.id}")
    states: list[SimState] = []

    def finish(reason: str) -> SimTrajectory:
        return SimTrajectory(utterance_id=entry.id, states=states, terminal_reason=reason)

    try:
        transcript = gateway.transcribe(source_audio, key=ScriptKey(entry.id, 0, "asr"))
    except (BackendUnavailable, ScriptExhausted) as _:
        return finish("stalled_error")

    for t in range(max_loops + 1):
        try:
            verdict = agents.judge(
                transcript,
                entry.reference_text,
                gateway,
                templates,
                key=ScriptKey(entry.id, t, "judge"),
            )
            outcome = verdict.equivalent
        except UnparseableResponse:
            outcome = 0  # strict gatekeeper: unparseable counts as mismatch
        except (BackendUnavailable, ScriptExhausted):
            return finish("stalled_error")
        states.append(SimState(loop=t, transcript=transcript, verdict=outcome))
        if outcome == 1:
            return finish("judge_pass")
        if t == max_loops:
            return finish("max_loops")

        try:
            instruction = agents.generate_correction(
                entry.reference_text,
                transcript,
                gateway,
                templates,
                rng,
                key=ScriptKey(entry.id, t + 1, "user"),
            )
            if mode == "audio_loop":
                spoken = gateway.synthesize(
                    instruction.text, source_audio, key=ScriptKey(entry.id, t + 1, "tts")
                )
                hypothesis = gateway.transcribe(spoken, key=ScriptKey(entry.id, t + 1, "asr"))
            else:
                hypothesis = instruction.text
            result = agents.correct(
                transcript,
                hypothesis,
                gateway,
                templates,
                key=ScriptKey(entry.id, t + 1, "refine"),
            )
            transcript = result.corrected_text
        except ValueError:
            # Texts already match under normalization: nothing to correct,
            # the next judge round will confirm the pass.
            continue
        except (BackendUnavailable, ScriptExhausted, UnparseableResponse):
            return finish("stalled_error")

    return finish("max_loops")


def _frozen_state(trajectory: SimTrajectory, loop: int) -> SimState:
    idx = min(loop, len(trajectory.states) - 1)
    return trajectory.states[idx]


def aggregate_reports(
    entries: list[UtteranceManifestEntry],
    trajectories: list[SimTrajectory],
    max_loops: int,
) -> BatchResult:
    """Per-loop WER/CER/MER, SER, and semantic error rate tables per dataset.

    Token error rates are corpus-level (total edit distance over total
    reference tokens). Metrics are computed on normalized tokens.
    """
    by_id = {t.utterance_id: t for t in trajectories}
    by_tag: dict[str, list[UtteranceManifestEntry]] = {}
    for entry in sorted(entries, key=lambda e: e.id):
        by_tag.setdefault(entry.dataset_tag, []).append(entry)

    reports: dict[str, list[MetricReport]] = {}
    modes: dict[str, str] = {}
    stalled = sorted(
        t.utterance_id for t in trajectories if t.terminal_reason == "stalled_error"
    )
    for tag, group in sorted(by_tag.items()):
        modes[tag] = group[0].metric_mode
        rows: list[MetricReport] = []
        ref_tokens = {
            e.id: tokenize(normalize(e.reference_text), e.metric_mode) for e in group
        }
        for loop in range(max_loops + 1):
            total_distance = 0
            total_ref = 0
            sentence_errors = 0
            mismatches = 0
            n = 0
            for entry in group:
                trajectory = by_id.get(entry.id)
                if trajectory is None or not trajectory.states:
                    continue
                n += 1
                state = _frozen_state(trajectory, loop)
                ref = ref_tokens[entry.id]
                hyp = tokenize(normalize(state.transcript), entry.metric_mode)
                counts = align(ref, hyp)
                total_distance += counts.distance
                total_ref += counts.ref_len
                if counts.distance > 0:
                    sentence_errors += 1
                if state.verdict == 0:
                    mismatches += 1
            if n == 0:
                continue
            rows.append(
                MetricReport(
                    loop_index=loop,
                    token_error_rate=total_distance / total_ref if total_ref else 0.0,
                    sentence_error_rate=sentence_errors / n,
                    s2er=mismatches / n,
                    n_utterances=n,
                )
            )
        reports[tag] = rows
    return BatchResult(
        reports=reports,
        modes=modes,
        trajectories=[by_id[uid] for uid in sorted(by_id)],
        max_loops=max_loops,
        stalled_ids=stalled,
    )


def run_batch(
    entries: list[UtteranceManifestEntry],
    gateway: ModelGateway,
    templates: agents.TemplateSet,
    max_loops: int = 10,
    mode: str = "text_shortcut",
    seed: int = 0,
    workers: int = 4,
) -> BatchResult:
    """Simulate every manifest entry and aggregate per-loop metric tables.

    Utterances run as independent jobs under a bounded worker pool; results
    are aggregated in utterance-id order for determinism.
    """
    if not entries:
        raise EmptyBatch("manifest is empty")

    def job(entry: UtteranceManifestEntry) -> SimTrajectory:
        return run_utterance_sim(entry, gateway, templates, max_loops, mode, seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trajectories = list(pool.map(job, entries))
    else:
        trajectories = [job(entry) for entry in entries]
    return aggregate_reports(entries, trajectories, max_loops)


def write_trajectories(trajectories: list[SimTrajectory], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trajectory in trajectories:
            fh.write(json.dumps(trajectory.to_dict(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_trajectories(path: str | Path) -> list[SimTrajectory]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(SimTrajectory.from_dict(json.loads(line)))
    return out
