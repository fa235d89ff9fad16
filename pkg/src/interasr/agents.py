"""The four LLM-driven roles: intent router, reasoning corrector, semantic
judge, and the simulator's correction generator.

Each role is a prompt template plus a strict response parser. Parsers are
total: they either return a value or raise :class:`UnparseableResponse`;
parse failures are retried with an appended format reminder up to
``PARSE_RETRIES`` extra attempts.
"""

from __future__ import annotations

import random
import re
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .errors import ConfigError, UnparseableResponse
from .gateway import ModelGateway, ScriptKey
from .textnorm import normalize

PARSE_RETRIES = 2  # extra attempts after the first failure (3 total)

STRATEGIES = ("phonetic_spelling", "contextual_clarification", "direct_negation")

STRATEGY_HINTS = {
    "phonetic_spelling": "spell out the misheard word letter by letter, or "
    "describe its sound (for example 'knight, spelled k-n-i-g-h-t').",
    "contextual_clarification": "clarify the intended meaning with extra "
    "context (for example 'I meant the knight in armor, not the time of day').",
    "direct_negation": "directly negate the wrong word and state the right "
    "one (for example 'no, not night, knight').",
}

# Sampling temperatures per role; decisions are deterministic, the user
# simulator stays diverse.
AGENT_TEMPERATURE = {"route": 0.0, "refine": 0.0, "judge": 0.0, "user": 0.7}

_FORMAT_REMINDERS = {
    "route": "Reminder: end with exactly one line 'ROUTE: NEW' or 'ROUTE: CORRECTION'.",
    "judge": "Reminder: end with exactly one line 'VERDICT: EQUIVALENT' or 'VERDICT: DIFFERENT'.",
    "refine": "Reminder: end with a fenced block labeled FINAL containing only "
    "the full revised transcript.",
    "user": "Reminder: respond with only the spoken correction utterance.",
}

_FINAL_BLOCK = re.compile(r"```FINAL\s*\n(.*?)\n?```", re.DOTALL)
_TRACE_STEP = re.compile(
    r"^\s*(?:\d+[.)]\s*)?(locate|reason|surgical replacement|replacement)\s*[:：]\s*(.+)$",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    text: str

    def render(self, **fields: str) -> str:
        try:
            rendered = self.text.format(**fields)
        except (KeyError, IndexError) as exc:
            raise ConfigError(f"template {self.name!r} missing placeholder: {exc}")
        return rendered

    def placeholders(self) -> set[str]:
        return {
            name
            for _, name, _, _ in string.Formatter().parse(self.text)
            if name is not None
        }


@dataclass(frozen=True)
class TemplateSet:
    route: PromptTemplate
    refine: PromptTemplate
    judge: PromptTemplate
    user: PromptTemplate

    @classmethod
    def load(cls, directory: str | Path | None = None) -> "TemplateSet":
        directory = Path(directory) if directory else Path(__file__).parent / "templates"
        templates = {}
        for name in ("route", "refine", "judge", "user"):
            path = directory / f"{name}.txt"
            if not path.exists():
                raise ConfigError(f"missing template file: {path}")
            templates[name] = PromptTemplate(name=name, text=path.read_text(encoding="utf-8"))
        return cls(**templates)


@dataclass(frozen=True)
class RouteDecision:
    kind: str  # "new_utterance" | "corrective_intent"
    raw_response: str


@dataclass(frozen=True)
class CorrectionResult:
    corrected_text: str
    trace: dict[str, str]
    raw_response: str
    parse_failures: int = 0


@dataclass(frozen=True)
class JudgeVerdict:
    equivalent: int  # 0 | 1
    raw_response: str
    parse_failures: int = 0


@dataclass(frozen=True)
class CorrectionInstruction:
    text: str
    strategy: str


# -- parsers ----------------------------------------------------------------


def _last_line(raw: str) -> str:
    lines = [line.strip() for line in raw.strip().splitlines() if line.strip()]
    return lines[-1] if lines else ""


def parse_route(raw: str) -> str:
    last = _last_line(raw)
    if last == "ROUTE: NEW":
        return "new_utterance"
    if last == "ROUTE: CORRECTION":
        return "corrective_intent"
    raise UnparseableResponse(f"router response missing ROUTE line: {last!r}", raw)


def parse_verdict(raw: str) -> int:
    last = _last_line(raw)
    if last == "VERDICT: EQUIVALENT":
        return 1
    if last == "VERDICT: DIFFERENT":
        return 0
    raise UnparseableResponse(f"judge response missing VERDICT line: {last!r}", raw)


def parse_final_block(raw: str) -> str:
    matches = _FINAL_BLOCK.findall(raw)
    if not matches:
        raise UnparseableResponse("corrector response missing FINAL block", raw)
    text = matches[-1].strip()
    if not text:
        raise UnparseableResponse("corrector FINAL block is empty", raw)
    return text


def parse_instruction(raw: str) -> str:
    text = raw.strip()
    if not text:
        raise UnparseableResponse("empty correction instruction", raw)
    return text


def extract_trace(raw: str) -> dict[str, str]:
    """Best-effort capture of the Locate/Reason/Replacement steps."""
    trace: dict[str, str] = {}
    for line in raw.splitlines():
        m = _TRACE_STEP.match(line)
        if m:
            step = m.group(1).lower()
            field = "replacement" if "replacement" in step else step
            trace.setdefault(field, m.group(2).strip())
    return trace


# -- retrying chat helper ----------------------------------------------------


def _chat_parsed(
    gateway: ModelGateway,
    agent: str,
    prompt: str,
    parser: Callable[[str], object],
    key: ScriptKey | None,
):
    """Call the LLM and parse, retrying with an appended format reminder.

    Returns (parsed, raw_response, parse_failures).
    """
    failures = 0
    content = prompt
    last_exc: UnparseableResponse | None = None
    for _ in range(PARSE_RETRIES + 1):
        raw = gateway.chat(
            [{"role": "user", "content": content}],
            key=key,
            agent=agent,
            temperature=AGENT_TEMPERATURE[agent],
        )
        try:
            return parser(raw), raw, failures
        except UnparseableResponse as exc:
            failures += 1
            last_exc = exc
            content = content + "\n\n" + _FORMAT_REMINDERS[agent]
    raise UnparseableResponse(
        f"{agent} response unparseable after {failures} attempts", last_exc.raw_response
    )


# -- the four operations -----------------------------------------------------


def route_intent(
    hypothesis: str,
    prev_transcript: str,
    gateway: ModelGateway,
    templates: TemplateSet,
    *,
    key: ScriptKey | None = None,
) -> RouteDecision:
    """Classify a hypothesis as a new utterance or a corrective instruction.

    With no previous transcript there is nothing to correct, so the decision
    is made deterministically without an LLM call.
    """
    if not hypothesis:
        raise ValueError("hypothesis must be non-empty")
    if not prev_transcript:
        return RouteDecision(kind="new_utterance", raw_response="")
    prompt = templates.route.render(prev_transcript=prev_transcript, hypothesis=hypothesis)
    kind, raw, _ = _chat_parsed(gateway, "route", prompt, parse_route, key)
    return RouteDecision(kind=kind, raw_response=raw)


def correct(
    prev_transcript: str,
    hypothesis: str,
    gateway: ModelGateway,
    templates: TemplateSet,
    *,
    key: ScriptKey | None = None,
) -> CorrectionResult:
    """Apply the three-step correction (locate, reason, surgical replacement)."""
    if not prev_transcript or not hypothesis:
        raise ValueError("prev_transcript and hypothesis must be non-empty")
    prompt = templates.refine.render(prev_transcript=prev_transcript, hypothesis=hypothesis)
    corrected, raw, failures = _chat_parsed(gateway, "refine", prompt, parse_final_block, key)
    return CorrectionResult(
        corrected_text=corrected,
        trace=extract_trace(raw),
        raw_response=raw,
        parse_failures=failures,
    )


def judge(
    candidate: str,
    ground_truth: str,
    gateway: ModelGateway,
    templates: TemplateSet,
    *,
    key: ScriptKey | None = None,
    short_circuit: bool = True,
) -> JudgeVerdict:
    """Binary semantic-equivalence verdict for candidate vs. ground truth.

    When enabled, an exact match under normalization short-circuits to
    equivalent without an LLM call.
    """
    if not ground_truth:
        raise ValueError("ground_truth must be non-empty")
    if short_circuit and normalize(candidate).text == normalize(ground_truth).text:
        return JudgeVerdict(equivalent=1, raw_response="")
    prompt = templates.judge.render(ground_truth=ground_truth, hypothesis=candidate)
    verdict, raw, failures = _chat_parsed(gateway, "judge", prompt, parse_verdict, key)
    return JudgeVerdict(equivalent=verdict, raw_response=raw, parse_failures=failures)


def generate_correction(
    ground_truth: str,
    prev_transcript: str,
    gateway: ModelGateway,
    templates: TemplateSet,
    rng: random.Random,
    *,
    key: ScriptKey | None = None,
) -> CorrectionInstruction:
    """Simulated-user correction of prev_transcript toward ground_truth.

    The strategy (phonetic spelling / contextual clarification / direct
    negation) is sampled uniformly from the caller's seeded generator.
    """
    if normalize(ground_truth).text == normalize(prev_transcript).text:
        raise ValueError("nothing to correct: texts already match under normalization")
    strategy = rng.choice(STRATEGIES)
    prompt = templates.user.render(
        ground_truth=ground_truth,
        prev_transcript=prev_transcript,
        strategy_hint=STRATEGY_HINTS[strategy],
    )
    text, _, _ = _chat_parsed(gateway, "user", prompt, parse_instruction, key)
    return CorrectionInstruction(text=text, strategy=strategy)
