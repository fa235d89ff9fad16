"""Uniform access to the three model roles: ASR, chat LLM, and TTS.

Each role is resolved by a :class:`BackendBinding` to either a live HTTP
endpoint or a deterministic scripted provider. Scripted providers make the
whole stack runnable and testable offline.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import httpx

from .errors import BackendUnavailable, ConfigError, ScriptExhausted

ROLES = ("asr", "llm", "tts")

_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class Sampling:
    temperature: float = 0.0
    max_tokens: int = 1024


@dataclass(frozen=True)
class AudioRef:
    """Reference to an audio payload; scripted flows carry text metadata."""

    locator: str
    sample_rate: int | None = None
    text_hint: str | None = None


@dataclass(frozen=True)
class ScriptKey:
    """Scenario-script lookup key: (utterance id, turn index, agent name)."""

    utt: str
    turn: int
    agent: str | None = None


def prompt_fingerprint(role: str, prompt: str) -> str:
    """Stable hash of (role, whitespace-normalized prompt)."""
    norm = _WS.sub(" ", prompt).strip()
    return hashlib.sha256(f"{role}\n{norm}".encode("utf-8")).hexdigest()[:16]


class ScenarioScript:
    """Deterministic canned responses keyed by (utt, turn, agent),
    prompt fingerprint, or substring match, with optional per-role defaults.

    Lookup order: exact key, fingerprint, first matching ``contains`` entry
    (insertion order), role default. Same key always yields the same response.
    """

    def __init__(self):
        self._by_key: dict[tuple[str, str, int, str | None], str] = {}
        self._by_fingerprint: dict[tuple[str, str], str] = {}
        self._contains: list[tuple[str, str, str]] = []  # (role, needle, response)
        self._defaults: dict[str, dict[str, str]] = {}  # role -> {response|policy}

    def add(self, role: str, key, response: str) -> None:
        """Register a response. ``key`` is a ScriptKey / (utt, turn[, agent])
        tuple, a fingerprint string, {"contains": needle}, or "default"."""
        if role not in ROLES:
            raise ConfigError(f"unknown script role: {role!r}")
        if key == "default":
            self._defaults[role] = {"response": response}
        elif isinstance(key, ScriptKey):
            self._by_key[(role, key.utt, key.turn, key.agent)] = response
        elif isinstance(key, tuple):
            utt, turn = key[0], key[1]
            agent = key[2] if len(key) > 2 else None
            self._by_key[(role, utt, int(turn), agent)] = response
        elif isinstance(key, dict) and "contains" in key:
            self._contains.append((role, key["contains"], response))
        elif isinstance(key, str):
            self._by_fingerprint[(role, key)] = response
        else:
            raise ConfigError(f"unsupported script key: {key!r}")

    def set_default_policy(self, role: str, policy: str) -> None:
        """Per-role default policy; ``echo_text`` echoes the request text."""
        if policy != "echo_text":
            raise ConfigError(f"unknown script policy: {policy!r}")
        self._defaults[role] = {"policy": policy}

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "ScenarioScript":
        """Load entries of shape {role, key, response[, policy]} from JSONL."""
        script = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    role = obj["role"]
                    key = obj["key"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ConfigError(f"bad script entry at line {lineno}: {exc}")
                if key == "default" and "policy" in obj:
                    script.set_default_policy(role, obj["policy"])
                    continue
                if isinstance(key, dict) and "utt" in key:
                    key = (key["utt"], key["turn"], key.get("agent"))
                elif isinstance(key, dict) and "fingerprint" in key:
                    key = key["fingerprint"]
                script.add(role, key, obj["response"])
        return script

    def lookup(self, role: str, key: ScriptKey | None, request_text: str) -> str:
        if key is not None:
            for agent in (key.agent, None) if key.agent else (None,):
                hit = self._by_key.get((role, key.utt, key.turn, agent))
                if hit is not None:
                    return hit
        hit = self._by_fingerprint.get((role, prompt_fingerprint(role, request_text)))
        if hit is not None:
            return hit
        for r, needle, response in self._contains:
            if r == role and needle in request_text:
                return response
        default = self._defaults.get(role)
        if default is not None:
            if default.get("policy") == "echo_text":
                return request_text
            return default["response"]
        raise ScriptExhausted(
            f"no scripted {role} response for key={key} "
            f"fingerprint={prompt_fingerprint(role, request_text)}"
        )


@dataclass(frozen=True)
class BackendBinding:
    """Resolution of one model role to a live endpoint or a scripted mock."""

    role: str
    provider: str  # "live" | "scripted"
    endpoint: str | None = None
    model_name: str | None = None
    script: ScenarioScript | None = None
    sampling: Sampling = field(default_factory=Sampling)
    cache: bool | None = None  # None: on iff temperature == 0

    def __post_init__(self):
        if self.role not in ROLES:
            raise ConfigError(f"unknown role: {self.role!r}")
        if self.provider == "live":
            if not self.endpoint or self.script is not None:
                raise ConfigError("live binding needs an endpoint and no script")
        elif self.provider == "scripted":
            if self.script is None or self.endpoint is not None:
                raise ConfigError("scripted binding needs a script and no endpoint")
        else:
            raise ConfigError(f"unknown provider: {self.provider!r}")

    def cache_enabled(self) -> bool:
        if self.cache is not None:
            return self.cache
        return self.sampling.temperature == 0.0


class ModelGateway:
    """Facade over the per-role bindings with call counting, retries,
    response caching, and a per-role concurrency bound for live calls."""

    def __init__(
        self,
        bindings: dict[str, BackendBinding],
        cache_dir: str | Path | None = None,
        spool_dir: str | Path | None = None,
        http_client: httpx.Client | None = None,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        max_concurrency: int = 8,
    ):
        for role, binding in bindings.items():
            if binding.role != role:
                raise ConfigError(f"binding under {role!r} declares role {binding.role!r}")
        self.bindings = dict(bindings)
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.spool_dir = Path(spool_dir) if spool_dir else None
        self._client = http_client
        self._max_attempts = max_attempts
        self._backoff_base = backoff_base
        self._lock = threading.Lock()
        self._semaphores = {role: threading.Semaphore(max_concurrency) for role in ROLES}
        self.calls: dict[str, int] = {}
        self.network_calls: int = 0

    def _binding(self, role: str) -> BackendBinding:
        binding = self.bindings.get(role)
        if binding is None:
            raise ConfigError(f"no binding configured for role {role!r}")
        return binding

    def _count(self, label: str) -> None:
        with self._lock:
            self.calls[label] = self.calls.get(label, 0) + 1

    def call_count(self, label: str) -> int:
        return self.calls.get(label, 0)

    # -- role operations ---------------------------------------------------

    def transcribe(self, audio: AudioRef, *, key: ScriptKey | None = None) -> str:
        binding = self._binding("asr")
        self._count("asr")
        if binding.provider == "scripted":
            request_text = audio.text_hint if audio.text_hint is not None else audio.locator
            return binding.script.lookup("asr", key, request_text)
        return self._live_transcribe(binding, audio)

    def chat(
        self,
        messages: list[dict[str, str]],
        *,
        key: ScriptKey | None = None,
        agent: str | None = None,
        temperature: float | None = None,
        max_tokens: int | None = None,
    ) -> str:
        if not messages:
            raise ValueError("messages must be non-empty")
        binding = self._binding("llm")
        self._count("llm")
        if agent:
            self._count(f"llm:{agent}")
        rendered = "\n".join(f"{m['role']}: {m['content']}" for m in messages)
        if binding.provider == "scripted":
            if key is not None and agent and key.agent is None:
                key = ScriptKey(key.utt, key.turn, agent)
            return binding.script.lookup("llm", key, rendered)
        sampling = Sampling(
            temperature=binding.sampling.temperature if temperature is None else temperature,
            max_tokens=binding.sampling.max_tokens if max_tokens is None else max_tokens,
        )
        return self._live_chat(binding, messages, sampling)

    def synthesize(
        self, text: str, voice_ref: AudioRef, *, key: ScriptKey | None = None
    ) -> AudioRef:
        if not text:
            raise ValueError("text must be non-empty")
        binding = self._binding("tts")
        self._count("tts")
        if binding.provider == "scripted":
            try:
                locator = binding.script.lookup("tts", key, text)
            except ScriptExhausted:
                locator = f"scripted-tts:{prompt_fingerprint('tts', text)}"
            return AudioRef(locator=locator, text_hint=text)
        return self._live_synthesize(binding, text, voice_ref)

    # -- live HTTP plumbing ------------------------------------------------

    def _client_or_default(self) -> httpx.Client:
        if self._client is None:
            self._client = httpx.Client(timeout=60.0)
        return self._client

    def _cache_path(self, role: str, payload: Any) -> Path | None:
        if self.cache_dir is None:
            return None
        digest = hashlib.sha256(
            json.dumps([role, payload], sort_keys=True, ensure_ascii=False).encode("utf-8")
        ).hexdigest()
        return self.cache_dir / role / digest

    def _request(self, binding: BackendBinding, payload: Any, **kwargs) -> httpx.Response:
        """POST with bounded retries on transport errors only."""
        client = self._client_or_default()
        last_exc: Exception | None = None
        with self._semaphores[binding.role]:
            for attempt in range(self._max_attempts):
                if attempt:
                    time.sleep(self._backoff_base * (2 ** (attempt - 1)))
                try:
                    with self._lock:
                        self.network_calls += 1
                    response = client.post(binding.endpoint, **kwargs)
                except httpx.TransportError as exc:
                    last_exc = exc
                    continue
                if response.status_code >= 400:
                    raise BackendUnavailable(
                        f"{binding.role} endpoint returned {response.status_code}: "
                        f"{response.text[:200]}"
                    )
                return response
        raise BackendUnavailable(f"{binding.role} endpoint unreachable: {last_exc}")

    def _live_chat(
        self, binding: BackendBinding, messages: list[dict[str, str]], sampling: Sampling
    ) -> str:
        payload = {
            "model": binding.model_name,
            "messages": messages,
            "temperature": sampling.temperature,
            "max_tokens": sampling.max_tokens,
        }
        cache_path = None
        if binding.cache is True or (binding.cache is None and sampling.temperature == 0.0):
            cache_path = self._cache_path("llm", payload)
        if cache_path is not None and cache_path.exists():
            return cache_path.read_text(encoding="utf-8")
        response = self._request(binding, payload, json=payload)
        try:
            text = response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, json.JSONDecodeError) as exc:
            raise BackendUnavailable(f"malformed chat response: {exc}")
        if cache_path is not None:
            cache_path.parent.mkdir(parents=True, exist_ok=True)
            cache_path.write_text(text, encoding="utf-8")
        return text

    def _live_transcribe(self, binding: BackendBinding, audio: AudioRef) -> str:
        path = Path(audio.locator)
        if not path.exists():
            raise ConfigError(f"audio locator not resolvable: {audio.locator}")
        payload = {"model": binding.model_name, "audio": audio.locator}
        cache_path = self._cache_path("asr", payload) if binding.cache_enabled() else None
        if cache_path is not None and cache_path.exists():
            return cache_path.read_text(encoding="utf-8")
        with open(path, "rb") as fh:
            response = self._request(
                binding,
                payload,
                files={"file": (path.name, fh)},
                data={"model": binding.model_name or ""},
            )
        try:
            text = response.json()["text"]
        except (KeyError, json.JSONDecodeError) as exc:
            raise BackendUnavailable(f"malformed transcription response: {exc}")
        if cache_path is not None:
            cache_path.parent.mkdir(parents=True, exist_ok=True)
            cache_path.write_text(text, encoding="utf-8")
        return text

    def _live_synthesize(self, binding: BackendBinding, text: str, voice_ref: AudioRef) -> AudioRef:
        payload = {"model": binding.model_name, "text": text, "voice_audio": voice_ref.locator}
        response = self._request(binding, payload, json=payload)
        spool = self.spool_dir or Path(".interasr_spool")
        spool.mkdir(parents=True, exist_ok=True)
        out = spool / f"tts-{hashlib.sha256(response.content).hexdigest()[:16]}.wav"
        out.write_bytes(response.content)
        return AudioRef(locator=str(out), text_hint=text)
