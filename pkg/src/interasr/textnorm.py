"""Text normalization and tokenization for error-rate computation.

Three tokenization modes are supported:

* ``word``  - split on spaces (English-style WER tokens)
* ``char``  - one token per non-space codepoint (Mandarin-style CER tokens)
* ``mixed`` - CJK codepoints are individual tokens, Latin runs stay whole
  words (code-switching MER tokens)
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

MODES = ("word", "char", "mixed")

# CJK codepoint ranges counted as character tokens in mixed mode.
_CJK_RANGES = (
    (0x4E00, 0x9FFF),   # CJK Unified Ideographs
    (0x3400, 0x4DBF),   # Extension A
    (0xF900, 0xFAFF),   # Compatibility Ideographs
)

# Characters that survive punctuation stripping when between word characters.
_INTRA_WORD = {"'", "’", "-"}

_WS_RUN = re.compile(r"\s+")


def is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_punctuation(text: str) -> str:
    """Replace punctuation with spaces, keeping intra-word apostrophes/hyphens."""
    out = []
    n = len(text)
    for i, ch in enumerate(text):
        if not _is_punct(ch):
            out.append(ch)
            continue
        if ch in _INTRA_WORD:
            prev_ok = i > 0 and (text[i - 1].isalnum())
            next_ok = i + 1 < n and (text[i + 1].isalnum())
            if prev_ok and next_ok:
                out.append(ch)
                continue
        out.append(" ")
    return "".join(out)


def _normalize_once(text: str) -> str:
    text = unicodedata.normalize("NFC", text)
    text = text.lower()
    text = _strip_punctuation(text)
    text = _WS_RUN.sub(" ", text).strip()
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class NormalizedText:
    """Text that has passed through :func:`normalize`; safe to tokenize."""

    text: str
    profile: str = "default"


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    mode: str

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown tokenization mode: {self.mode!r}")
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)


def normalize(text: str, profile: str = "default") -> NormalizedText:
    """Canonical-compose, lowercase, strip punctuation, collapse whitespace.

    Total and idempotent: the pipeline is applied until a fixed point, so
    normalizing already-normalized text is the identity.
    """
    if profile != "default":
        raise ValueError(f"unknown normalization profile: {profile!r}")
    prev = None
    while text != prev:
        prev = text
        text = _normalize_once(text)
    return NormalizedText(text=text, profile=profile)


def tokenize(text: NormalizedText | str, mode: str) -> TokenSequence:
    """Tokenize normalized text under one of the three modes."""
    if isinstance(text, str):
        text = normalize(text)
    s = text.text
    if mode == "word":
        tokens = [t for t in s.split(" ") if t]
    elif mode == "char":
        tokens = [ch for ch in s if ch != " "]
    elif mode == "mixed":
        tokens = []
        run: list[str] = []
        for ch in s:
            if ch == " " or is_cjk(ch):
                if run:
                    tokens.append("".join(run))
                    run = []
                if ch != " ":
                    tokens.append(ch)
            else:
                run.append(ch)
        if run:
            tokens.append("".join(run))
    else:
        raise ValueError(f"unknown tokenization mode: {mode!r}")
    return TokenSequence(tokens=tuple(tokens), mode=mode)
