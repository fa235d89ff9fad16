"""Edit-distance error rates, sentence-level semantic error rate, and Pearson r.

The word/char/mixed mode of the input token sequences makes
:func:`token_error_rate` a WER, CER, or MER respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegenerateInput, EmptyBatch, EmptyReference, ModeMismatch
from .textnorm import TokenSequence


@dataclass(frozen=True)
class AlignmentCounts:
    """S/D/I/hit counts of one minimum-cost Levenshtein alignment."""

    substitutions: int
    deletions: int
    insertions: int
    hits: int
    ref_len: int
    hyp_len: int

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions


@dataclass(frozen=True)
class JudgeOutcomeVector:
    """Binary semantic-equivalence outcomes, one per utterance."""

    outcomes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if any(o not in (0, 1) for o in self.outcomes):
            raise ValueError("judge outcomes must be exactly 0 or 1")

    def __len__(self) -> int:
        return len(self.outcomes)


@dataclass(frozen=True)
class MetricReport:
    """One row of a per-loop metric table for one dataset."""

    loop_index: int
    token_error_rate: float
    sentence_error_rate: float
    s2er: float
    n_utterances: int


def align(ref: TokenSequence, hyp: TokenSequence) -> AlignmentCounts:
    """Minimum-cost Levenshtein alignment with unit S/D/I costs.

    The distance is unique; when several minimal alignments exist the
    backtrace prefers substitution over deletion over insertion so that
    the S/D/I split is reproducible.
    """
    if ref.mode != hyp.mode:
        raise ModeMismatch(f"ref mode {ref.mode!r} != hyp mode {hyp.mode!r}")
    a, b = ref.tokens, hyp.tokens
    n, m = len(a), len(b)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            dist[i][j] = min(
                dist[i - 1][j - 1] + cost,
                dist[i - 1][j] + 1,
                dist[i][j - 1] + 1,
            )

    subs = dels = ins = hits = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and a[i - 1] == b[j - 1] and dist[i][j] == dist[i - 1][j - 1]:
            hits += 1
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + 1:
            subs += 1
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return AlignmentCounts(
        substitutions=subs,
        deletions=dels,
        insertions=ins,
        hits=hits,
        ref_len=n,
        hyp_len=m,
    )


def token_error_rate(ref: TokenSequence, hyp: TokenSequence) -> float:
    """(S + D + I) / ref_len. May exceed 1.0 for long hypotheses."""
    if len(ref) == 0:
        raise EmptyReference("reference token sequence is empty")
    counts = align(ref, hyp)
    return counts.distance / counts.ref_len


def sentence_error_rate(pairs: Sequence[tuple[TokenSequence, TokenSequence]]) -> float:
    """Fraction of (ref, hyp) pairs whose minimal edit distance is nonzero."""
    if not pairs:
        raise EmptyBatch("no (ref, hyp) pairs")
    errors = 0
    for ref, hyp in pairs:
        if len(ref) == 0:
            raise EmptyReference("reference token sequence is empty")
        if align(ref, hyp).distance > 0:
            errors += 1
    return errors / len(pairs)


def s2er(outcomes: JudgeOutcomeVector | Iterable[int]) -> float:
    """Average semantic mismatch rate: (1/N) * sum(1 - outcome_i)."""
    if not isinstance(outcomes, JudgeOutcomeVector):
        outcomes = JudgeOutcomeVector(tuple(outcomes))
    n = len(outcomes)
    if n == 0:
        raise EmptyBatch("no judge outcomes")
    return sum(1 - o for o in outcomes.outcomes) / n


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient, in [-1, 1]."""
    if len(x) != len(y):
        raise ModeMismatch(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise DegenerateInput("pearson needs at least 2 points")
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("zero variance in input")
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))
