import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interasr.errors import (
    DegenerateInput,
    EmptyBatch,
    EmptyReference,
    ModeMismatch,
)
from interasr.metrics import (
    JudgeOutcomeVector,
    align,
    pearson,
    s2er,
    sentence_error_rate,
    token_error_rate,
)
from interasr.textnorm import TokenSequence, normalize, tokenize


def oracle_distance(a, b):
    """Independent exhaustive-recursion edit distance (no DP table)."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    same = 0 if a[0] == b[0] else 1
    return min(
        oracle_distance(a[1:], b[1:]) + same,
        oracle_distance(a[1:], b) + 1,
        oracle_distance(a, b[1:]) + 1,
    )


def seq(tokens, mode="word"):
    return TokenSequence(tokens=tuple(tokens), mode=mode)


class TestAlign:
    def test_identity(self):
        counts = align(seq(["see", "the", "knight"]), seq(["see", "the", "knight"]))
        assert (counts.substitutions, counts.deletions, counts.insertions) == (0, 0, 0)
        assert counts.hits == 3

    def test_single_substitution(self):
        # oracle_distance(["see","the","knight"], ["see","the","night"]) == 1
        counts = align(seq(["see", "the", "knight"]), seq(["see", "the", "night"]))
        assert (counts.substitutions, counts.deletions, counts.insertions) == (1, 0, 0)
        assert counts.distance == oracle_distance(
            ("see", "the", "knight"), ("see", "the", "night"))

    def test_empty_ref_all_insertions(self):
        counts = align(seq([]), seq(["a", "b", "c"]))
        assert (counts.substitutions, counts.deletions, counts.insertions) == (0, 0, 3)

    def test_empty_hyp_all_deletions(self):
        counts = align(seq(["a", "b"]), seq([]))
        assert (counts.substitutions, counts.deletions, counts.insertions) == (0, 2, 0)

    def test_mode_mismatch(self):
        with pytest.raises(ModeMismatch):
            align(seq(["a"], "word"), seq(["a"], "char"))

    def test_count_identities(self):
        rng = random.Random(7)
        for _ in range(200):
            a = [rng.choice("xyz") for _ in range(rng.randrange(9))]
            b = [rng.choice("xyz") for _ in range(rng.randrange(9))]
            c = align(seq(a), seq(b))
            assert c.hits + c.substitutions + c.deletions == c.ref_len
            assert c.hits + c.substitutions + c.insertions == c.hyp_len

    def test_exhaustive_oracle_equivalence_small(self):
        alphabet = "abc"
        for n, m in itertools.product(range(4), range(4)):
            for a in itertools.product(alphabet, repeat=n):
                for b in itertools.product(alphabet, repeat=m):
                    assert align(seq(a), seq(b)).distance == oracle_distance(a, b)

    def test_symmetry_under_swap(self):
        rng = random.Random(3)
        for _ in range(100):
            a = [rng.choice("ab") for _ in range(rng.randrange(7))]
            b = [rng.choice("ab") for _ in range(rng.randrange(7))]
            fwd, rev = align(seq(a), seq(b)), align(seq(b), seq(a))
            assert fwd.distance == rev.distance
            assert fwd.deletions == rev.insertions
            assert fwd.insertions == rev.deletions

    def test_triangle_inequality(self):
        rng = random.Random(11)
        for _ in range(100):
            a, b, c = (
                [rng.choice("abc") for _ in range(rng.randrange(6))] for _ in range(3))
            ab = align(seq(a), seq(b)).distance
            bc = align(seq(b), seq(c)).distance
            ac = align(seq(a), seq(c)).distance
            assert ac <= ab + bc

    def test_distance_bounds(self):
        rng = random.Random(13)
        for _ in range(100):
            a = [rng.choice("ab") for _ in range(rng.randrange(8))]
            b = [rng.choice("ab") for _ in range(rng.randrange(8))]
            d = align(seq(a), seq(b)).distance
            assert abs(len(a) - len(b)) <= d <= max(len(a), len(b), 0) or (not a and not b and d == 0)


class TestTokenErrorRate:
    def test_identical_is_zero(self):
        assert token_error_rate(seq(["a", "b"]), seq(["a", "b"])) == 0.0

    def test_one_third(self):
        got = token_error_rate(seq(["see", "the", "knight"]), seq(["see", "the", "night"]))
        assert got == pytest.approx(1 / 3)

    def test_mixed_mode_mer(self):
        ref = tokenize(normalize("我喜欢taylor swift"), "mixed")
        hyp = tokenize(normalize("我喜欢tailor swift"), "mixed")
        # one substitution over five tokens (brute-force oracle confirms)
        assert oracle_distance(ref.tokens, hyp.tokens) == 1
        assert token_error_rate(ref, hyp) == pytest.approx(0.2)

    def test_empty_reference_raises(self):
        with pytest.raises(EmptyReference):
            token_error_rate(seq([]), seq(["a"]))

    def test_can_exceed_one(self):
        assert token_error_rate(seq(["a"]), seq(["b", "c", "d"])) == 3.0

    def test_empty_hypothesis_rate_one(self):
        assert token_error_rate(seq(["a", "b"]), seq([])) == 1.0


class TestSentenceErrorRate:
    def test_all_identical(self):
        pairs = [(seq(["a"]), seq(["a"]))] * 3
        assert sentence_error_rate(pairs) == 0.0

    def test_all_differing(self):
        pairs = [(seq(["a"]), seq(["b"]))] * 2
        assert sentence_error_rate(pairs) == 1.0

    def test_one_of_four(self):
        pairs = [(seq(["a"]), seq(["a"]))] * 3 + [(seq(["a"]), seq(["b"]))]
        assert sentence_error_rate(pairs) == 0.25

    def test_empty_batch(self):
        with pytest.raises(EmptyBatch):
            sentence_error_rate([])


class TestS2er:
    def test_all_equivalent(self):
        assert s2er([1, 1, 1, 1]) == 0.0

    def test_all_mismatched(self):
        assert s2er([0, 0]) == 1.0

    def test_quarter(self):
        assert s2er([1, 1, 0, 1]) == 0.25

    def test_empty(self):
        with pytest.raises(EmptyBatch):
            s2er([])

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            JudgeOutcomeVector((0, 2))

    @given(st.lists(st.sampled_from([0, 1]), min_size=1, max_size=50))
    def test_equals_one_minus_mean(self, outcomes):
        expected = Fraction(sum(1 - o for o in outcomes), len(outcomes))
        assert abs(s2er(outcomes) - float(expected)) < 1e-15

    @given(st.lists(st.sampled_from([0, 1]), min_size=1, max_size=30),
           st.randoms(use_true_random=False))
    def test_permutation_invariant(self, outcomes, rng):
        shuffled = list(outcomes)
        rng.shuffle(shuffled)
        assert s2er(shuffled) == s2er(outcomes)

    @given(st.integers(min_value=1, max_value=200))
    def test_unanimous(self, n):
        assert s2er([1] * n) == 0.0
        assert s2er([0] * n) == 1.0

    def test_exact_match_judge_equals_ser(self):
        rng = random.Random(42)
        for _ in range(100):
            pairs = []
            outcomes = []
            for _ in range(rng.randrange(1, 12)):
                ref = [rng.choice("ab") for _ in range(rng.randrange(1, 5))]
                hyp = [rng.choice("ab") for _ in range(rng.randrange(5))]
                pairs.append((seq(ref), seq(hyp)))
                outcomes.append(1 if list(ref) == list(hyp) else 0)
            assert s2er(outcomes) == sentence_error_rate(pairs)


class TestPearson:
    def test_perfect_positive(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-12)

    def test_perfect_negative(self):
        assert pearson([1, 2, 3], [6, 4, 2]) == pytest.approx(-1.0, abs=1e-12)

    def test_hand_evaluated_case(self):
        # closed-form sums: cov 4, var_x 5, var_y 5 -> 4/5
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)

    def test_zero_variance(self):
        with pytest.raises(DegenerateInput):
            pearson([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        with pytest.raises(ModeMismatch):
            pearson([1, 2], [1, 2, 3])

    @given(
        st.lists(st.floats(min_value=-100, max_value=100), min_size=3, max_size=20),
        st.floats(min_value=-5, max_value=5).filter(lambda a: abs(a) > 1e-3),
        st.floats(min_value=-10, max_value=10),
    )
    @settings(max_examples=300)
    def test_affine_invariance(self, x, a, b):
        n = len(x)
        y = list(range(n))
        try:
            base = pearson(x, y)
        except DegenerateInput:
            return
        scaled = pearson([a * v + b for v in x], y)
        sign = 1.0 if a > 0 else -1.0
        assert scaled == pytest.approx(sign * base, abs=1e-9)
