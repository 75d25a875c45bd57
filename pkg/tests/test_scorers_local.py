import pytest
from hypothesis import given
from hypothesis import strategies as st

from hallumeta.errors import DegenerateHypothesis, EmptyHypothesis
from hallumeta.scorers.local import ngram_consistency_score, ngrams, overlap_score, tokenize

WORD = st.text(st.characters(codec="ascii", categories=("Ll",)), min_size=1, max_size=8)
SENTENCE = st.lists(WORD, min_size=1, max_size=12).map(" ".join)


class TestTokenize:
    def test_lowercases_and_splits_on_punctuation(self):
        assert tokenize("The cat, the MAT!") == ["the", "cat", "the", "mat"]

    def test_unicode_words_kept(self):
        assert tokenize("Ünïcode wörds") == ["ünïcode", "wörds"]

    def test_ngrams_known(self):
        assert ngrams(["a", "b", "c"], 2) == {("a", "b"), ("b", "c")}


class TestOverlapScore:
    def test_known_value(self):
        # hyp {a,b,c,d} vs ref {a,b,x,y}: 2 shared / min(4,4) -> score 0.5
        assert overlap_score("a b c d", "a b x y") == pytest.approx(0.5)

    def test_identical_texts_score_zero(self):
        assert overlap_score("the same words", "the same words") == 0.0

    def test_disjoint_texts_score_one(self):
        assert overlap_score("alpha beta", "gamma delta") == 1.0

    def test_empty_hypothesis_raises(self):
        with pytest.raises(EmptyHypothesis):
            overlap_score("...", "a reference")

    def test_empty_reference_scores_one(self):
        assert overlap_score("some words", "") == 1.0

    @given(SENTENCE)
    def test_self_overlap_is_zero(self, text):
        assert overlap_score(text, text) == 0.0

    @given(SENTENCE, SENTENCE)
    def test_score_in_unit_interval(self, hyp, ref):
        assert 0.0 <= overlap_score(hyp, ref) <= 1.0

    @given(SENTENCE, SENTENCE)
    def test_symmetric_in_token_sets(self, a, b):
        assert overlap_score(a, b) == pytest.approx(overlap_score(b, a))


class TestNgramConsistency:
    def test_known_value(self):
        # hyp bigrams {the-cat, cat-sat}; sample 1 hits 1 of 2, sample 2 hits 0
        score = ngram_consistency_score("the cat sat", ["the cat ran", "a dog sat"], 2)
        assert score == pytest.approx(0.75)

    def test_perfectly_supported_hypothesis(self):
        assert ngram_consistency_score("a b c", ["a b c", "x a b c y"], 2) == 0.0

    def test_accepts_sample_set_objects(self):
        class Bag:
            samples = ("the cat ran", "a dog sat")

        assert ngram_consistency_score("the cat sat", Bag(), 2) == pytest.approx(0.75)

    def test_short_hypothesis_raises_without_clamp(self):
        with pytest.raises(DegenerateHypothesis):
            ngram_consistency_score("word", ["word word word"], 3)

    def test_clamp_reduces_n_to_hypothesis_length(self):
        score = ngram_consistency_score("word", ["word word"], 3, clamp_n=True)
        assert score == 0.0

    def test_empty_hypothesis_raises(self):
        with pytest.raises(EmptyHypothesis):
            ngram_consistency_score("!!!", ["sample"], 1)

    def test_invalid_n_rejected(self):
        with pytest.raises(ValueError):
            ngram_consistency_score("a b", ["a b"], 0)

    def test_no_samples_rejected(self):
        with pytest.raises(ValueError):
            ngram_consistency_score("a b", [], 1)

    @given(st.lists(SENTENCE, min_size=2, max_size=5), SENTENCE, st.integers(1, 3))
    def test_sample_order_irrelevant(self, samples, hyp, n):
        forward = ngram_consistency_score(hyp, samples, n, clamp_n=True)
        backward = ngram_consistency_score(hyp, list(reversed(samples)), n, clamp_n=True)
        assert forward == pytest.approx(backward)

    @given(st.lists(SENTENCE, min_size=1, max_size=5), SENTENCE, st.integers(1, 3))
    def test_score_in_unit_interval(self, samples, hyp, n):
        assert 0.0 <= ngram_consistency_score(hyp, samples, n, clamp_n=True) <= 1.0
