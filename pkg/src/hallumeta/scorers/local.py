"""Deterministic local scorers: lexical overlap and n-gram consistency.

Both return hallucination scores in [0, 1] with 1 meaning "no support".
Tokenization is a lowercased split on whitespace and punctuation.
"""

from __future__ import annotations

import re
from typing import Iterable

from ..errors import DegenerateHypothesis, EmptyHypothesis

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def ngrams(tokens: list[str], n: int) -> set[tuple[str, ...]]:
    return {tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)}


def overlap_score(hyp: str, ref: str) -> float:
    """1 minus the token-set overlap coefficient between hyp and ref.

    0 means every hypothesis token family appears in the reference (up to
    the shorter side), 1 means no lexical support at all.
    """
    hyp_tokens = set(tokenize(hyp))
    if not hyp_tokens:
        raise EmptyHypothesis("hypothesis has no tokens")
    ref_tokens = set(tokenize(ref))
    if not ref_tokens:
        return 1.0
    coeff = len(hyp_tokens & ref_tokens) / min(len(hyp_tokens), len(ref_tokens))
    return 1.0 - coeff


def ngram_consistency_score(
    hyp: str,
    samples: Iterable[str],
    n: int,
    *,
    clamp_n: bool = False,
) -> float:
    """Mean over samples of the fraction of hyp n-grams absent from the sample.

    Higher means the hypothesis is inconsistent with alternative generations
    and therefore more likely hallucinated.  With ``clamp_n=True`` a
    hypothesis shorter than n tokens falls back to n = token count (the
    pipeline uses this; one-word definitions are common), otherwise it
    raises DegenerateHypothesis.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    sample_texts = list(samples.samples) if hasattr(samples, "samples") else list(samples)
    if not sample_texts:
        raise ValueError("need at least one sample")
    hyp_tokens = tokenize(hyp)
    if not hyp_tokens:
        raise EmptyHypothesis("hypothesis has no tokens")
    if len(hyp_tokens) < n:
        if not clamp_n:
            raise DegenerateHypothesis(
                f"hypothesis has {len(hyp_tokens)} tokens, fewer than n={n}"
            )
        n = len(hyp_tokens)
    hyp_grams = ngrams(hyp_tokens, n)
    total = 0.0
    for text in sample_texts:
        found = len(hyp_grams & ngrams(tokenize(text), n))
        total += 1.0 - found / len(hyp_grams)
    return total / len(sample_texts)
