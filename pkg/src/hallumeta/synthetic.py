"""Synthetic data with known structure for end-to-end checks and demos.

Two generators:

* ``synthetic_score_matrix`` fabricates a base-scorer matrix around a
  latent binary state, with two informative scorers, one weak scorer, and
  one pure-noise scorer.  Gold is a noisy blend of the informative pair,
  so it concentrates near 0 and 1.  Against such bimodal gold a uniform
  scorer's MAE sits near 0.43, well above an informative scorer's, which
  is what makes the MAE filter's behaviour testable.

* ``synthetic_records`` fabricates text records whose hypotheses either
  share or avoid the reference vocabulary, so lexical scorers carry real
  signal and a full offline pipeline run (score, train, predict) works.
"""

from __future__ import annotations

import numpy as np

from .dataset import Dataset, Record, TaskType, Track
from .scorers.panel import ScoreMatrix, ScorerId

_WORDS_FAITHFUL = (
    "river", "bridge", "stone", "valley", "meadow", "forest", "harbor", "lantern",
    "garden", "mountain", "willow", "breeze", "copper", "saddle", "mill", "orchard",
)

_WORDS_DIVERGENT = (
    "quasar", "plasma", "neutrino", "galaxy", "comet", "nebula", "photon", "meteor",
    "aurora", "eclipse", "quark", "pulsar", "cosmos", "asteroid", "orbit", "corona",
)


def synthetic_score_matrix(
    n: int = 1000, seed: int = 0
) -> tuple[ScoreMatrix, np.ndarray]:
    """Score matrix with columns (strong, strong, weak, noise) plus gold.

    The latent state sits at 0.05 or 0.95, keeping gold bimodal.  Gold is
    0.6 s1 + 0.4 s2 plus N(0, 0.05) noise; that noise term is the
    unlearnable part, so the informative scorers carry enough
    within-cluster spread (sd 0.12 and 0.15) that the learnable share of
    the gold ordering stays large and out-of-fold rank correlation can
    clear 0.9.
    """
    rng = np.random.default_rng(seed)
    h = rng.integers(0, 2, size=n).astype(np.float64)
    center = 0.05 + 0.9 * h
    s1 = np.clip(center + rng.normal(0.0, 0.12, n), 0.0, 1.0)
    s2 = np.clip(center + rng.normal(0.0, 0.15, n), 0.0, 1.0)
    s3 = np.clip(center + rng.normal(0.0, 0.30, n), 0.0, 1.0)
    s4 = rng.uniform(0.0, 1.0, n)
    gold = np.clip(0.6 * s1 + 0.4 * s2 + rng.normal(0.0, 0.05, n), 0.0, 1.0)
    values = np.column_stack([s1, s2, s3, s4])
    matrix = ScoreMatrix(
        record_ids=tuple(f"synth-{i}" for i in range(n)),
        scorer_ids=(
            ScorerId("strong-a"),
            ScorerId("strong-b"),
            ScorerId("weak"),
            ScorerId("noise"),
        ),
        values=values,
        missing=np.zeros((n, 4), dtype=bool),
    )
    return matrix, gold


_TASK_CYCLE = (
    TaskType.DEFINITION_MODELING,
    TaskType.MACHINE_TRANSLATION,
    TaskType.PARAPHRASE_GENERATION,
)


def synthetic_records(
    n: int = 120,
    seed: int = 0,
    *,
    track: Track = Track.MODEL_AGNOSTIC,
    split: str = "synth",
    labeled: bool = True,
) -> Dataset:
    """Text records where hallucinated hypotheses avoid the reference words."""
    rng = np.random.default_rng(seed)
    faithful = np.array(_WORDS_FAITHFUL)
    divergent = np.array(_WORDS_DIVERGENT)
    records = []
    for i in range(n):
        task = _TASK_CYCLE[i % len(_TASK_CYCLE)]
        base = rng.choice(faithful, size=6, replace=False)
        tgt = " ".join(base)
        src = " ".join(base[rng.permutation(6)])
        hallucinated = bool(rng.integers(0, 2))
        if hallucinated:
            hyp_words = rng.choice(divergent, size=6, replace=False)
            prob = float(np.clip(rng.normal(0.9, 0.05), 0.55, 1.0))
        else:
            keep = base[rng.permutation(6)[:5]]
            hyp_words = np.concatenate([keep, rng.choice(divergent, size=1)])
            prob = float(np.clip(rng.normal(0.1, 0.05), 0.0, 0.45))
        records.append(
            Record(
                id=f"{split}-{i}",
                task=task,
                src=src,
                hyp=" ".join(hyp_words),
                tgt=tgt,
                model="synthetic-v0" if track is Track.MODEL_AWARE else None,
                gold_prob=prob if labeled else None,
                gold_label=hallucinated if labeled else None,
            )
        )
    return Dataset(records=tuple(records), track=track, split=split)
