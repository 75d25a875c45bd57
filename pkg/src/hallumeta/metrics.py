"""Evaluation quantities: rank correlation, regression errors, classification.

Conventions used throughout:

* The positive class is the string label ``"Hallucination"``.
* Scores and gold probabilities live in [0, 1]; a score turns into a label
  via a strict ``> threshold`` comparison (default 0.5).
* Metrics with a zero denominator are reported as *absent* (``None``), never
  silently coerced to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantVector, OutOfRange, TooFewPoints

POSITIVE_LABEL = "Hallucination"
NEGATIVE_LABEL = "Not Hallucination"


@dataclass(frozen=True)
class PredictionSet:
    """Aligned predicted scores and gold probabilities for a set of records."""

    ids: tuple[str, ...]
    predicted: np.ndarray
    gold: np.ndarray

    def __post_init__(self):
        pred = np.asarray(self.predicted, dtype=np.float64)
        gold = np.asarray(self.gold, dtype=np.float64)
        if len(self.ids) != pred.shape[0] or pred.shape != gold.shape:
            raise ValueError("ids, predicted and gold must have equal lengths")
        if pred.shape[0] < 1:
            raise TooFewPoints("a prediction set needs at least one point")
        if np.any((gold < 0.0) | (gold > 1.0)):
            raise OutOfRange("gold probabilities must lie in [0, 1]")
        object.__setattr__(self, "predicted", pred)
        object.__setattr__(self, "gold", gold)

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 counts with "Hallucination" as the positive class."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fn", "fp", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.total < 1:
            raise ValueError("confusion matrix must count at least one record")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn}


def _paired(predicted, gold) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(predicted, dtype=np.float64).reshape(-1)
    b = np.asarray(gold, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} predicted vs {b.shape[0]} gold")
    return a, b


def rank_average(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values receive the average of their rank span."""
    a = np.asarray(values, dtype=np.float64).reshape(-1)
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(a.shape[0], dtype=np.float64)
    i = 0
    n = a.shape[0]
    while i < n:
        j = i
        while j + 1 < n and a[order[j + 1]] == a[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman_rho(predicted, gold) -> float:
    """Rank correlation between predicted and gold values.

    Ties get average ranks and the result is the Pearson correlation of the
    two rank vectors; on tie-free input this coincides with the classic
    1 - 6*sum(d^2)/(n(n^2-1)) closed form.
    """
    a, b = _paired(predicted, gold)
    if a.shape[0] < 2:
        raise TooFewPoints("spearman_rho needs at least two points")
    return _pearson(rank_average(a), rank_average(b))


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    denom = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if denom == 0.0:
        raise ConstantVector("correlation undefined on a constant vector")
    return float(np.dot(a, b) / denom)


def mae(predicted, gold) -> float:
    """Mean absolute error between predicted and gold values."""
    a, b = _paired(predicted, gold)
    if a.shape[0] < 1:
        raise TooFewPoints("mae needs at least one point")
    return float(np.mean(np.abs(b - a)))


def rmse(predicted, gold) -> float:
    """Root mean squared error between predicted and gold values."""
    a, b = _paired(predicted, gold)
    if a.shape[0] < 1:
        raise TooFewPoints("rmse needs at least one point")
    return float(np.sqrt(np.mean((b - a) ** 2)))


def r_squared(predicted, gold) -> float:
    """Coefficient of determination, 1 - SS_res / SS_tot."""
    a, b = _paired(predicted, gold)
    if a.shape[0] < 2:
        raise TooFewPoints("r_squared needs at least two points")
    ss_tot = float(np.sum((b - b.mean()) ** 2))
    if ss_tot == 0.0:
        raise ConstantVector("r_squared undefined for constant gold values")
    ss_res = float(np.sum((b - a) ** 2))
    return 1.0 - ss_res / ss_tot


def classify(score: float, threshold: float = 0.5) -> str:
    """Map a hallucination score to a binary label, strict > threshold."""
    if not 0.0 <= score <= 1.0:
        raise OutOfRange(f"score {score!r} outside [0, 1]")
    return POSITIVE_LABEL if score > threshold else NEGATIVE_LABEL


def confusion_from_predictions(predicted, gold, threshold: float = 0.5) -> ConfusionMatrix:
    """Threshold both vectors at `threshold` (strict >) and count the cells."""
    a, b = _paired(predicted, gold)
    pred_pos = a > threshold
    gold_pos = b > threshold
    return ConfusionMatrix(
        tp=int(np.sum(pred_pos & gold_pos)),
        fn=int(np.sum(~pred_pos & gold_pos)),
        fp=int(np.sum(pred_pos & ~gold_pos)),
        tn=int(np.sum(~pred_pos & ~gold_pos)),
    )


def _ratio(num: int, den: int) -> float | None:
    return num / den if den > 0 else None


def _f1(precision: float | None, recall: float | None) -> float | None:
    if precision is None or recall is None or precision + recall == 0.0:
        return None
    return 2.0 * precision * recall / (precision + recall)


# Note on the two metric blocks below: precision/recall for the positive
# class follow the standard reading (precision = tp / predicted-positive,
# recall = tp / actual-positive).  The negative-class block keeps the roles
# of the two error cells fixed instead of swapping them: false positives
# count against negative-class precision and false negatives against its
# recall.  Published scoreboards differ on which class they treat as
# positive, and the two conventions give materially different numbers on the
# same matrix, so the report always carries both blocks plus a note.


def classification_report(cm: ConfusionMatrix) -> dict:
    """Accuracy plus per-class precision/recall/F1 from a confusion matrix.

    Undefined ratios (zero denominator) are reported as None.
    """
    precision_pos = _ratio(cm.tp, cm.tp + cm.fp)
    recall_pos = _ratio(cm.tp, cm.tp + cm.fn)
    precision_neg = _ratio(cm.tn, cm.tn + cm.fp)
    recall_neg = _ratio(cm.tn, cm.tn + cm.fn)
    return {
        "accuracy": (cm.tp + cm.tn) / cm.total,
        "precision_hallucination": precision_pos,
        "recall_hallucination": recall_pos,
        "f1_hallucination": _f1(precision_pos, recall_pos),
        "precision_not_hallucination": precision_neg,
        "recall_not_hallucination": recall_neg,
        "f1_not_hallucination": _f1(precision_neg, recall_neg),
    }


CLASS_METRICS_NOTE = (
    "Both per-class metric blocks are reported because headline "
    "precision/recall/F1 depend on which class a consumer treats as "
    "positive; on the same confusion matrix the two readings differ."
)


@dataclass(frozen=True)
class EvalReport:
    """Full metric suite for one prediction set."""

    n: int
    spearman: float | None
    mae: float
    rmse: float
    r_squared: float | None
    confusion: ConfusionMatrix
    accuracy: float
    precision_hallucination: float | None
    recall_hallucination: float | None
    f1_hallucination: float | None
    precision_not_hallucination: float | None
    recall_not_hallucination: float | None
    f1_not_hallucination: float | None
    threshold: float = 0.5
    note: str = CLASS_METRICS_NOTE
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        """Machine-readable form; key names are part of the CLI contract."""
        out = {
            "n": self.n,
            "spearman_rho": self.spearman,
            "mae": self.mae,
            "rmse": self.rmse,
            "r_squared": self.r_squared,
            "accuracy": self.accuracy,
            "precision_hallucination": self.precision_hallucination,
            "recall_hallucination": self.recall_hallucination,
            "f1_hallucination": self.f1_hallucination,
            "precision_not_hallucination": self.precision_not_hallucination,
            "recall_not_hallucination": self.recall_not_hallucination,
            "f1_not_hallucination": self.f1_not_hallucination,
            "confusion_matrix": self.confusion.to_dict(),
            "classify_threshold": self.threshold,
            "note": self.note,
        }
        if self.extras:
            out["extras"] = dict(self.extras)
        return out

    def render_text(self) -> str:
        def fmt(v):
            return "n/a" if v is None else f"{v:.4f}"

        cm = self.confusion
        lines = [
            f"records evaluated     {self.n}",
            f"spearman rho          {fmt(self.spearman)}",
            f"mae                   {fmt(self.mae)}",
            f"rmse                  {fmt(self.rmse)}",
            f"r_squared             {fmt(self.r_squared)}",
            f"accuracy              {fmt(self.accuracy)}",
            f"confusion (tp fn fp tn)  {cm.tp} {cm.fn} {cm.fp} {cm.tn}",
            "class '{}':".format(POSITIVE_LABEL),
            f"  precision {fmt(self.precision_hallucination)}"
            f"  recall {fmt(self.recall_hallucination)}"
            f"  f1 {fmt(self.f1_hallucination)}",
            "class '{}':".format(NEGATIVE_LABEL),
            f"  precision {fmt(self.precision_not_hallucination)}"
            f"  recall {fmt(self.recall_not_hallucination)}"
            f"  f1 {fmt(self.f1_not_hallucination)}",
            f"note: {self.note}",
        ]
        return "\n".join(lines)


def evaluate_predictions(p: PredictionSet, threshold: float = 0.5) -> EvalReport:
    """Compute the full EvalReport for a prediction set.

    Spearman and R-squared turn into None (instead of raising) when the
    inputs make them undefined, so degenerate models still get a report.
    """
    try:
        rho = spearman_rho(p.predicted, p.gold)
    except (ConstantVector, TooFewPoints):
        rho = None
    try:
        r2 = r_squared(p.predicted, p.gold)
    except (ConstantVector, TooFewPoints):
        r2 = None
    cm = confusion_from_predictions(p.predicted, p.gold, threshold)
    rep = classification_report(cm)
    return EvalReport(
        n=len(p),
        spearman=rho,
        mae=mae(p.predicted, p.gold),
        rmse=rmse(p.predicted, p.gold),
        r_squared=r2,
        confusion=cm,
        threshold=threshold,
        **rep,
    )
