"""End-to-end orchestration: score, filter, train, predict, evaluate.

The flow mirrors how the pieces compose:

    records -> scorer panel -> score matrix
            -> per-scorer MAE filter (strict < threshold)
            -> cross-validated meta-regressor search + refit
            -> clipped probability predictions -> labels -> submission

Artifacts (matrix, model, report, submission) are written atomically via
a temp file + rename, carry no timestamps, and round-trip through JSON,
so reruns with identical inputs produce byte-identical files.  The scorer
cache is the one deliberately mutable artifact and is never rolled back.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .dataset import (
    Dataset,
    TaskType,
    Track,
    gold_vector,
    has_labels,
    load_records,
    record_to_json,
)
from .errors import (
    AllFiltered,
    ConfigError,
    ConstantVector,
    IdMismatch,
    NoLabels,
    PanelMismatch,
    TooFewPoints,
)
from .errors import DimensionMismatch
from .metrics import (
    PredictionSet,
    classify,
    evaluate_predictions,
    mae,
    spearman_rho,
)
from .meta.io import trained_meta_from_dict, trained_meta_to_dict
from .meta.search import default_grids, train_and_select
from .meta.specs import CvConfig, TrainedMeta, spec_from_dict
from .scorers.cache import ScorerCache
from .scorers.panel import ScoreMatrix, ScorerId, build_score_matrix, panel_from_config

logger = logging.getLogger(__name__)

PROB_KEY = "p(Hallucination)"

TASK_ORDER = (
    TaskType.DEFINITION_MODELING,
    TaskType.MACHINE_TRANSLATION,
    TaskType.PARAPHRASE_GENERATION,
)

MODEL_FORMAT = "hallumeta-model"
MODEL_VERSION = 1
REPORT_FORMAT = "hallumeta-report"

SUBMISSION_SCHEMA = {
    "type": "object",
    "required": ["id", "task", "src", "hyp", "label", PROB_KEY],
    "properties": {
        "id": {"type": "string"},
        "task": {"enum": [t.value for t in TASK_ORDER]},
        "src": {"type": "string"},
        "hyp": {"type": "string"},
        "tgt": {"type": "string"},
        "ref": {"enum": ["src", "tgt", "either"]},
        "model": {"type": "string"},
        "label": {"enum": ["Hallucination", "Not Hallucination"]},
        PROB_KEY: {"type": "number", "minimum": 0.0, "maximum": 1.0},
    },
    "additionalProperties": False,
}

_SUBMISSION_VALIDATOR = jsonschema.Draft202012Validator(SUBMISSION_SCHEMA)


# --- configuration ------------------------------------------------------------


@dataclass
class PipelineConfig:
    """Declarative description of one run; the CLI builds this from JSON."""

    records: str | None = None
    track: str = "agnostic"
    split: str = "dev"
    panel: list = field(default_factory=list)
    scores: str | None = None
    cache: str | None = None
    model: str | None = None
    submission: str | None = None
    report: str | None = None
    filter_threshold: float | None = None
    classify_threshold: float | None = None
    cv_k: int = 5
    seed: int = 0
    append_task_features: bool = False
    grids: dict | None = None
    base_dir: str = "."

    _KNOWN = (
        "records",
        "track",
        "split",
        "panel",
        "scores",
        "cache",
        "model",
        "submission",
        "report",
        "filter_threshold",
        "classify_threshold",
        "cv_k",
        "seed",
        "append_task_features",
        "grids",
    )

    @classmethod
    def from_dict(cls, obj: dict, base_dir: str | Path = ".") -> "PipelineConfig":
        if not isinstance(obj, dict):
            raise ConfigError("configuration must be a JSON object")
        obj = dict(obj)
        kwargs = {}
        for key in cls._KNOWN:
            if key in obj:
                kwargs[key] = obj.pop(key)
        if obj:
            raise ConfigError(f"unknown configuration keys: {sorted(obj)}")
        cfg = cls(base_dir=str(base_dir), **kwargs)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.track not in ("agnostic", "aware"):
            raise ConfigError(f"track must be 'agnostic' or 'aware', got {self.track!r}")
        for name in ("filter_threshold", "classify_threshold"):
            val = getattr(self, name)
            if val is not None and not 0.0 <= float(val) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {val!r}")
        if self.cv_k < 2:
            raise ConfigError(f"cv_k must be >= 2, got {self.cv_k}")
        if not isinstance(self.panel, list):
            raise ConfigError("panel must be a list of scorer entries")
        if self.grids is not None and not isinstance(self.grids, dict):
            raise ConfigError("grids must map family name to a candidate list")

    def path(self, name: str) -> Path | None:
        raw = getattr(self, name)
        if raw is None:
            return None
        p = Path(raw)
        return p if p.is_absolute() else Path(self.base_dir) / p


def parse_grids(raw: dict | None) -> dict[str, list]:
    if raw is None:
        return default_grids()
    grids: dict[str, list] = {}
    for family, entries in raw.items():
        if family not in ("forest", "gbt", "mlp"):
            raise ConfigError(f"unknown grid family {family!r}")
        try:
            grids[family] = [spec_from_dict(family, e) for e in entries]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad {family} grid entry: {exc}") from exc
    return grids


# --- atomic artifact writers --------------------------------------------------


def _write_bytes_atomic(data: bytes, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(obj: dict, path: Path) -> None:
    _write_bytes_atomic(
        (json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8"), path
    )


def write_jsonl_atomic(rows: list[dict], path: Path) -> None:
    text = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows)
    _write_bytes_atomic(text.encode("utf-8"), path)


# --- base-scorer evaluation and filtering -------------------------------------


@dataclass(frozen=True)
class BaseEval:
    """Agreement of one base scorer with gold, over its unmasked rows."""

    scorer: ScorerId
    n_scored: int
    mae: float | None
    spearman: float | None
    kept: bool

    def to_dict(self) -> dict:
        return {
            "scorer": str(self.scorer),
            "n_scored": self.n_scored,
            "mae": self.mae,
            "spearman": self.spearman,
            "kept": self.kept,
        }


def evaluate_base_models(
    matrix: ScoreMatrix, gold: np.ndarray, filter_threshold: float
) -> list[BaseEval]:
    """Per-scorer MAE/Spearman against gold; kept means MAE strictly below
    the filter threshold.  Masked cells are excluded pairwise."""
    gold = np.asarray(gold, dtype=np.float64)
    if gold.shape[0] != matrix.n_records:
        raise IdMismatch(
            f"gold vector has {gold.shape[0]} rows, matrix has {matrix.n_records}"
        )
    out = []
    for j, sid in enumerate(matrix.scorer_ids):
        vals, miss = matrix.column(j)
        ok = ~miss
        n = int(ok.sum())
        if n == 0:
            out.append(BaseEval(sid, 0, None, None, False))
            continue
        err = mae(vals[ok], gold[ok])
        try:
            rho = spearman_rho(vals[ok], gold[ok])
        except (ConstantVector, TooFewPoints):
            rho = None
        out.append(BaseEval(sid, n, err, rho, err < filter_threshold))
    return out


def filter_scorers(matrix: ScoreMatrix, evals: list[BaseEval]) -> ScoreMatrix:
    keep = [e.scorer for e in evals if e.kept]
    if not keep:
        worst = ", ".join(
            f"{e.scorer}: mae={'n/a' if e.mae is None else format(e.mae, '.4f')}" for e in evals
        )
        raise AllFiltered(
            "every base scorer was filtered out; raise filter_threshold or fix the panel "
            f"({worst})"
        )
    return matrix.select_scorers(keep)


# --- feature assembly ---------------------------------------------------------


def column_medians(values: np.ndarray, missing: np.ndarray) -> np.ndarray:
    """Per-column median over unmasked rows; 0.5 for an all-masked column."""
    meds = np.empty(values.shape[1], dtype=np.float64)
    for j in range(values.shape[1]):
        col = values[~missing[:, j], j]
        meds[j] = float(np.median(col)) if col.size else 0.5
    return meds


def impute_missing(values: np.ndarray, missing: np.ndarray, medians: np.ndarray) -> np.ndarray:
    if medians.shape[0] != values.shape[1]:
        raise DimensionMismatch(
            f"{medians.shape[0]} medians for {values.shape[1]} columns"
        )
    out = values.copy()
    for j in range(values.shape[1]):
        out[missing[:, j], j] = medians[j]
    return out


def task_features(dataset: Dataset) -> np.ndarray:
    """One-hot task columns in the fixed order DM, MT, PG."""
    X = np.zeros((len(dataset), len(TASK_ORDER)), dtype=np.float64)
    pos = {task: i for i, task in enumerate(TASK_ORDER)}
    for i, r in enumerate(dataset):
        X[i, pos[r.task]] = 1.0
    return X


def design_matrix(
    matrix: ScoreMatrix,
    medians: np.ndarray,
    dataset: Dataset | None,
    append_task_features: bool,
) -> np.ndarray:
    X = impute_missing(matrix.values, matrix.missing, medians)
    if append_task_features:
        if dataset is None:
            raise ConfigError("task features requested but no records were given")
        X = np.hstack([X, task_features(dataset)])
    return X


# --- model bundle -------------------------------------------------------------


@dataclass
class ModelBundle:
    """Everything needed to reproduce predictions: features + regressor."""

    meta: TrainedMeta
    scorer_ids: tuple[ScorerId, ...]
    medians: np.ndarray
    append_task_features: bool
    filter_threshold: float
    classify_threshold: float
    cv_k: int
    seed: int
    base_models: list[dict]

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "features": {
                "scorers": [{"name": s.name, "version": s.version} for s in self.scorer_ids],
                "medians": [float(v) for v in self.medians],
                "append_task_features": self.append_task_features,
                "task_order": [t.value for t in TASK_ORDER],
            },
            "meta": trained_meta_to_dict(self.meta),
            "training": {
                "filter_threshold": self.filter_threshold,
                "classify_threshold": self.classify_threshold,
                "cv_k": self.cv_k,
                "seed": self.seed,
                "base_models": self.base_models,
            },
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelBundle":
        if obj.get("format") != MODEL_FORMAT:
            raise ConfigError("not a model file")
        if obj.get("version") != MODEL_VERSION:
            raise ConfigError(f"unsupported model file version {obj.get('version')!r}")
        feats = obj["features"]
        training = obj.get("training", {})
        return cls(
            meta=trained_meta_from_dict(obj["meta"]),
            scorer_ids=tuple(ScorerId(s["name"], s["version"]) for s in feats["scorers"]),
            medians=np.asarray(feats["medians"], dtype=np.float64),
            append_task_features=bool(feats.get("append_task_features", False)),
            filter_threshold=float(training.get("filter_threshold", 0.5)),
            classify_threshold=float(training.get("classify_threshold", 0.5)),
            cv_k=int(training.get("cv_k", 5)),
            seed=int(training.get("seed", 0)),
            base_models=list(training.get("base_models", [])),
        )

    def save(self, path: Path) -> None:
        write_json_atomic(self.to_dict(), path)

    @classmethod
    def load(cls, path: str | Path) -> "ModelBundle":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


# --- prediction ---------------------------------------------------------------


def predict_probs(bundle: ModelBundle, matrix: ScoreMatrix, dataset: Dataset | None) -> np.ndarray:
    """Clipped [0, 1] hallucination probabilities for every matrix row."""
    absent = [str(s) for s in bundle.scorer_ids if s not in matrix.scorer_ids]
    if absent:
        raise PanelMismatch(
            f"score matrix lacks columns required by the model: {absent}"
        )
    sub = matrix.select_scorers(list(bundle.scorer_ids))
    if dataset is not None and sub.record_ids != tuple(r.id for r in dataset):
        raise IdMismatch("record ids in the score matrix do not match the records file")
    X = design_matrix(sub, bundle.medians, dataset, bundle.append_task_features)
    expected = getattr(bundle.meta.model, "n_features", X.shape[1])
    if X.shape[1] != expected:
        raise DimensionMismatch(f"model expects {expected} features, built {X.shape[1]}")
    return np.clip(bundle.meta.predict(X), 0.0, 1.0)


def submission_rows(dataset: Dataset, probs: np.ndarray, threshold: float) -> list[dict]:
    if len(dataset) != probs.shape[0]:
        raise IdMismatch(f"{probs.shape[0]} predictions for {len(dataset)} records")
    rows = []
    for r, p in zip(dataset, probs):
        obj = record_to_json(r)
        obj.pop("label", None)
        obj[PROB_KEY] = float(p)
        obj["label"] = classify(float(p), threshold)
        errors = sorted(_SUBMISSION_VALIDATOR.iter_errors(obj), key=str)
        if errors:
            raise ConfigError(f"submission row for {r.id} fails validation: {errors[0].message}")
        rows.append(obj)
    return rows


def validate_submission_file(path: str | Path) -> int:
    """Validate every line against the submission schema; returns row count."""
    count = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            errors = sorted(_SUBMISSION_VALIDATOR.iter_errors(obj), key=str)
            if errors:
                raise ConfigError(f"line {line_no}: {errors[0].message}")
            count += 1
    return count


# --- stage runners ------------------------------------------------------------


def _load_dataset(cfg: PipelineConfig):
    path = cfg.path("records")
    if path is None:
        raise ConfigError("this command needs a 'records' path")
    track = Track.MODEL_AGNOSTIC if cfg.track == "agnostic" else Track.MODEL_AWARE
    return load_records(path, track, cfg.split)


def _obtain_matrix(cfg: PipelineConfig, dataset: Dataset, *, allow_compute: bool = True) -> ScoreMatrix:
    scores_path = cfg.path("scores")
    if scores_path is not None and scores_path.exists():
        matrix = ScoreMatrix.load(scores_path)
        if matrix.record_ids != tuple(r.id for r in dataset):
            raise IdMismatch(
                "record ids in the score-matrix file do not match the records file"
            )
        return matrix
    if not allow_compute:
        raise ConfigError(f"score matrix not found: {scores_path}")
    cache = ScorerCache(cfg.path("cache"))
    panel = panel_from_config(cfg.panel, seed=cfg.seed, base_dir=cfg.base_dir)
    matrix = build_score_matrix(dataset, panel, cache)
    if scores_path is not None:
        write_json_atomic(matrix.to_dict(), scores_path)
    return matrix


def run_score(cfg: PipelineConfig) -> ScoreMatrix:
    """Score records with the configured panel and write the matrix."""
    dataset = _load_dataset(cfg)
    cache = ScorerCache(cfg.path("cache"))
    panel = panel_from_config(cfg.panel, seed=cfg.seed, base_dir=cfg.base_dir)
    matrix = build_score_matrix(dataset, panel, cache)
    scores_path = cfg.path("scores")
    if scores_path is not None:
        write_json_atomic(matrix.to_dict(), scores_path)
    return matrix


def run_train(cfg: PipelineConfig) -> tuple[ModelBundle, dict]:
    """Filter scorers, search the meta grids, refit, and write artifacts."""
    dataset = _load_dataset(cfg)
    if not has_labels(dataset):
        unlabeled = [r.id for r in dataset if r.gold_prob is None and r.gold_label is None]
        raise NoLabels(
            f"{len(unlabeled)} of {len(dataset)} records lack gold fields "
            f"(first few: {unlabeled[:3]}); training needs labels before any scoring"
        )
    gold = np.asarray(gold_vector(dataset), dtype=np.float64)

    matrix = _obtain_matrix(cfg, dataset)
    filter_threshold = 0.5 if cfg.filter_threshold is None else float(cfg.filter_threshold)
    classify_threshold = 0.5 if cfg.classify_threshold is None else float(cfg.classify_threshold)

    evals = evaluate_base_models(matrix, gold, filter_threshold)
    for e in evals:
        logger.info(
            "base scorer %s: n=%d mae=%s spearman=%s kept=%s",
            e.scorer,
            e.n_scored,
            "n/a" if e.mae is None else f"{e.mae:.4f}",
            "n/a" if e.spearman is None else f"{e.spearman:.4f}",
            e.kept,
        )
    kept = filter_scorers(matrix, evals)

    medians = column_medians(kept.values, kept.missing)
    X = design_matrix(kept, medians, dataset, cfg.append_task_features)
    grids = parse_grids(cfg.grids)
    cv = CvConfig(k=cfg.cv_k, seed=cfg.seed)
    tm = train_and_select(X, gold, grids, cv, seed=cfg.seed)
    logger.info(
        "selected %s (cv mae %.4f, oof spearman %s)",
        tm.family,
        tm.cv_mae_mean,
        "n/a" if tm.oof_spearman is None else f"{tm.oof_spearman:.4f}",
    )

    bundle = ModelBundle(
        meta=tm,
        scorer_ids=kept.scorer_ids,
        medians=medians,
        append_task_features=cfg.append_task_features,
        filter_threshold=filter_threshold,
        classify_threshold=classify_threshold,
        cv_k=cfg.cv_k,
        seed=cfg.seed,
        base_models=[e.to_dict() for e in evals],
    )
    model_path = cfg.path("model")
    if model_path is not None:
        bundle.save(model_path)

    oof = np.clip(np.asarray(tm.oof_predictions, dtype=np.float64), 0.0, 1.0)
    pset = PredictionSet(ids=tuple(kept.record_ids), predicted=oof, gold=gold)
    report = {
        "format": REPORT_FORMAT,
        "version": 1,
        "n_records": len(dataset),
        "base_models": [e.to_dict() for e in evals],
        "selection": {
            "family": tm.family,
            "cv_mae_mean": tm.cv_mae_mean,
            "cv_maes": list(tm.cv_maes),
            "oof_spearman": tm.oof_spearman,
            "candidates": tm.candidates,
        },
        "metrics": evaluate_predictions(pset, classify_threshold).to_dict(),
    }
    report_path = cfg.path("report")
    if report_path is not None:
        write_json_atomic(report, report_path)
    return bundle, report


def run_predict(cfg: PipelineConfig) -> list[dict]:
    """Apply a trained model to records and write a labeled submission."""
    model_path = cfg.path("model")
    if model_path is None:
        raise ConfigError("predict needs a 'model' path")
    bundle = ModelBundle.load(model_path)
    dataset = _load_dataset(cfg)
    matrix = _obtain_matrix(cfg, dataset)
    probs = predict_probs(bundle, matrix, dataset)
    threshold = (
        bundle.classify_threshold if cfg.classify_threshold is None else float(cfg.classify_threshold)
    )
    rows = submission_rows(dataset, probs, threshold)
    sub_path = cfg.path("submission")
    if sub_path is not None:
        write_jsonl_atomic(rows, sub_path)
    return rows


def run_evaluate(cfg: PipelineConfig) -> dict:
    """Compare a submission against gold-labeled records."""
    sub_path = cfg.path("submission")
    if sub_path is None:
        raise ConfigError("evaluate needs a 'submission' path")
    dataset = _load_dataset(cfg)
    if not has_labels(dataset):
        raise NoLabels("evaluate needs gold fields on every record")
    gold = np.asarray(gold_vector(dataset), dtype=np.float64)

    by_id: dict[str, float] = {}
    with open(sub_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if "id" not in obj or PROB_KEY not in obj:
                raise ConfigError(f"submission line {line_no} lacks 'id' or '{PROB_KEY}'")
            by_id[str(obj["id"])] = float(obj[PROB_KEY])

    ids = tuple(r.id for r in dataset)
    missing = [rid for rid in ids if rid not in by_id]
    if missing:
        raise IdMismatch(f"submission is missing predictions for ids {missing[:3]}")
    extra = [rid for rid in by_id if rid not in set(ids)]
    if extra:
        raise IdMismatch(f"submission has predictions for unknown ids {extra[:3]}")

    predicted = np.asarray([by_id[rid] for rid in ids], dtype=np.float64)
    threshold = 0.5 if cfg.classify_threshold is None else float(cfg.classify_threshold)
    pset = PredictionSet(ids=ids, predicted=predicted, gold=gold)
    report = {
        "format": REPORT_FORMAT,
        "version": 1,
        "n_records": len(dataset),
        "metrics": evaluate_predictions(pset, threshold).to_dict(),
    }
    report_path = cfg.path("report")
    if report_path is not None:
        write_json_atomic(report, report_path)
    return report
