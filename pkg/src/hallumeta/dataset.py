"""Loading, validating and partitioning SHROOM-style record files.

The on-disk format is newline-delimited JSON, one object per line, UTF-8,
with keys ``src``, ``hyp``, ``tgt``, ``ref``, ``task`` and optionally
``model``, ``id``, ``label`` and ``p(Hallucination)``.  Prediction output
uses the same shape plus ``label`` / ``p(Hallucination)`` filled in, which
matches the shared-task submission format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .errors import InvalidLabel, MalformedRecord, MissingReference

PROB_KEY = "p(Hallucination)"
LABEL_POSITIVE = "Hallucination"
LABEL_NEGATIVE = "Not Hallucination"


class TaskType(Enum):
    DEFINITION_MODELING = "DM"
    MACHINE_TRANSLATION = "MT"
    PARAPHRASE_GENERATION = "PG"


_TASK_ALIASES = {
    "DM": TaskType.DEFINITION_MODELING,
    "MT": TaskType.MACHINE_TRANSLATION,
    "PG": TaskType.PARAPHRASE_GENERATION,
}


class Track(Enum):
    MODEL_AGNOSTIC = "agnostic"
    MODEL_AWARE = "aware"


class RefDesignator(Enum):
    SRC = "src"
    TGT = "tgt"
    EITHER = "either"


@dataclass(frozen=True)
class Record:
    """One example: a model output under test plus its source and reference."""

    id: str
    task: TaskType
    src: str
    hyp: str
    tgt: str
    ref_designator: RefDesignator = RefDesignator.EITHER
    model: str | None = None
    gold_prob: float | None = None
    gold_label: bool | None = None


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of records from one track and split."""

    records: tuple[Record, ...]
    track: Track
    split: str

    def __post_init__(self):
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            raise ValueError("record ids must be unique within a dataset")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def _parse_task(raw, line_no: int) -> TaskType:
    if isinstance(raw, str):
        key = raw.strip().upper()
        if key in _TASK_ALIASES:
            return _TASK_ALIASES[key]
        for task in TaskType:
            if key.replace(" ", "").replace("_", "") == task.name.replace("_", ""):
                return task
    raise MalformedRecord(line_no, f"unknown task {raw!r}")


def _parse_gold(obj: dict, line_no: int) -> tuple[float | None, bool | None]:
    prob = obj.get(PROB_KEY)
    if prob is not None:
        if not isinstance(prob, (int, float)) or isinstance(prob, bool):
            raise InvalidLabel(line_no, f"{PROB_KEY} must be a number, got {prob!r}")
        prob = float(prob)
        if not 0.0 <= prob <= 1.0:
            raise InvalidLabel(line_no, f"{PROB_KEY}={prob} outside [0, 1]")

    label = obj.get("label")
    if label is not None:
        if label == LABEL_POSITIVE:
            label = True
        elif label == LABEL_NEGATIVE:
            label = False
        else:
            raise InvalidLabel(line_no, f"unknown label {label!r}")

    if prob is not None:
        derived = prob > 0.5
        if label is None:
            label = derived
        elif label != derived:
            raise InvalidLabel(
                line_no, f"label {label!r} inconsistent with {PROB_KEY}={prob}"
            )
    return prob, label


def record_from_json(obj: dict, *, line_no: int, track: Track, default_id: str) -> Record:
    """Build one validated Record from a parsed JSON object."""
    if not isinstance(obj, dict):
        raise MalformedRecord(line_no, "record must be a JSON object")
    for key in ("src", "hyp", "tgt"):
        if key in obj and not isinstance(obj[key], str):
            raise MalformedRecord(line_no, f"field {key!r} must be a string")
    hyp = obj.get("hyp", "")
    if not hyp:
        raise MalformedRecord(line_no, "hyp must be a non-empty string")

    ref_raw = obj.get("ref", RefDesignator.EITHER.value)
    try:
        ref = RefDesignator(str(ref_raw).strip().lower())
    except ValueError:
        raise MalformedRecord(line_no, f"unknown ref designator {ref_raw!r}") from None

    model = obj.get("model") or None
    if track is Track.MODEL_AWARE and not model:
        raise MalformedRecord(line_no, "model-aware records need a model identifier")

    prob, label = _parse_gold(obj, line_no)
    return Record(
        id=str(obj.get("id", default_id)),
        task=_parse_task(obj.get("task"), line_no),
        src=obj.get("src", ""),
        hyp=hyp,
        tgt=obj.get("tgt", ""),
        ref_designator=ref,
        model=model,
        gold_prob=prob,
        gold_label=label,
    )


def load_records(path: str | Path, track: Track, split: str) -> Dataset:
    """Load a newline-delimited record file; order preserved, blanks skipped.

    Unknown keys in the input objects are ignored.  Raises MalformedRecord
    or InvalidLabel with the offending 1-based line number.
    """
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from exc
            records.append(
                record_from_json(
                    obj, line_no=line_no, track=track, default_id=f"{split}-{line_no}"
                )
            )
    return Dataset(records=tuple(records), track=track, split=split)


def record_to_json(r: Record) -> dict:
    """Serialize a record back to its file shape (populated fields only)."""
    obj = {
        "id": r.id,
        "task": r.task.value,
        "src": r.src,
        "hyp": r.hyp,
        "tgt": r.tgt,
        "ref": r.ref_designator.value,
    }
    if r.model is not None:
        obj["model"] = r.model
    if r.gold_label is not None:
        obj["label"] = LABEL_POSITIVE if r.gold_label else LABEL_NEGATIVE
    if r.gold_prob is not None:
        obj[PROB_KEY] = r.gold_prob
    return obj


def write_records(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset as newline-delimited JSON (load round-trips it)."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in dataset:
            fh.write(json.dumps(record_to_json(r), ensure_ascii=False) + "\n")


def partition_by_task(d: Dataset) -> dict[TaskType, Dataset]:
    """Split into per-task datasets; partition sizes sum to len(d)."""
    buckets: dict[TaskType, list[Record]] = {}
    for r in d:
        buckets.setdefault(r.task, []).append(r)
    return {
        task: Dataset(records=tuple(recs), track=d.track, split=d.split)
        for task, recs in buckets.items()
    }


def reference_text(r: Record) -> str:
    """The text the hypothesis is judged against.

    ``either`` resolves to the target side: references are the
    intended-output side for all three task types.
    """
    field = "src" if r.ref_designator is RefDesignator.SRC else "tgt"
    text = getattr(r, field)
    if not text:
        raise MissingReference(f"record {r.id}: designated field {field!r} is empty")
    return text


def gold_vector(d: Dataset) -> list[float]:
    """Gold probabilities per record; falls back to the binary label.

    Raises KeyError-style ValueError when a record has neither field; the
    pipeline converts that into NoLabels before any scoring starts.
    """
    out = []
    for r in d:
        if r.gold_prob is not None:
            out.append(r.gold_prob)
        elif r.gold_label is not None:
            out.append(1.0 if r.gold_label else 0.0)
        else:
            raise ValueError(f"record {r.id} has no gold fields")
    return out


def has_labels(d: Dataset) -> bool:
    return all(r.gold_prob is not None or r.gold_label is not None for r in d)


def with_gold_stripped(d: Dataset) -> Dataset:
    """Copy of the dataset with gold fields removed (for inference fixtures)."""
    return Dataset(
        records=tuple(replace(r, gold_prob=None, gold_label=None) for r in d),
        track=d.track,
        split=d.split,
    )
