"""Serialization for trained meta-regressors.

JSON only, no timestamps or environment echoes, so that the same training
inputs always serialize to byte-identical files.  Floats go through
Python's shortest round-trip repr, which json preserves exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

from .forest import RandomForest
from .gbt import GradientBoosting
from .mlp import Mlp
from .specs import TrainedMeta, spec_from_dict, spec_to_dict

_MODEL_TYPES = {"forest": RandomForest, "gbt": GradientBoosting, "mlp": Mlp}

FORMAT_NAME = "hallumeta-meta"
FORMAT_VERSION = 1


def trained_meta_to_dict(tm: TrainedMeta) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "family": tm.family,
        "spec": spec_to_dict(tm.spec),
        "model": tm.model.to_dict(),
        "cv": {
            "mae_mean": tm.cv_mae_mean,
            "maes": list(tm.cv_maes),
            "oof_spearman": tm.oof_spearman,
        },
        "candidates": tm.candidates,
    }


def trained_meta_from_dict(obj: dict) -> TrainedMeta:
    if obj.get("format") != FORMAT_NAME:
        raise ValueError("not a serialized meta-regressor")
    if obj.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported meta-regressor version {obj.get('version')!r}")
    family = obj["family"]
    model_cls = _MODEL_TYPES.get(family)
    if model_cls is None:
        raise ValueError(f"unknown model family {family!r}")
    spec = spec_from_dict(family, obj["spec"])
    model = model_cls.from_dict(spec, obj["model"])
    cv = obj.get("cv", {})
    return TrainedMeta(
        family=family,
        spec=spec,
        model=model,
        cv_mae_mean=float(cv.get("mae_mean", float("nan"))),
        cv_maes=tuple(cv.get("maes", ())),
        oof_spearman=cv.get("oof_spearman"),
        candidates=list(obj.get("candidates", [])),
    )


def save_trained_meta(tm: TrainedMeta, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trained_meta_to_dict(tm), fh, sort_keys=True)
        fh.write("\n")


def load_trained_meta(path: str | Path) -> TrainedMeta:
    with open(path, encoding="utf-8") as fh:
        return trained_meta_from_dict(json.load(fh))
