"""Cross-validated hyperparameter search over the meta-regressor families.

Candidates are scored by the mean of per-fold out-of-fold MAEs; the first
candidate in grid order wins exact ties.  Families compete on the same
number: lowest mean OOF MAE wins, an exact tie goes to the higher
pooled-OOF Spearman, and a remaining tie falls back to the fixed family
order (forest, gbt, mlp).  The winning spec is refit on all rows.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConstantVector, FoldTooSmall, GridEmpty, TooFewPoints
from ..metrics import mae, spearman_rho
from .forest import fit_forest
from .gbt import fit_gbt
from .mlp import fit_mlp
from .specs import (
    FAMILY_ORDER,
    CvConfig,
    ForestSpec,
    GbtSpec,
    MlpSpec,
    TrainedMeta,
    spec_to_dict,
)

_FITTERS = {"forest": fit_forest, "gbt": fit_gbt, "mlp": fit_mlp}


def fit_family(family: str, X: np.ndarray, y: np.ndarray, spec, seed: int):
    fitter = _FITTERS.get(family)
    if fitter is None:
        raise ValueError(f"unknown model family {family!r}")
    return fitter(X, y, spec, seed)


def kfold_indices(n: int, cv: CvConfig) -> list[np.ndarray]:
    """Shuffled contiguous folds; every row lands in exactly one fold."""
    if n < cv.k:
        raise FoldTooSmall(f"{n} rows cannot fill {cv.k} folds")
    idx = np.arange(n)
    if cv.shuffle:
        rng = np.random.default_rng(cv.seed)
        idx = rng.permutation(n)
    return [fold for fold in np.array_split(idx, cv.k)]


def _rho_or_none(predicted: np.ndarray, gold: np.ndarray) -> float | None:
    try:
        return spearman_rho(predicted, gold)
    except (ConstantVector, TooFewPoints):
        return None


def meta_search_cv(
    X: np.ndarray,
    y: np.ndarray,
    family: str,
    grid: list,
    cv: CvConfig,
    seed: int = 0,
) -> TrainedMeta:
    """Pick the grid candidate with the lowest mean per-fold OOF MAE.

    Returns the refit winner; `candidates` keeps the per-candidate fold
    diagnostics in grid order for the model report.
    """
    if not grid:
        raise GridEmpty(f"hyperparameter grid for {family!r} is empty")
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    folds = kfold_indices(X.shape[0], cv)

    records = []
    best_i = -1
    best_mean = np.inf
    best_oof = None
    for i, spec in enumerate(grid):
        oof = np.empty(X.shape[0], dtype=np.float64)
        fold_maes = []
        for fold in folds:
            mask = np.ones(X.shape[0], dtype=bool)
            mask[fold] = False
            model = fit_family(family, X[mask], y[mask], spec, seed)
            pred = model.predict(X[fold])
            oof[fold] = pred
            fold_maes.append(mae(pred, y[fold]))
        mean_mae = float(np.mean(fold_maes))
        records.append(
            {
                "family": family,
                "spec": spec_to_dict(spec),
                "cv_maes": [float(v) for v in fold_maes],
                "cv_mae_mean": mean_mae,
            }
        )
        if mean_mae < best_mean:
            best_mean = mean_mae
            best_i = i
            best_oof = oof

    winner = grid[best_i]
    model = fit_family(family, X, y, winner, seed)
    return TrainedMeta(
        family=family,
        spec=winner,
        model=model,
        cv_mae_mean=best_mean,
        cv_maes=tuple(records[best_i]["cv_maes"]),
        oof_spearman=_rho_or_none(best_oof, y),
        oof_predictions=tuple(float(v) for v in best_oof),
        candidates=records,
    )


def train_and_select(
    X: np.ndarray,
    y: np.ndarray,
    grids: dict[str, list],
    cv: CvConfig,
    seed: int = 0,
) -> TrainedMeta:
    """Run the per-family searches and crown an overall winner."""
    active = [f for f in FAMILY_ORDER if grids.get(f)]
    if not active:
        raise GridEmpty("no family has a non-empty hyperparameter grid")
    results = [meta_search_cv(X, y, family, grids[family], cv, seed) for family in active]

    best = results[0]
    for cand in results[1:]:
        if cand.cv_mae_mean < best.cv_mae_mean:
            best = cand
        elif cand.cv_mae_mean == best.cv_mae_mean:
            b_rho = -np.inf if best.oof_spearman is None else best.oof_spearman
            c_rho = -np.inf if cand.oof_spearman is None else cand.oof_spearman
            if c_rho > b_rho:
                best = cand
    # carry every family's candidate diagnostics on the winner
    merged = []
    for res in results:
        merged.extend(res.candidates)
    best.candidates = merged
    return best


def default_grids() -> dict[str, list]:
    """Compact curated grids; each hyperparameter's supported settings all
    appear somewhere, without paying for a full Cartesian product."""
    forest = [
        ForestSpec(n_trees=100, max_depth=None, min_samples_split=2, min_samples_leaf=1, max_features="auto", bootstrap=True),
        ForestSpec(n_trees=50, max_depth=3, min_samples_split=2, min_samples_leaf=1, max_features="auto", bootstrap=True),
        ForestSpec(n_trees=100, max_depth=6, min_samples_split=5, min_samples_leaf=3, max_features="auto", bootstrap=True),
        ForestSpec(n_trees=200, max_depth=6, min_samples_split=2, min_samples_leaf=1, max_features="sqrt", bootstrap=True),
        ForestSpec(n_trees=100, max_depth=None, min_samples_split=5, min_samples_leaf=3, max_features="sqrt", bootstrap=False),
        ForestSpec(n_trees=50, max_depth=6, min_samples_split=2, min_samples_leaf=1, max_features="auto", bootstrap=False),
    ]
    gbt = [
        GbtSpec(n_rounds=100, learning_rate=0.1, max_depth=3, min_child_weight=1, gamma=0.0, subsample=1.0, colsample_bytree=1.0, reg_alpha=0.0, reg_lambda=1.0),
        GbtSpec(n_rounds=200, learning_rate=0.05, max_depth=3, min_child_weight=1, gamma=0.0, subsample=0.8, colsample_bytree=1.0, reg_alpha=0.0, reg_lambda=1.0),
        GbtSpec(n_rounds=50, learning_rate=0.3, max_depth=6, min_child_weight=5, gamma=0.1, subsample=1.0, colsample_bytree=0.8, reg_alpha=0.1, reg_lambda=0.0),
        GbtSpec(n_rounds=100, learning_rate=0.1, max_depth=6, min_child_weight=5, gamma=0.0, subsample=0.8, colsample_bytree=0.8, reg_alpha=0.0, reg_lambda=0.0),
        GbtSpec(n_rounds=100, learning_rate=0.05, max_depth=None, min_child_weight=5, gamma=0.1, subsample=1.0, colsample_bytree=1.0, reg_alpha=0.1, reg_lambda=1.0),
        GbtSpec(n_rounds=200, learning_rate=0.1, max_depth=3, min_child_weight=1, gamma=0.1, subsample=1.0, colsample_bytree=0.8, reg_alpha=0.0, reg_lambda=1.0),
    ]
    mlp = [
        MlpSpec(hidden_layers=(), dropout=0.0, l2_reg=0.0, learning_rate=1e-2, epochs=200, batch_size=32),
        MlpSpec(hidden_layers=((16, "relu"),), dropout=0.0, l2_reg=1e-4, learning_rate=1e-2, epochs=200, batch_size=32),
        MlpSpec(hidden_layers=((8, "relu"),), dropout=0.2, l2_reg=0.0, learning_rate=1e-2, epochs=200, batch_size=32),
        MlpSpec(hidden_layers=((16, "relu"), (8, "relu")), dropout=0.0, l2_reg=1e-4, learning_rate=1e-3, epochs=200, batch_size=32),
        MlpSpec(hidden_layers=((8, "tanh"),), dropout=0.0, l2_reg=0.0, learning_rate=1e-3, epochs=200, batch_size=32),
    ]
    return {"forest": forest, "gbt": gbt, "mlp": mlp}
