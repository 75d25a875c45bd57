"""Hyperparameter specs for the meta-regressor families.

A spec is a frozen, JSON-serializable description of one candidate model.
A hyper-grid is a finite ordered list of specs; order matters because ties
in cross-validated MAE resolve to the earliest candidate.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class ForestSpec:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: str = "auto"  # 'auto' = all features, 'sqrt' = ceil(sqrt(d))
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.max_features not in ("auto", "sqrt"):
            raise ValueError("max_features must be 'auto' or 'sqrt'")


@dataclass(frozen=True)
class GbtSpec:
    n_rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int | None = 3
    min_child_weight: float = 1.0
    gamma: float = 0.0
    subsample: float = 1.0
    colsample_bytree: float = 1.0
    reg_alpha: float = 0.0
    reg_lambda: float = 1.0

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.min_child_weight < 0:
            raise ValueError("min_child_weight must be >= 0")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not 0.0 < self.subsample <= 1.0:
            raise ValueError("subsample must be in (0, 1]")
        if not 0.0 < self.colsample_bytree <= 1.0:
            raise ValueError("colsample_bytree must be in (0, 1]")
        if self.reg_alpha < 0 or self.reg_lambda < 0:
            raise ValueError("regularization strengths must be >= 0")


@dataclass(frozen=True)
class MlpSpec:
    hidden_layers: tuple[tuple[int, str], ...] = ((16, "relu"),)
    dropout: float = 0.0
    l2_reg: float = 0.0
    learning_rate: float = 1e-2
    epochs: int = 200
    batch_size: int = 32

    def __post_init__(self):
        layers = tuple((int(w), str(a)) for w, a in self.hidden_layers)
        object.__setattr__(self, "hidden_layers", layers)
        for width, act in layers:
            if width < 1:
                raise ValueError("hidden layer width must be >= 1")
            if act not in ("relu", "tanh"):
                raise ValueError("activation must be 'relu' or 'tanh'")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.l2_reg < 0:
            raise ValueError("l2_reg must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


FAMILY_ORDER = ("forest", "gbt", "mlp")

_SPEC_TYPES = {"forest": ForestSpec, "gbt": GbtSpec, "mlp": MlpSpec}


def spec_family(spec) -> str:
    for family, cls in _SPEC_TYPES.items():
        if isinstance(spec, cls):
            return family
    raise TypeError(f"unknown spec type {type(spec).__name__}")


def spec_to_dict(spec) -> dict:
    out = asdict(spec)
    if isinstance(spec, MlpSpec):
        out["hidden_layers"] = [list(pair) for pair in spec.hidden_layers]
    return out


def spec_from_dict(family: str, obj: dict):
    cls = _SPEC_TYPES.get(family)
    if cls is None:
        raise ValueError(f"unknown model family {family!r}")
    obj = dict(obj)
    if family == "mlp" and "hidden_layers" in obj:
        obj["hidden_layers"] = tuple((int(w), str(a)) for w, a in obj["hidden_layers"])
    return cls(**obj)


@dataclass(frozen=True)
class CvConfig:
    """k-fold cross-validation settings for the meta-model search."""

    k: int = 5
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("cross-validation needs k >= 2 folds")


@dataclass
class TrainedMeta:
    """A selected and refit meta-regressor plus its search diagnostics."""

    family: str
    spec: object
    model: object
    cv_mae_mean: float
    cv_maes: tuple[float, ...]
    oof_spearman: float | None
    oof_predictions: tuple[float, ...] = ()
    candidates: list = field(default_factory=list)

    def predict(self, X) -> "object":
        return self.model.predict(X)
