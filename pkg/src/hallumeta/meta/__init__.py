from .forest import RandomForest, fit_forest
from .gbt import GradientBoosting, fit_gbt, soft_threshold
from .io import load_trained_meta, save_trained_meta, trained_meta_from_dict, trained_meta_to_dict
from .mlp import Mlp, fit_mlp, init_params, loss_and_grads
from .search import default_grids, fit_family, kfold_indices, meta_search_cv, train_and_select
from .specs import (
    FAMILY_ORDER,
    CvConfig,
    ForestSpec,
    GbtSpec,
    MlpSpec,
    TrainedMeta,
    spec_family,
    spec_from_dict,
    spec_to_dict,
)
from .tree import RegressionTree, fit_tree, grow_tree, resolve_mtry

__all__ = [
    "FAMILY_ORDER",
    "CvConfig",
    "ForestSpec",
    "GbtSpec",
    "MlpSpec",
    "TrainedMeta",
    "spec_family",
    "spec_from_dict",
    "spec_to_dict",
    "RegressionTree",
    "fit_tree",
    "grow_tree",
    "resolve_mtry",
    "RandomForest",
    "fit_forest",
    "GradientBoosting",
    "fit_gbt",
    "soft_threshold",
    "Mlp",
    "fit_mlp",
    "init_params",
    "loss_and_grads",
    "kfold_indices",
    "meta_search_cv",
    "train_and_select",
    "default_grids",
    "fit_family",
    "load_trained_meta",
    "save_trained_meta",
    "trained_meta_from_dict",
    "trained_meta_to_dict",
]
