"""hallumeta: hallucination detection by fusing weak scorers with trained meta-regressors."""

__version__ = "0.1.0"

from . import errors
from .dataset import (
    Dataset,
    Record,
    RefDesignator,
    TaskType,
    Track,
    gold_vector,
    load_records,
    reference_text,
    write_records,
)
from .metrics import (
    ConfusionMatrix,
    EvalReport,
    PredictionSet,
    classification_report,
    classify,
    confusion_from_predictions,
    evaluate_predictions,
    mae,
    r_squared,
    rmse,
    spearman_rho,
)

__all__ = [
    "__version__",
    "errors",
    "Dataset",
    "Record",
    "RefDesignator",
    "TaskType",
    "Track",
    "gold_vector",
    "load_records",
    "reference_text",
    "write_records",
    "ConfusionMatrix",
    "EvalReport",
    "PredictionSet",
    "classification_report",
    "classify",
    "confusion_from_predictions",
    "evaluate_predictions",
    "mae",
    "r_squared",
    "rmse",
    "spearman_rho",
]
