"""Exception hierarchy shared across the package.

Every error raised by hallumeta derives from :class:`HallumetaError`, so
callers (and the CLI exit-code mapping) can catch one base class.
"""

from __future__ import annotations


class HallumetaError(Exception):
    """Base class for all hallumeta errors."""


# --- dataset ---------------------------------------------------------------


class MalformedRecord(HallumetaError):
    """A data line could not be parsed into a valid record."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class InvalidLabel(HallumetaError):
    """Gold fields are out of range or mutually inconsistent."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class MissingReference(HallumetaError):
    """The designated reference field of a record is empty."""


# --- scorers ---------------------------------------------------------------


class EmptyHypothesis(HallumetaError):
    """Hypothesis text has no tokens; nothing to score."""


class DegenerateHypothesis(HallumetaError):
    """Hypothesis is shorter than the requested n-gram order."""


class ProviderError(HallumetaError):
    """A remote provider failed after bounded retries."""


class UnparseableVerdict(HallumetaError):
    """A judge reply matched neither verdict pattern (treated as abstention)."""


class AllAbstained(HallumetaError):
    """Every judge vote abstained; no verdict fraction can be formed."""


class PanelEmpty(HallumetaError):
    """A score matrix was requested for an empty scorer panel."""


# --- metrics ---------------------------------------------------------------


class ConstantVector(HallumetaError):
    """A rank/variance statistic is undefined on a constant vector."""


class TooFewPoints(HallumetaError):
    """Not enough points for the requested statistic."""


class OutOfRange(HallumetaError):
    """A score fell outside the closed unit interval."""


# --- meta-regressors -------------------------------------------------------


class GridEmpty(HallumetaError):
    """Hyperparameter search needs at least one candidate spec."""


class FoldTooSmall(HallumetaError):
    """More CV folds than samples."""


class NonFiniteLoss(HallumetaError):
    """Neural net training hit a NaN/inf loss; carries diagnostics."""

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(
            f"non-finite loss {loss!r} at epoch {epoch}, batch {batch}; "
            "lower the learning rate or check the inputs"
        )


# --- pipeline --------------------------------------------------------------


class NoLabels(HallumetaError):
    """The labeled dataset is missing gold fields for one or more records."""


class AllFiltered(HallumetaError):
    """No base scorer survived the MAE filter; raise the threshold."""


class DimensionMismatch(HallumetaError):
    """A feature row does not match the trained model's scorer columns."""


class PanelMismatch(HallumetaError):
    """The score matrix lacks a scorer column the trained model requires."""


class IdMismatch(HallumetaError):
    """Record ids disagree between two inputs that must align row-wise."""


class ConfigError(HallumetaError):
    """The run configuration is malformed or internally inconsistent."""
