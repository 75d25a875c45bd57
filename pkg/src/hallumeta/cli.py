"""Command-line interface: score, train, predict, evaluate.

Each subcommand reads one JSON configuration file; a handful of scalar
flags override it.  Relative paths in the configuration resolve against
the configuration file's own directory.

Exit codes: 0 success; 2 configuration or input-format problems;
3 a remote provider stayed unavailable through its retry budget;
4 every base scorer was filtered out; 5 the score matrix cannot feed the
model (missing scorer columns or feature-width mismatch); 6 record ids
disagree between inputs that must align.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import (
    AllFiltered,
    ConfigError,
    DimensionMismatch,
    HallumetaError,
    IdMismatch,
    PanelMismatch,
    ProviderError,
)
from .metrics import EvalReport
from .pipeline import PipelineConfig, run_evaluate, run_predict, run_score, run_train

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROVIDER = 3
EXIT_ALL_FILTERED = 4
EXIT_PANEL_MISMATCH = 5
EXIT_ID_MISMATCH = 6

logger = logging.getLogger(__name__)

_OVERRIDE_PATHS = ("records", "scores", "model", "submission", "report", "cache")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hallumeta",
        description="Detect hallucinations by fusing weak scorers with a trained meta-regressor.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "score": "run the scorer panel over records and write a score matrix",
        "train": "filter scorers, search the meta grids, and write a model",
        "predict": "apply a trained model to records and write a submission",
        "evaluate": "score a submission against gold-labeled records",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON configuration")
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
        p.add_argument(
            "--filter-threshold",
            type=float,
            default=None,
            help="override the base-scorer MAE cutoff (kept means MAE strictly below)",
        )
        p.add_argument(
            "--classify-threshold",
            type=float,
            default=None,
            help="override the probability-to-label cutoff (label is positive strictly above)",
        )
        for path_name in _OVERRIDE_PATHS:
            p.add_argument(
                f"--{path_name}", default=None, help=f"override the configured {path_name} path"
            )
        p.add_argument(
            "--log-level",
            choices=("debug", "info", "warning", "error"),
            default="warning",
            help="stdlib logging level (default: warning)",
        )
    return parser


def load_config(args: argparse.Namespace) -> PipelineConfig:
    config_path = Path(args.config)
    try:
        with open(config_path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    cfg = PipelineConfig.from_dict(raw, base_dir=config_path.parent)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.filter_threshold is not None:
        cfg.filter_threshold = args.filter_threshold
    if args.classify_threshold is not None:
        cfg.classify_threshold = args.classify_threshold
    for path_name in _OVERRIDE_PATHS:
        value = getattr(args, path_name)
        if value is not None:
            # flag paths are caller-relative, not config-relative
            setattr(cfg, path_name, str(Path(value).absolute()))
    cfg.validate()
    return cfg


def _cmd_score(cfg: PipelineConfig) -> None:
    matrix = run_score(cfg)
    masked = int(matrix.missing.sum())
    print(
        f"scored {matrix.n_records} records x {matrix.n_scorers} scorers "
        f"({masked} masked cells)"
    )
    if cfg.scores:
        print(f"score matrix written to {cfg.path('scores')}")


def _cmd_train(cfg: PipelineConfig) -> None:
    bundle, report = run_train(cfg)
    sel = report["selection"]
    print(f"selected family: {sel['family']}")
    print(f"cross-validated mae: {sel['cv_mae_mean']:.4f}")
    rho = sel["oof_spearman"]
    print(f"out-of-fold spearman: {'n/a' if rho is None else format(rho, '.4f')}")
    for entry in report["base_models"]:
        mae_text = "n/a" if entry["mae"] is None else format(entry["mae"], ".4f")
        print(f"  scorer {entry['scorer']}: mae={mae_text} kept={entry['kept']}")
    if cfg.model:
        print(f"model written to {cfg.path('model')}")
    if cfg.report:
        print(f"report written to {cfg.path('report')}")


def _cmd_predict(cfg: PipelineConfig) -> None:
    rows = run_predict(cfg)
    positive = sum(1 for r in rows if r["label"] == "Hallucination")
    print(f"predicted {len(rows)} records ({positive} labeled Hallucination)")
    if cfg.submission:
        print(f"submission written to {cfg.path('submission')}")


def _cmd_evaluate(cfg: PipelineConfig) -> None:
    report = run_evaluate(cfg)
    metrics = report["metrics"]
    rebuilt = EvalReport(
        n=metrics["n"],
        spearman=metrics["spearman_rho"],
        mae=metrics["mae"],
        rmse=metrics["rmse"],
        r_squared=metrics["r_squared"],
        confusion=_confusion_from_dict(metrics["confusion_matrix"]),
        accuracy=metrics["accuracy"],
        precision_hallucination=metrics["precision_hallucination"],
        recall_hallucination=metrics["recall_hallucination"],
        f1_hallucination=metrics["f1_hallucination"],
        precision_not_hallucination=metrics["precision_not_hallucination"],
        recall_not_hallucination=metrics["recall_not_hallucination"],
        f1_not_hallucination=metrics["f1_not_hallucination"],
        threshold=metrics["classify_threshold"],
        note=metrics["note"],
    )
    print(rebuilt.render_text())
    if cfg.report:
        print(f"report written to {cfg.path('report')}")


def _confusion_from_dict(obj: dict):
    from .metrics import ConfusionMatrix

    return ConfusionMatrix(tp=obj["tp"], fn=obj["fn"], fp=obj["fp"], tn=obj["tn"])


_COMMANDS = {
    "score": _cmd_score,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args)
        _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except AllFiltered as exc:
        print(f"filtering error: {exc}", file=sys.stderr)
        return EXIT_ALL_FILTERED
    except (PanelMismatch, DimensionMismatch) as exc:
        print(f"model/panel mismatch: {exc}", file=sys.stderr)
        return EXIT_PANEL_MISMATCH
    except IdMismatch as exc:
        print(f"id mismatch: {exc}", file=sys.stderr)
        return EXIT_ID_MISMATCH
    except (HallumetaError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
