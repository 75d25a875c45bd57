"""Run the full pipeline end to end on generated data.

Fabricates a labeled record file whose hallucinated hypotheses avoid the
reference vocabulary, then drives the installed CLI through
score -> train -> predict -> evaluate in a work directory.  Everything is
offline and deterministic for a fixed seed, so two runs produce
bitwise-identical model and submission files.

Usage:
    python3 scripts/run_synthetic.py --out-dir synthetic_run --n 240 --seed 7
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from hallumeta.cli import main as cli_main
from hallumeta.dataset import write_records
from hallumeta.synthetic import synthetic_records


def build_workspace(out_dir: Path, n: int, seed: int) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_records(synthetic_records(n=n, seed=seed), out_dir / "dev.jsonl")
    config = {
        "records": "dev.jsonl",
        "track": "agnostic",
        "split": "dev",
        "panel": [
            {"name": "overlap", "kind": "overlap"},
            {
                "name": "ngram-consistency",
                "kind": "ngram_consistency",
                "n": 1,
                "sampler": {"kind": "reference"},
            },
        ],
        "scores": "scores.json",
        "cache": "cache.jsonl",
        "model": "model.json",
        "report": "train_report.json",
        "submission": "submission.jsonl",
        "cv_k": 5,
        "seed": seed,
    }
    config_path = out_dir / "config.json"
    config_path.write_text(json.dumps(config, indent=2) + "\n")
    return config_path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="synthetic_run", help="work directory")
    parser.add_argument("--n", type=int, default=240, help="number of records")
    parser.add_argument("--seed", type=int, default=7, help="generator and training seed")
    args = parser.parse_args(argv)

    config_path = build_workspace(Path(args.out_dir), args.n, args.seed)
    eval_report = Path(args.out_dir) / "eval_report.json"
    steps = [
        ["score", "--config", str(config_path)],
        ["train", "--config", str(config_path)],
        ["predict", "--config", str(config_path)],
        ["evaluate", "--config", str(config_path), "--report", str(eval_report.absolute())],
    ]
    for step in steps:
        print(f"\n== hallumeta {step[0]} ==")
        code = cli_main(step)
        if code != 0:
            print(f"step {step[0]} failed with exit code {code}", file=sys.stderr)
            return code
    print(f"\nartifacts in {Path(args.out_dir).absolute()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
