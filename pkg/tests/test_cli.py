import json

import pytest

from hallumeta.cli import main
from hallumeta.pipeline import PROB_KEY, validate_submission_file

TASKS = ["DM", "MT", "PG"]

# four lexical patterns against a five-token target, ordered by severity:
# full-subset hypothesis, one invented token, two invented, fully invented
PATTERNS = [
    (lambda i: f"alpha{i} beta{i} gamma{i}", 0.1),
    (lambda i: f"zeta{i} eta{i} theta{i}", 0.9),
    (lambda i: f"alpha{i} beta{i} zeta{i}", 0.2),
    (lambda i: f"alpha{i} zeta{i} theta{i}", 0.8),
]


def write_records(path, n=18, labeled=True):
    rows = []
    for i in range(n):
        hyp_of, prob = PATTERNS[i % 4]
        row = {
            "id": f"r-{i}",
            "task": TASKS[i % 3],
            "src": f"prompt number {i}",
            "hyp": hyp_of(i),
            "tgt": f"alpha{i} beta{i} gamma{i} delta{i} epsilon{i}",
            "ref": "either",
        }
        if labeled:
            row[PROB_KEY] = prob
            row["label"] = "Hallucination" if prob > 0.5 else "Not Hallucination"
        rows.append(row)
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))


def base_config():
    return {
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
        "grids": {
            "forest": [{"n_trees": 30, "max_depth": 4}],
            "gbt": [{"n_rounds": 40, "learning_rate": 0.1, "max_depth": 3}],
        },
        "cv_k": 3,
        "seed": 11,
    }


@pytest.fixture()
def workspace(tmp_path):
    write_records(tmp_path / "dev.jsonl")
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(base_config()))
    return tmp_path, str(config_path)


class TestHelp:
    def test_top_level_help_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--help"])
        assert excinfo.value.code == 0
        out = capsys.readouterr().out
        for command in ("score", "train", "predict", "evaluate"):
            assert command in out

    @pytest.mark.parametrize("command", ["score", "train", "predict", "evaluate"])
    def test_subcommand_help_exits_zero(self, command, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main([command, "--help"])
        assert excinfo.value.code == 0
        assert "--config" in capsys.readouterr().out

    def test_missing_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 2

    def test_missing_config_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["train"])
        assert excinfo.value.code == 2


class TestEndToEnd:
    def test_score_train_predict_evaluate(self, workspace, capsys):
        tmp_path, config = workspace

        assert main(["score", "--config", config]) == 0
        out = capsys.readouterr().out
        assert "scored 18 records x 2 scorers" in out
        assert "0 masked cells" in out
        assert (tmp_path / "scores.json").exists()

        assert main(["train", "--config", config]) == 0
        out = capsys.readouterr().out
        assert "selected family:" in out
        assert "kept=True" in out
        assert (tmp_path / "model.json").exists()
        assert (tmp_path / "train_report.json").exists()

        assert main(["predict", "--config", config]) == 0
        out = capsys.readouterr().out
        assert "predicted 18 records" in out
        assert validate_submission_file(tmp_path / "submission.jsonl") == 18

        eval_report = tmp_path / "eval_report.json"
        assert main(["evaluate", "--config", config, "--report", str(eval_report)]) == 0
        out = capsys.readouterr().out
        assert "accuracy" in out
        saved = json.loads(eval_report.read_text())
        assert saved["metrics"]["accuracy"] == pytest.approx(1.0)
        assert saved["metrics"]["n"] == 18

    def test_train_computes_scores_when_absent(self, workspace):
        tmp_path, config = workspace
        assert main(["train", "--config", config]) == 0
        assert (tmp_path / "scores.json").exists()
        assert (tmp_path / "model.json").exists()

    def test_predict_is_deterministic(self, workspace):
        tmp_path, config = workspace
        assert main(["train", "--config", config]) == 0
        assert main(["predict", "--config", config]) == 0
        first = (tmp_path / "submission.jsonl").read_bytes()
        assert main(["predict", "--config", config]) == 0
        assert (tmp_path / "submission.jsonl").read_bytes() == first

    def test_warm_cache_rerun_makes_no_provider_calls(self, tmp_path, capsys):
        write_records(tmp_path / "dev.jsonl", n=4)
        cfg = {
            "records": "dev.jsonl",
            "panel": [
                {
                    "name": "judge",
                    "kind": "llm_judge",
                    "k_votes": 3,
                    "client": {
                        "kind": "scripted",
                        "default": "Hallucination",
                        "call_log": "calls.jsonl",
                    },
                }
            ],
            "scores": "scores.json",
            "cache": "cache.jsonl",
        }
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(cfg))
        assert main(["score", "--config", str(config_path)]) == 0
        calls_after_first = len((tmp_path / "calls.jsonl").read_text().splitlines())
        assert calls_after_first == 4 * 3
        assert main(["score", "--config", str(config_path)]) == 0
        calls_after_second = len((tmp_path / "calls.jsonl").read_text().splitlines())
        assert calls_after_second == calls_after_first


class TestExitCodes:
    def test_unknown_config_key_exits_2(self, tmp_path, capsys):
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"records": "dev.jsonl", "mystery": True}))
        assert main(["score", "--config", str(config_path)]) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_missing_config_file_exits_2(self, tmp_path, capsys):
        assert main(["score", "--config", str(tmp_path / "nope.json")]) == 2
        assert "cannot read configuration" in capsys.readouterr().err

    def test_invalid_json_config_exits_2(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text("{not json")
        assert main(["score", "--config", str(config_path)]) == 2

    def test_missing_records_file_exits_2(self, tmp_path):
        config_path = tmp_path / "config.json"
        config_path.write_text(
            json.dumps({"records": "absent.jsonl", "panel": [{"name": "o", "kind": "overlap"}]})
        )
        assert main(["score", "--config", str(config_path)]) == 2

    def test_empty_panel_exits_2(self, tmp_path):
        write_records(tmp_path / "dev.jsonl", n=2)
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({"records": "dev.jsonl", "panel": []}))
        assert main(["score", "--config", str(config_path)]) == 2

    def test_provider_exhaustion_exits_3(self, tmp_path, capsys):
        write_records(tmp_path / "dev.jsonl", n=3)
        cfg = {
            "records": "dev.jsonl",
            "panel": [
                {
                    "name": "judge",
                    "kind": "llm_judge",
                    "k_votes": 2,
                    "client": {"kind": "scripted", "fail_on": "prompt number"},
                }
            ],
        }
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(cfg))
        assert main(["score", "--config", str(config_path)]) == 3
        assert "provider error" in capsys.readouterr().err

    def test_all_filtered_exits_4(self, workspace, capsys):
        _, config = workspace
        assert main(["train", "--config", config, "--filter-threshold", "0.0"]) == 4
        assert "filtering error" in capsys.readouterr().err

    def test_panel_mismatch_exits_5(self, workspace, capsys):
        tmp_path, config = workspace
        assert main(["train", "--config", config]) == 0
        capsys.readouterr()
        obj = json.loads((tmp_path / "scores.json").read_text())
        for scorer in obj["scorers"]:
            scorer["name"] = "renamed-" + scorer["name"]
        (tmp_path / "scores.json").write_text(json.dumps(obj))
        assert main(["predict", "--config", config]) == 5
        assert "mismatch" in capsys.readouterr().err

    def test_id_mismatch_exits_6(self, workspace, capsys):
        tmp_path, config = workspace
        assert main(["train", "--config", config]) == 0
        capsys.readouterr()
        obj = json.loads((tmp_path / "scores.json").read_text())
        obj["record_ids"][0] = "stranger"
        (tmp_path / "scores.json").write_text(json.dumps(obj))
        assert main(["predict", "--config", config]) == 6
        assert "id mismatch" in capsys.readouterr().err


class TestOverrides:
    def test_classify_threshold_flag_changes_labels(self, workspace):
        tmp_path, config = workspace
        assert main(["train", "--config", config]) == 0
        assert main(["predict", "--config", config]) == 0
        default_labels = [
            json.loads(line)["label"]
            for line in (tmp_path / "submission.jsonl").read_text().splitlines()
        ]
        assert set(default_labels) == {"Hallucination", "Not Hallucination"}
        assert main(["predict", "--config", config, "--classify-threshold", "0.99"]) == 0
        high_labels = [
            json.loads(line)["label"]
            for line in (tmp_path / "submission.jsonl").read_text().splitlines()
        ]
        assert set(high_labels) == {"Not Hallucination"}

    def test_seed_flag_overrides_config(self, workspace):
        tmp_path, config = workspace
        assert main(["train", "--config", config, "--seed", "123"]) == 0
        model = json.loads((tmp_path / "model.json").read_text())
        assert model["training"]["seed"] == 123

    def test_flag_paths_resolve_against_caller_cwd(self, workspace, tmp_path_factory, monkeypatch):
        tmp_path, config = workspace
        assert main(["train", "--config", config]) == 0
        side_dir = tmp_path_factory.mktemp("elsewhere")
        monkeypatch.chdir(side_dir)
        assert main(["predict", "--config", config, "--submission", "flagged.jsonl"]) == 0
        assert (side_dir / "flagged.jsonl").exists()
        assert validate_submission_file(side_dir / "flagged.jsonl") == 18
