import csv
import math

import orjson
import pytest
from typer.testing import CliRunner

from src.deps import resolve_run_config
from src.main import app

runner = CliRunner()

FAST = ["--epochs", "2", "--batch-size", "16"]


def rows_without_time(path):
    """metrics.csv rows minus the wall-time column."""
    with path.open(newline="") as f:
        return [row[:-1] for row in csv.reader(f)]


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """One short training run shared by the ask/evaluate tests."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    assert runner.invoke(app, ["generate", "--out", str(data)]).exit_code == 0
    out = root / "run"
    result = runner.invoke(
        app, ["train", "--data", str(data / "questions.csv"), "--out", str(out), "--seed", "7", *FAST]
    )
    assert result.exit_code == 0, result.output
    return data, out


def test_generate_writes_both_files(tmp_path):
    result = runner.invoke(app, ["generate", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "questions.csv").read_text().startswith("Disease,Question,Label\n")
    assert (tmp_path / "answers.csv").read_text().startswith("Disease,Label,Answer\n")
    assert "160 questions over 40 labels" in result.output
    assert runner.invoke(app, ["generate", "--out", str(tmp_path)]).exit_code == 2
    assert runner.invoke(app, ["generate", "--out", str(tmp_path), "--force"]).exit_code == 0


def test_train_writes_a_run_directory(tmp_path, dataset_files):
    primary, _ = dataset_files
    out = tmp_path / "run"
    result = runner.invoke(app, ["train", "--data", str(primary), "--out", str(out), "--batch-size", "32"])
    assert result.exit_code == 0, result.output
    assert (out / "config.json").exists()
    assert (out / "model.mqf").read_bytes()[:8] == b"MQFCKPT1"
    rows = rows_without_time(out / "metrics.csv")
    assert rows[0] == ["variant", "fold", "epoch", "train_loss", "accuracy", "precision", "recall", "f1"]
    assert [row[2] for row in rows[1:]] == [str(e) for e in range(1, 11)]
    config = orjson.loads((out / "config.json").read_bytes())
    assert config["command"] == "train"
    assert config["train"]["seed"] == 42


def test_unknown_variant_is_a_usage_error(tmp_path, dataset_files):
    primary, _ = dataset_files
    result = runner.invoke(app, ["train", "--data", str(primary), "--out", str(tmp_path), "--variant", "gpt-huge"])
    assert result.exit_code == 2
    result = runner.invoke(app, ["compare", "--data", str(primary), "--out", str(tmp_path), "--variant", "lora-gpt-huge"])
    assert result.exit_code == 2
    assert "unknown variant" in result.output


def test_missing_data_is_a_usage_error(tmp_path):
    assert runner.invoke(app, ["train", "--out", str(tmp_path)]).exit_code == 2
    assert runner.invoke(app, ["train", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]).exit_code == 2


def test_fixed_seed_reproduces_metrics(tmp_path, dataset_files):
    primary, _ = dataset_files
    for name in ("a", "b"):
        args = ["train", "--data", str(primary), "--out", str(tmp_path / name), "--seed", "3", *FAST]
        assert runner.invoke(app, args).exit_code == 0
    assert rows_without_time(tmp_path / "a" / "metrics.csv") == rows_without_time(tmp_path / "b" / "metrics.csv")


def test_config_snapshot_reproduces_the_run(tmp_path, dataset_files):
    primary, _ = dataset_files
    first = tmp_path / "first"
    assert runner.invoke(app, ["train", "--data", str(primary), "--out", str(first), "--seed", "5", *FAST]).exit_code == 0
    again = tmp_path / "again"
    result = runner.invoke(app, ["train", "--config", str(first / "config.json"), "--out", str(again)])
    assert result.exit_code == 0, result.output
    assert rows_without_time(first / "metrics.csv") == rows_without_time(again / "metrics.csv")
    assert (first / "config.json").read_bytes() == (again / "config.json").read_bytes()


def test_seed_env_does_not_override_a_snapshot(tmp_path, dataset_files):
    primary, _ = dataset_files
    first = tmp_path / "first"
    args = ["train", "--data", str(primary), "--out", str(first), "--seed", "7", *FAST]
    assert runner.invoke(app, args).exit_code == 0
    again = tmp_path / "again"
    result = runner.invoke(app, ["train", "--config", str(first / "config.json"), "--out", str(again)], env={"MEDQA_SEED": "9"})
    assert result.exit_code == 0, result.output
    assert orjson.loads((again / "config.json").read_bytes())["train"]["seed"] == 7
    assert rows_without_time(first / "metrics.csv") == rows_without_time(again / "metrics.csv")

    from_env = tmp_path / "env"
    args = ["train", "--data", str(primary), "--out", str(from_env), *FAST]
    assert runner.invoke(app, args, env={"MEDQA_SEED": "9"}).exit_code == 0
    assert orjson.loads((from_env / "config.json").read_bytes())["train"]["seed"] == 9
    assert runner.invoke(app, [*args, "--force"], env={"MEDQA_SEED": "nine"}).exit_code == 2


def test_existing_run_needs_force(tmp_path, dataset_files):
    primary, _ = dataset_files
    args = ["train", "--data", str(primary), "--out", str(tmp_path), "--epochs", "1"]
    assert runner.invoke(app, args).exit_code == 0
    result = runner.invoke(app, args)
    assert result.exit_code == 2
    assert "--force" in result.output
    assert runner.invoke(app, [*args, "--force"]).exit_code == 0


def test_crossval_writes_fold_rows_and_summary(tmp_path, dataset_files):
    primary, _ = dataset_files
    out = tmp_path / "cv"
    result = runner.invoke(app, ["crossval", "--data", str(primary), "--out", str(out), "--k", "5", *FAST])
    assert result.exit_code == 0, result.output
    rows = rows_without_time(out / "metrics.csv")[1:]
    assert len(rows) == 10
    assert sorted({(int(r[1]), int(r[2])) for r in rows}) == [(f, e) for f in range(5) for e in (1, 2)]

    summary = orjson.loads((out / "summary.json").read_bytes())
    final = [float(r[4]) for r in rows if r[2] == "2"]
    assert summary["mean"]["accuracy"] == pytest.approx(math.fsum(final) / 5, abs=1e-9)
    assert len(summary["histories"]) == 5


def test_compare_tabulates_each_variant(tmp_path, dataset_files):
    primary, _ = dataset_files
    out = tmp_path / "cmp"
    result = runner.invoke(
        app,
        [
            "compare", "--data", str(primary), "--out", str(out), "--k", "2", "--epochs", "1",
            "--variant", "mini-bert-uncased", "--variant", "lora-mini-roberta-base",
        ],
    )
    assert result.exit_code == 0, result.output
    lines = (out / "comparison.csv").read_text().splitlines()
    assert lines[0] == "variant,accuracy,precision,recall,f1,time_s"
    assert [line.split(",")[0] for line in lines[1:]] == ["mini-bert-uncased", "lora-mini-roberta-base"]
    assert len(orjson.loads((out / "summaries.json").read_bytes())) == 2
    assert "most accurate:" in result.output and "fastest:" in result.output


def test_report_for_a_run(tmp_path, trained):
    _, out = trained
    result = runner.invoke(app, ["report", "--run", str(out), "--force"])
    assert result.exit_code == 0, result.output
    assert (out / "report" / "summary.md").exists()
    assert (out / "report" / "mini-roberta-base-f1.svg").exists()
    assert runner.invoke(app, ["report", "--run", str(tmp_path)]).exit_code != 0


def test_evaluate_a_checkpoint(trained):
    data, out = trained
    result = runner.invoke(app, ["evaluate", "--model", str(out / "model.mqf"), "--data", str(data / "questions.csv")])
    assert result.exit_code == 0, result.output
    assert "accuracy" in result.output


def test_ask_answers_piped_questions(trained):
    data, out = trained
    result = runner.invoke(
        app,
        ["ask", "--model", str(out / "model.mqf"), "--answers", str(data / "answers.csv")],
        input="What is diabetes?\n\nWhat are the symptoms of asthma?\n",
    )
    assert result.exit_code == 0, result.output
    assert result.output.count("label: ") == 2
    assert result.output.count("answer: ") == 2
    assert "question is empty" in result.output


def test_ask_exits_cleanly_on_eof(trained):
    data, out = trained
    result = runner.invoke(app, ["ask", "--model", str(out / "model.mqf"), "--answers", str(data / "answers.csv")], input="")
    assert result.exit_code == 0
    assert "label: " not in result.output


def test_ask_fallback_with_unreachable_threshold(trained):
    data, out = trained
    result = runner.invoke(
        app,
        ["ask", "--model", str(out / "model.mqf"), "--answers", str(data / "answers.csv"), "--threshold", "1.1"],
        input="What is diabetes?\n",
    )
    assert result.exit_code == 0
    assert "[no confident answer]" in result.output


def test_ask_with_a_missing_checkpoint(tmp_path, trained):
    data, _ = trained
    result = runner.invoke(app, ["ask", "--model", str(tmp_path / "none.mqf"), "--answers", str(data / "answers.csv")])
    assert result.exit_code != 0


def test_config_precedence(tmp_path, monkeypatch):
    monkeypatch.delenv("MEDQA_SEED", raising=False)
    path = tmp_path / "settings.yaml"
    path.write_text("data: file.csv\nk: 3\ntrain:\n  epochs: 4\n  batch_size: 8\n")
    resolved = resolve_run_config(path, "crossval", train={"epochs": 6, "batch_size": None}, k=None, jobs=2)
    assert resolved.data == "file.csv"
    assert resolved.k == 3
    assert resolved.jobs == 2
    assert resolved.train.epochs == 6
    assert resolved.train.batch_size == 8
    assert resolved.train.seed == 42
