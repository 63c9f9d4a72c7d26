import json
from importlib import resources

import pytest
from click.testing import CliRunner

from sevlab.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Fixture corpus plus a config tuned for fast test runs."""
    target = tmp_path_factory.mktemp("cli")
    source = resources.files("sevlab.data").joinpath("fixture")
    for name in ("corpus.jsonl", "expert_labels.csv"):
        (target / name).write_text(source.joinpath(name).read_text("utf-8"))
    config = json.loads(source.joinpath("config.json").read_text("utf-8"))
    config["models"] = [
        {"kind": "naive_bayes", "hyperparameters": {}},
        {"kind": "linear_svm", "hyperparameters": {"epochs": 5}},
    ]
    (target / "config.json").write_text(json.dumps(config))
    return target


def invoke(workdir, out, *args):
    runner = CliRunner()
    result = runner.invoke(
        main, ["--config", str(workdir / "config.json"), "--out", str(out), *args]
    )
    if result.exception and not isinstance(result.exception, SystemExit):
        raise result.exception
    return result


class TestStageSubcommands:
    def test_stagewise_walkthrough(self, workdir, tmp_path):
        out = tmp_path / "stages"

        result = invoke(workdir, out, "ingest")
        assert result.exit_code == 0, result.output
        assert (out / "clean_docs.jsonl").exists()
        assert "ingested 200 posts" in result.output

        result = invoke(workdir, out, "lexicon")
        assert result.exit_code == 0
        assert (out / "lexicon_en.tsv").exists()
        header, first = (out / "lexicon_en.tsv").read_text().splitlines()[:2]
        assert len(first.split("\t")) == 3

        assert invoke(workdir, out, "label-keyword").exit_code == 0
        assert invoke(workdir, out, "label-zeroshot").exit_code == 0
        keyword_lines = (out / "votes_keyword.jsonl").read_text().splitlines()
        assert len(keyword_lines) == 200

        result = invoke(workdir, out, "annotate-import", str(workdir / "expert_labels.csv"))
        assert result.exit_code == 0
        assert "imported 200" in result.output

        result = invoke(workdir, out, "fuse")
        assert result.exit_code == 0
        assert (out / "fused.jsonl").exists()

        result = invoke(workdir, out, "split")
        assert result.exit_code == 0
        assert (out / "dataset_en" / "train.jsonl").exists()

        result = invoke(workdir, out, "smote")
        assert result.exit_code == 0
        assert (out / "dataset_en" / "tfidf.model").exists()
        assert (out / "dataset_en" / "train_vectors.jsonl").exists()

        result = invoke(workdir, out, "train")
        assert result.exit_code == 0
        assert (out / "models_en" / "naive_bayes.model").exists()

        result = invoke(workdir, out, "evaluate")
        assert result.exit_code == 0
        assert (out / "metrics_test_en.jsonl").exists()
        assert (out / "report_test_en.txt").exists()
        assert list((out / "figures").glob("*.png"))

        result = invoke(workdir, out, "report")
        assert result.exit_code == 0
        assert "re-rendered" in result.output

    def test_run_subcommand(self, workdir, tmp_path):
        out = tmp_path / "full"
        result = invoke(workdir, out, "run")
        assert result.exit_code == 0, result.output
        assert "run complete" in result.output
        assert (out / "manifest.json").exists()

    def test_pending_exit_code(self, workdir, tmp_path):
        labels = (workdir / "expert_labels.csv").read_text().splitlines()
        trimmed = workdir / "trimmed.csv"
        trimmed.write_text("\n".join(labels[:-3]) + "\n")
        config = json.loads((workdir / "config.json").read_text())
        config["expert_labels"] = "trimmed.csv"
        (workdir / "config_pending.json").write_text(json.dumps(config))

        runner = CliRunner()
        result = runner.invoke(
            main,
            ["--config", str(workdir / "config_pending.json"),
             "--out", str(tmp_path / "pending"), "run"],
        )
        assert result.exit_code == 2
        assert "pending: 3" in result.output

    def test_report_check_flags_reference_row(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(main, ["--out", str(tmp_path), "report", "--check"])
        assert result.exit_code == 0, result.output
        assert "checked 40 rows" in result.output
        assert "FLAGGED en/linear_svm/Normal" in result.output

    def test_config_required_for_run(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(main, ["--out", str(tmp_path), "run"])
        assert result.exit_code != 0
        assert "--config" in result.output

    def test_seed_override_changes_outputs(self, workdir, tmp_path):
        a = invoke(workdir, tmp_path / "s1", "run")
        assert a.exit_code == 0
        runner = CliRunner()
        result = runner.invoke(
            main,
            ["--config", str(workdir / "config.json"), "--seed", "7",
             "--out", str(tmp_path / "s2"), "run"],
        )
        assert result.exit_code == 0
        m1 = json.loads((tmp_path / "s1" / "manifest.json").read_text())
        m2 = json.loads((tmp_path / "s2" / "manifest.json").read_text())
        assert m1["seed"] == 42 and m2["seed"] == 7
        assert m1["config_hash"] != m2["config_hash"]
