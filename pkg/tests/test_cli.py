import json
import os

import pytest
from click.testing import CliRunner

from labelloop.cli import main
from labelloop.core import load_pool
from labelloop.store import DirectoryStore


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    path = str(tmp_path_factory.mktemp("cli-data") / "pool.jsonl")
    result = CliRunner().invoke(
        main, ["synth", "--out", path, "--size", "300", "--seed", "5"]
    )
    assert result.exit_code == 0
    return path


RUN_FLAGS = ["--k", "4", "--max-iters", "1", "--n-eval", "8", "--seed", "3",
             "--epochs", "8", "--feature-dim", "4096"]


def run_dir_of(tmp_path, name, runner, dataset, *extra):
    out = str(tmp_path / name)
    result = runner.invoke(
        main, ["run", "--dataset", dataset, "--out", out, *RUN_FLAGS, *extra]
    )
    assert result.exit_code == 0, result.output
    return out, result


class TestSynth:
    def test_writes_dataset_and_lexicon(self, runner, tmp_path):
        out = str(tmp_path / "pool.jsonl")
        lex = str(tmp_path / "lexicon.tsv")
        result = runner.invoke(
            main,
            ["synth", "--out", out, "--size", "120", "--seed", "1",
             "--lexicon-out", lex],
        )
        assert result.exit_code == 0
        assert "wrote 120 points" in result.output
        assert len(load_pool(out)) == 120
        assert os.path.exists(lex)

    def test_bad_fraction_exits_3(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["synth", "--out", str(tmp_path / "p.jsonl"), "--positive-fraction", "1.5"],
        )
        assert result.exit_code == 3
        assert "positive_fraction" in result.output


class TestRun:
    def test_full_run_writes_artifacts(self, runner, tmp_path, dataset):
        out, result = run_dir_of(tmp_path, "run1", runner, dataset)
        assert "run complete" in result.output
        assert "estimated precision" in result.output
        store = DirectoryStore(out)
        assert len(store.annotations()) == 8
        assert store.load_report() is not None
        assert os.path.exists(os.path.join(out, "config.json"))

    def test_config_file_with_flag_override(self, runner, tmp_path, dataset):
        config = str(tmp_path / "config.json")
        with open(config, "w", encoding="utf-8") as fh:
            json.dump({"dataset": dataset, "k": 4, "max_iterations": 1,
                       "n_eval": 8, "epochs": 8, "feature_dim": 4096}, fh)
        out = str(tmp_path / "run-cfg")
        result = runner.invoke(
            main, ["run", "--config", config, "--out", out, "--seed", "11"]
        )
        assert result.exit_code == 0, result.output
        saved = json.load(open(os.path.join(out, "config.json")))
        assert saved["seed"] == 11 and saved["k"] == 4

    def test_noisy_oracle_spec(self, runner, tmp_path, dataset):
        out, _ = run_dir_of(tmp_path, "run-noisy", runner, dataset, "--oracle", "noisy:0.05")
        store = DirectoryStore(out)
        assert all(r.annotation.oracle_id == "noisy" for r in store.annotations())

    def test_odd_k_exits_3(self, runner, tmp_path, dataset):
        result = runner.invoke(
            main, ["run", "--dataset", dataset, "--out", str(tmp_path / "x"), "--k", "15"]
        )
        assert result.exit_code == 3
        assert "even" in result.output

    def test_needs_config_or_dataset(self, runner, tmp_path):
        result = runner.invoke(main, ["run", "--out", str(tmp_path / "x")])
        assert result.exit_code == 3
        assert "--config or --dataset" in result.output

    def test_unreachable_remote_oracle_exits_4(self, runner, tmp_path, dataset):
        result = runner.invoke(
            main,
            ["run", "--dataset", dataset, "--out", str(tmp_path / "x"), *RUN_FLAGS,
             "--oracle", "remote:http://127.0.0.1:9/"],
        )
        assert result.exit_code == 4
        assert "unreachable" in result.output

    def test_human_oracle_requires_service(self, runner, tmp_path, dataset):
        result = runner.invoke(
            main,
            ["run", "--dataset", dataset, "--out", str(tmp_path / "x"), *RUN_FLAGS,
             "--oracle", "human", "--service", "http://127.0.0.1:9"],
        )
        assert result.exit_code == 3
        assert "labelloop serve" in result.output


class TestEvaluate:
    def test_reevaluate_existing_run(self, runner, tmp_path, dataset):
        out, _ = run_dir_of(tmp_path, "run-ev", runner, dataset)
        result = runner.invoke(main, ["evaluate", "--run-dir", out])
        assert result.exit_code == 0, result.output
        assert "estimated precision" in result.output


class TestCompare:
    def test_table_across_strategies(self, runner, tmp_path, dataset):
        a, _ = run_dir_of(tmp_path, "cmp-a", runner, dataset, "--strategy", "uncertainty")
        b, _ = run_dir_of(tmp_path, "cmp-b", runner, dataset, "--strategy", "confident_zero_shot")
        result = runner.invoke(main, ["compare", a, b])
        assert result.exit_code == 0, result.output
        assert "uncertainty" in result.output
        assert "confident_zero_shot" in result.output
        assert "uncertainty - confident_zero_shot:" in result.output

    def test_needs_two_dirs(self, runner, tmp_path, dataset):
        a, _ = run_dir_of(tmp_path, "cmp-one", runner, dataset)
        result = runner.invoke(main, ["compare", a])
        assert result.exit_code == 3

    def test_missing_report_points_at_evaluate(self, runner, tmp_path, dataset):
        a, _ = run_dir_of(tmp_path, "cmp-ok", runner, dataset)
        bare = tmp_path / "cmp-bare"
        bare.mkdir()
        with open(bare / "config.json", "w", encoding="utf-8") as fh:
            json.dump({"dataset": dataset}, fh)
        result = runner.invoke(main, ["compare", a, str(bare)])
        assert result.exit_code == 3
        assert "labelloop evaluate" in result.output
