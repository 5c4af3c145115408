"""Tests for the assort-mnl command-line interface."""

import json

import pytest

from assort_mnl import read_dataset, read_model
from assort_mnl.cli import main


def run(*argv):
    return main([str(a) for a in argv])


class TestGen:
    def test_writes_dataset(self, tmp_path, capsys):
        code = run("gen", "--n", 2, "--count", 20, "--seed", 5, "--out", tmp_path)
        assert code == 0
        data = read_dataset(tmp_path / "dataset.jsonl")
        assert data.count == 20
        assert "wrote 20 records" in capsys.readouterr().out

    def test_preset_spec(self, tmp_path):
        assert run("gen", "--preset", "case2p3", "--count", 15, "--out", tmp_path) == 0
        data = read_dataset(tmp_path / "dataset.jsonl")
        assert (data.spec.n, data.spec.k) == (3, 2)

    def test_json_format(self, tmp_path, capsys):
        code = run("gen", "--n", 2, "--count", 10, "--out", tmp_path, "--format", "json")
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["records"] == 10

    def test_missing_shape_is_config_error(self, tmp_path, capsys):
        assert run("gen", "--out", tmp_path) == 2
        assert "error [config]" in capsys.readouterr().err


class TestLabel:
    def test_relabel_new_k(self, tmp_path):
        run("gen", "--n", 5, "--k", 1, "--count", 12, "--seed", 3, "--out", tmp_path)
        out2 = tmp_path / "k3"
        code = run("label", tmp_path / "dataset.jsonl", "--k", 3, "--out", out2)
        assert code == 0
        data = read_dataset(out2 / "dataset.jsonl")
        assert data.spec.k == 3
        assert all(len(rec.label.per_segment[0]) == 3 for rec in data.records)

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        assert run("label", tmp_path / "nope.jsonl") == 5
        assert "error [io]" in capsys.readouterr().err


class TestTrainEval:
    def test_pipeline(self, tmp_path, capsys):
        run("gen", "--n", 2, "--count", 40, "--seed", 5, "--out", tmp_path)
        assert run("train", tmp_path / "dataset.jsonl", "--out", tmp_path) == 0
        model = read_model(tmp_path / "model.json")
        assert model.layout.n == 2
        capsys.readouterr()
        code = run(
            "eval", tmp_path / "dataset.jsonl", tmp_path / "model.json",
            "--out", tmp_path, "--format", "json",
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["test_count"] == 10
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["test_count"] == 10

    def test_underdetermined_train_exit_code(self, tmp_path, capsys):
        run("gen", "--n", 2, "--count", 8, "--seed", 5, "--out", tmp_path)
        assert run("train", tmp_path / "dataset.jsonl", "--out", tmp_path) == 4
        assert "error [train]" in capsys.readouterr().err

    def test_corrupt_dataset_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"format_version":1,"spec":{}}\n')
        assert run("train", bad, "--out", tmp_path) == 5
        assert "error [read]" in capsys.readouterr().err


class TestCase:
    def test_preset_run(self, tmp_path, capsys):
        code = run(
            "case", "--preset", "case1p1", "--count", 40, "--seed", 7,
            "--out", tmp_path, "--format", "json",
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["config"]["case_id"] == "case1p1"
        assert (tmp_path / "case1p1_report.json").exists()

    def test_custom_case(self, tmp_path):
        code = run(
            "case", "--n", 3, "--k", 2, "--count", 60, "--seed", 1,
            "--case-id", "demo", "--out", tmp_path,
        )
        assert code == 0
        assert (tmp_path / "demo_dataset.jsonl").exists()

    def test_count_too_small_for_features(self, tmp_path, capsys):
        assert run("case", "--preset", "case1p1", "--count", 8, "--out", tmp_path) == 2
        assert "error [config]" in capsys.readouterr().err

    def test_unknown_preset_rejected_by_parser(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("case", "--preset", "case9", "--out", tmp_path)
        assert exc.value.code == 2


class TestCompare:
    def test_compare_reports(self, tmp_path, capsys):
        run("case", "--preset", "case1p1", "--count", 40, "--seed", 7, "--out", tmp_path / "a")
        run("case", "--preset", "case1p2", "--count", 40, "--seed", 7, "--out", tmp_path / "b")
        capsys.readouterr()
        code = run(
            "compare",
            tmp_path / "a" / "case1p1_report.json",
            tmp_path / "b" / "case1p2_report.json",
            "--format", "json",
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["case_a"] == "case1p1" and doc["case_b"] == "case1p2"
        assert doc["metrics"]["r_a_mean"]["direction"] == "lower"
