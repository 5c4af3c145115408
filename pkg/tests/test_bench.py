"""Tests for presets, the end-to-end case runner, and run comparison."""

import dataclasses
import json

import numpy as np
import pytest

from assort_mnl import (
    CaseConfig,
    GenSpec,
    StageError,
    compare_runs,
    generate_dataset,
    preset,
    run_case,
    split_dataset,
)
from assort_mnl.bench import (
    EXIT_NONCONVERGENCE,
    EXIT_TRAIN,
    PRESET_NAMES,
    check_convergence_budget,
)
from assort_mnl.core import PER_SEGMENT, SHARED


class TestPreset:
    def test_grid(self):
        expected = {
            "case1p1": (2, 1, 1, True, SHARED),
            "case1p2": (2, 1, 1, False, SHARED),
            "case2p1": (3, 1, 1, True, SHARED),
            "case2p2": (3, 1, 1, False, SHARED),
            "case2p3": (3, 1, 2, True, SHARED),
            "case3p1": (5, 1, 1, True, SHARED),
            "case3p2": (5, 1, 1, False, SHARED),
            "case3p3": (5, 1, 2, True, SHARED),
            "case3p4": (5, 1, 3, True, SHARED),
            "case3p5": (5, 1, 4, True, SHARED),
            "case4": (2, 2, 1, True, PER_SEGMENT),
        }
        assert set(PRESET_NAMES) == set(expected)
        for name, (n, m, k, nwe, mode) in expected.items():
            cfg = preset(name)
            assert (cfg.spec.n, cfg.spec.m, cfg.spec.k) == (n, m, k)
            assert cfg.spec.network_effects is nwe
            assert cfg.spec.mode == mode
            assert cfg.spec.M == 50.0
            assert cfg.count == 500
            assert cfg.train_fraction == 0.75
            assert cfg.reference is not None

    def test_unknown_name_lists_presets(self):
        with pytest.raises(ValueError, match="case1p1"):
            preset("case9")


class TestCaseConfig:
    def test_train_fraction_bounds(self):
        spec = GenSpec(n=2, m=1)
        with pytest.raises(ValueError):
            CaseConfig(case_id="x", spec=spec, train_fraction=0.0)
        with pytest.raises(ValueError):
            CaseConfig(case_id="x", spec=spec, train_fraction=1.0)

    def test_training_rows_must_cover_features(self):
        spec = GenSpec(n=2, m=1)  # d = 6
        with pytest.raises(ValueError, match="features"):
            CaseConfig(case_id="x", spec=spec, count=8, train_fraction=0.75)
        CaseConfig(case_id="x", spec=spec, count=12, train_fraction=0.75)


class TestSplit:
    def test_first_records_train(self):
        data = generate_dataset(GenSpec(n=2, m=1), count=20, master_seed=3)
        train, test = split_dataset(data, 0.75)
        assert len(train.records) == 15
        assert len(test.records) == 5
        assert train.records == data.records[:15]
        assert test.records == data.records[15:]


class TestConvergenceBudget:
    def _with_exclusions(self, count, n_excluded):
        data = generate_dataset(GenSpec(n=2, m=1), count=count, master_seed=3)
        kept = data.records[: count - n_excluded]
        return dataclasses.replace(
            data, records=kept, excluded=tuple(range(n_excluded))
        )

    def test_within_budget_passes(self):
        check_convergence_budget(self._with_exclusions(20, 1))  # 5% exactly

    def test_over_budget_raises(self):
        with pytest.raises(StageError) as exc:
            check_convergence_budget(self._with_exclusions(20, 2))
        assert exc.value.stage == "generate"
        assert exc.value.exit_code == EXIT_NONCONVERGENCE


class TestRunCase:
    def _config(self, tmp_path, **kwargs):
        defaults = dict(count=40, master_seed=77, out_dir=str(tmp_path))
        defaults.update(kwargs)
        return preset("case1p1", **defaults)

    def test_artifacts_and_report(self, tmp_path):
        report = run_case(self._config(tmp_path))
        assert (tmp_path / "case1p1_dataset.jsonl").exists()
        assert (tmp_path / "case1p1_model.json").exists()
        assert (tmp_path / "case1p1_report.json").exists()
        assert report.counts["requested"] == 40
        assert report.counts["train"] == 30
        assert report.counts["test"] == 10
        assert 0.0 <= report.evaluation.error_rate <= 1.0
        doc = json.loads((tmp_path / "case1p1_report.json").read_text())
        assert doc["config"]["case_id"] == "case1p1"
        assert doc["reference"]["r_a_max"] == 0.44

    def test_mean_prl_matches_example_table(self, tmp_path):
        report = run_case(self._config(tmp_path))
        values = [ex.prl for ex in report.evaluation.examples if ex.prl is not None]
        assert report.evaluation.mean_prl_percent == pytest.approx(
            float(np.mean(values)), abs=1e-12
        )

    def test_deterministic_except_durations(self, tmp_path):
        r1 = run_case(self._config(tmp_path / "run1"))
        r2 = run_case(self._config(tmp_path / "run2"))
        d1, d2 = r1.to_dict(), r2.to_dict()
        d1.pop("durations_s"), d2.pop("durations_s")
        d1["config"].pop("out_dir"), d2["config"].pop("out_dir")
        assert d1 == d2
        assert (tmp_path / "run1" / "case1p1_dataset.jsonl").read_bytes() == (
            tmp_path / "run2" / "case1p1_dataset.jsonl"
        ).read_bytes()

    def test_digests_match_files(self, tmp_path):
        import hashlib

        report = run_case(self._config(tmp_path))
        for name in ("dataset", "model"):
            path = tmp_path / report.artifacts[name]["path"]
            assert (
                hashlib.sha256(path.read_bytes()).hexdigest()
                == report.artifacts[name]["sha256"]
            )

    def test_minimal_viable_count_and_config_guard(self, tmp_path):
        # 9 training rows for d=6 features is the smallest viable split here.
        cfg = CaseConfig(
            case_id="tiny",
            spec=GenSpec(n=2, m=1),
            count=12,
            train_fraction=0.75,
            master_seed=5,
            out_dir=str(tmp_path),
        )
        report = run_case(cfg)
        assert report.counts["train"] == 9
        # Too few records and the config guard rejects it before any work.
        with pytest.raises(ValueError):
            CaseConfig(
                case_id="tiny2",
                spec=GenSpec(n=2, m=1),
                count=8,
                train_fraction=0.75,
                master_seed=5,
                out_dir=str(tmp_path),
            )

    def test_training_failure_is_stage_tagged(self, tmp_path, monkeypatch):
        import assort_mnl.bench as bench_mod
        from assort_mnl.learner import UnderdeterminedFitError

        def boom(X, Y, layout):
            raise UnderdeterminedFitError("forced failure")

        monkeypatch.setattr(bench_mod, "fit_linear", boom)
        with pytest.raises(StageError) as exc:
            run_case(self._config(tmp_path))
        assert exc.value.stage == "train"
        assert exc.value.exit_code == EXIT_TRAIN


class TestCompareRuns:
    def test_identical_reports_zero_deltas(self, tmp_path):
        cfg = preset("case1p1", count=40, master_seed=7, out_dir=str(tmp_path))
        report = run_case(cfg)
        summary = compare_runs(report, report)
        for row in summary["metrics"].values():
            assert row["delta"] == 0 or row["delta"] is None
            assert row["direction"] in ("equal", "undefined")

    def test_network_effect_direction(self, tmp_path):
        on = run_case(preset("case1p1", count=60, master_seed=9, out_dir=str(tmp_path / "on")))
        off = run_case(preset("case1p2", count=60, master_seed=9, out_dir=str(tmp_path / "off")))
        summary = compare_runs(on, off)
        assert summary["metrics"]["r_a_mean"]["direction"] == "lower"

    def test_shape_mismatch_rejected(self, tmp_path):
        a = run_case(preset("case1p1", count=40, master_seed=7, out_dir=str(tmp_path / "a")))
        b = run_case(preset("case2p1", count=40, master_seed=7, out_dir=str(tmp_path / "b")))
        with pytest.raises(ValueError, match="shapes"):
            compare_runs(a, b)

    def test_accepts_dict_form(self, tmp_path):
        report = run_case(preset("case1p1", count=40, master_seed=7, out_dir=str(tmp_path)))
        doc = json.loads((tmp_path / "case1p1_report.json").read_text())
        summary = compare_runs(doc, report)
        assert summary["case_a"] == summary["case_b"] == "case1p1"
