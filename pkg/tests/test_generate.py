"""Tests for seeded instance/dataset generation and JSON Lines persistence."""

from itertools import combinations

import numpy as np
import pytest

from assort_mnl import (
    DatasetFormatError,
    GenSpec,
    generate_dataset,
    generate_instance,
    normalize_weights,
    read_dataset,
    record_seed,
    relabel_dataset,
    verify_labels,
    write_dataset,
)
from assort_mnl.core import PER_SEGMENT, SHARED
from assort_mnl.generate import DOLLAR_SCALE, UNIT_SCALE


class TestGenSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            GenSpec(n=0, m=1)
        with pytest.raises(ValueError):
            GenSpec(n=2, m=0)
        with pytest.raises(ValueError):
            GenSpec(n=2, m=1, M=0.0)
        with pytest.raises(ValueError):
            GenSpec(n=2, m=1, k=3)
        with pytest.raises(ValueError):
            GenSpec(n=2, m=1, f_mode="euro")
        with pytest.raises(ValueError):
            GenSpec(n=2, m=1, mode="both")


class TestRecordSeed:
    def test_pure_and_64bit(self):
        s1 = record_seed(123, 0)
        s2 = record_seed(123, 0)
        assert s1 == s2
        assert 0 <= s1 < 2**64

    def test_spread(self):
        seeds = {record_seed(7, i) for i in range(1000)}
        assert len(seeds) == 1000
        assert record_seed(7, 0) != record_seed(8, 0)

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            record_seed(1, -1)


class TestNormalizeWeights:
    def test_two_three(self):
        assert np.allclose(normalize_weights([2.0, 3.0]), [0.4, 0.6], atol=0)

    def test_single_is_exactly_one(self):
        assert normalize_weights([17.3])[0] == 1.0

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            normalize_weights([0.0, 0.0])


class TestGenerateInstance:
    def test_ranges(self):
        spec = GenSpec(n=4, m=2, M=50.0)
        inst = generate_instance(spec, seed=99)
        assert np.all((inst.y >= 0) & (inst.y <= 50.0))
        assert np.all((inst.alpha >= 0) & (inst.alpha <= 50.0))
        assert np.all((inst.F >= 0) & (inst.F <= 50.0))
        assert np.all(inst.beta == 1.0)
        assert np.all(inst.lam >= 0)
        assert abs(inst.lam.sum() - 1.0) <= 1e-12

    def test_single_segment_weight_exactly_one(self):
        inst = generate_instance(GenSpec(n=2, m=1), seed=5)
        assert inst.lam[0] == 1.0

    def test_dollar_scale_integers(self):
        spec = GenSpec(n=50, m=1, f_mode=DOLLAR_SCALE)
        inst = generate_instance(spec, seed=13)
        assert np.all(inst.F == np.round(inst.F))
        assert np.all((inst.F >= 1) & (inst.F <= 10_000))

    def test_network_toggle_pairs_all_other_draws(self):
        on = generate_instance(GenSpec(n=3, m=2, network_effects=True), seed=42)
        off = generate_instance(GenSpec(n=3, m=2, network_effects=False), seed=42)
        assert np.all(off.alpha == 0.0)
        assert np.any(on.alpha > 0.0)
        assert np.array_equal(on.y, off.y)
        assert np.array_equal(on.F, off.F)
        assert np.array_equal(on.lam, off.lam)

    def test_deterministic(self):
        spec = GenSpec(n=3, m=2)
        assert generate_instance(spec, seed=7) == generate_instance(spec, seed=7)
        assert generate_instance(spec, seed=7) != generate_instance(spec, seed=8)

    def test_statistical_sanity(self):
        spec = GenSpec(n=2, m=1, M=50.0)
        ys = [generate_instance(spec, record_seed(0, i)).y.mean() for i in range(500)]
        assert abs(np.mean(ys) - 25.0) <= 2.5


class TestGenerateDataset:
    def test_determinism(self):
        spec = GenSpec(n=2, m=1, k=1)
        d1 = generate_dataset(spec, count=30, master_seed=11)
        d2 = generate_dataset(spec, count=30, master_seed=11)
        assert d1 == d2
        d3 = generate_dataset(spec, count=30, master_seed=12)
        assert d1 != d3

    def test_labels_are_brute_force_optima(self):
        spec = GenSpec(n=4, m=1, k=2)
        data = generate_dataset(spec, count=25, master_seed=3)
        for rec in data.records:
            factor = rec.instance.revenue.per_support
            contrib = rec.q @ rec.instance.lam
            best = max(
                factor * contrib[list(c)].sum() for c in combinations(range(4), 2)
            )
            assert rec.r_a == pytest.approx(best, abs=1e-12)

    def test_full_set_when_k_equals_n(self):
        data = generate_dataset(GenSpec(n=2, m=1, k=2), count=10, master_seed=1)
        assert all(rec.label.per_segment == ((0, 1),) for rec in data.records)

    def test_stored_revenue_matches_label(self):
        data = generate_dataset(GenSpec(n=3, m=2, k=1, mode=PER_SEGMENT), 15, 21)
        verify_labels(data, tol=1e-12)

    def test_count_validated(self):
        with pytest.raises(ValueError):
            generate_dataset(GenSpec(n=2, m=1), count=0, master_seed=0)


class TestRelabel:
    def test_k_sweep_keeps_instances(self):
        base = generate_dataset(GenSpec(n=5, m=1, k=1), count=12, master_seed=9)
        swept = relabel_dataset(base, k=3)
        assert swept.spec.k == 3
        assert len(swept.records) == len(base.records)
        for a, b in zip(base.records, swept.records):
            assert a.instance == b.instance
            assert b.label.k == 3
            assert b.r_a >= a.r_a  # revenue is monotone in k

    def test_mode_switch(self):
        base = generate_dataset(GenSpec(n=2, m=2, k=1), count=8, master_seed=2)
        swept = relabel_dataset(base, mode=PER_SEGMENT)
        assert swept.spec.mode == PER_SEGMENT
        for a, b in zip(base.records, swept.records):
            assert b.r_a >= a.r_a - 1e-12


class TestDatasetRoundTrip:
    def test_exact_round_trip(self, tmp_path):
        spec = GenSpec(n=3, m=2, k=2, mode=SHARED)
        data = generate_dataset(spec, count=20, master_seed=17)
        path = tmp_path / "data.jsonl"
        write_dataset(data, path)
        assert read_dataset(path) == data

    def test_byte_identical_rewrites(self, tmp_path):
        spec = GenSpec(n=2, m=1)
        data = generate_dataset(spec, count=15, master_seed=4)
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_dataset(data, p1)
        write_dataset(generate_dataset(spec, count=15, master_seed=4), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_indices_one_based_in_file(self, tmp_path):
        data = generate_dataset(GenSpec(n=2, m=1, k=2), count=1, master_seed=0)
        path = tmp_path / "data.jsonl"
        write_dataset(data, path)
        import json

        record = json.loads(path.read_text().splitlines()[1])
        assert record["label"]["per_segment"] == [[1, 2]]

    def test_empty_records_header_only(self, tmp_path):
        data = generate_dataset(GenSpec(n=2, m=1), count=1, master_seed=0)
        import dataclasses

        empty = dataclasses.replace(data, count=0, records=())
        path = tmp_path / "empty.jsonl"
        write_dataset(empty, path)
        back = read_dataset(path)
        assert back.records == ()

    def test_truncated_file_names_line(self, tmp_path):
        data = generate_dataset(GenSpec(n=2, m=1), count=3, master_seed=0)
        path = tmp_path / "data.jsonl"
        write_dataset(data, path)
        text = path.read_text()
        # Cut the last record in half: a JSON error on its line.
        path.write_text(text[: len(text) - 40])
        with pytest.raises(DatasetFormatError, match="line 4"):
            read_dataset(path)

    def test_missing_record_detected(self, tmp_path):
        data = generate_dataset(GenSpec(n=2, m=1), count=3, master_seed=0)
        path = tmp_path / "data.jsonl"
        write_dataset(data, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(DatasetFormatError, match="expected 3 records"):
            read_dataset(path)

    def test_missing_field_named(self, tmp_path):
        import json

        data = generate_dataset(GenSpec(n=2, m=1), count=1, master_seed=0)
        path = tmp_path / "data.jsonl"
        write_dataset(data, path)
        lines = path.read_text().splitlines()
        record = json.loads(lines[1])
        del record["F"]
        path.write_text(lines[0] + "\n" + json.dumps(record) + "\n")
        with pytest.raises(DatasetFormatError, match="line 2.*'F'"):
            read_dataset(path)

    def test_version_mismatch(self, tmp_path):
        import json

        data = generate_dataset(GenSpec(n=2, m=1), count=1, master_seed=0)
        path = tmp_path / "data.jsonl"
        write_dataset(data, path)
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        header["format_version"] = 99
        path.write_text(json.dumps(header) + "\n" + "\n".join(lines[1:]) + "\n")
        with pytest.raises(DatasetFormatError, match="format_version"):
            read_dataset(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(DatasetFormatError, match="line 1"):
            read_dataset(path)
