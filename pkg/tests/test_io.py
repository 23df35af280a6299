import csv
import json

import numpy as np
import pytest

from pdscore import (
    DistanceKind,
    DistanceSpec,
    DuplicateLabel,
    ParseError,
    compute_pds,
    generate_counts,
    CountSynthSpec,
    scale_sweep,
)
from pdscore import io as pio

from helpers import random_pair


class TestEffectMatrixRoundTrip:
    def test_small_file(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("perturbation,g1,g2\nA,1.5,2\nB,3,4.25\n")
        m = pio.read_effect_matrix(path)
        assert m.perturbation_ids == ("A", "B")
        assert m.gene_ids == ("g1", "g2")
        assert m.values.tolist() == [[1.5, 2.0], [3.0, 4.25]]

    def test_write_read_bitwise(self, tmp_path):
        pair = random_pair(np.random.default_rng(1), n=7, p=5)
        path = pio.write_effect_matrix(pair.predicted, tmp_path / "p.csv")
        back = pio.read_effect_matrix(path)
        assert np.array_equal(back.values, pair.predicted.values)
        assert back.perturbation_ids == pair.predicted.perturbation_ids
        assert back.gene_ids == pair.predicted.gene_ids

    def test_duplicate_perturbation_names_label(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text("perturbation,g1\nA,1\nA,2\n")
        with pytest.raises(DuplicateLabel, match="'A'"):
            pio.read_effect_matrix(path)

    def test_non_numeric_cell_has_position(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("perturbation,g1,g2\nA,1,2\nB,oops,4\n")
        with pytest.raises(ParseError) as info:
            pio.read_effect_matrix(path)
        assert info.value.line == 3
        assert info.value.column == 2

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("perturbation,g1,g2\nA,1\n")
        with pytest.raises(ParseError):
            pio.read_effect_matrix(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            pio.read_effect_matrix(path)


class TestCountsRoundTrip:
    def test_write_read(self, tmp_path):
        counts = generate_counts(CountSynthSpec(3, 4, 10, mean_counts_per_cell=100.0, seed=3))
        path = pio.write_count_matrix(counts, tmp_path / "c.csv")
        back = pio.read_count_matrix(path)
        assert np.array_equal(back.counts, counts.counts)
        assert back.cell_condition == counts.cell_condition
        assert back.gene_ids == counts.gene_ids
        assert back.cell_ids == counts.cell_ids

    def test_fractional_count_rejected(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("cell,condition,g1\nc0,control,1.5\n")
        with pytest.raises(ParseError) as info:
            pio.read_count_matrix(path)
        assert info.value.line == 2
        assert info.value.column == 3


class TestTargetMap:
    def test_with_and_without_header(self, tmp_path):
        with_header = tmp_path / "t1.csv"
        with_header.write_text("perturbation,target_gene\nA,g1\nB,g2\n")
        bare = tmp_path / "t2.csv"
        bare.write_text("A,g1\nB,g2\n")
        assert pio.read_target_map(with_header) == {"A": "g1", "B": "g2"}
        assert pio.read_target_map(bare) == {"A": "g1", "B": "g2"}

    def test_wrong_width(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("A,g1,extra\n")
        with pytest.raises(ParseError):
            pio.read_target_map(path)


class TestReports:
    def test_pds_json_round_trip_is_bitwise(self, tmp_path):
        pair = random_pair(np.random.default_rng(2), n=9, p=6)
        report = compute_pds(pair, DistanceSpec(DistanceKind.L2))
        path = pio.write_json(pio.pds_report_payload(report), tmp_path / "r.json")
        loaded = json.loads(path.read_text())
        assert loaded["mean_pds"] == report.mean_pds
        for entry, raw in zip(report.per_perturbation, loaded["per_perturbation"]):
            assert raw["true_distance"] == entry.true_distance
            assert raw["rank"] == entry.rank
            assert raw["pds"] == entry.pds

    def test_pds_csv_row_count(self, tmp_path):
        pair = random_pair(np.random.default_rng(3), n=11, p=4)
        report = compute_pds(pair, DistanceSpec(DistanceKind.L1))
        path = pio.write_pds_report_csv(report, tmp_path / "r.csv")
        rows = list(csv.reader(path.open()))
        assert len(rows) == 12
        assert rows[0] == ["perturbation", "true_distance", "rank", "pds", "error"]
        parsed = [float(r[3]) for r in rows[1:]]
        assert np.array_equal(np.array(parsed), report.pds_values())

    def test_sweep_csv_columns(self, tmp_path):
        pair = random_pair(np.random.default_rng(4), n=5, p=6)
        result = scale_sweep(pair, [DistanceSpec(DistanceKind.L2)], (0.5, 1.0, 2.0))
        path = pio.write_sweep_csv(result, tmp_path / "s.csv")
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["c", "metric", "mean_pds"]
        assert len(rows) == 1 + 3
        assert all(r[1] == "l2" for r in rows[1:])
        assert [float(r[0]) for r in rows[1:]] == [0.5, 1.0, 2.0]

    def test_digest_is_stable(self, tmp_path):
        path = tmp_path / "x.bin"
        path.write_bytes(b"abc123")
        assert pio.sha256_file(path) == pio.sha256_file(path)
        assert len(pio.sha256_file(path)) == 64
