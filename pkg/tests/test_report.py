#!/usr/bin/env python3
import csv
import pytest
import numpy as np

from sketchbit.bench.core.report import (
    BIN_EDGES,
    CSV_FIELDS,
    BinnedMaeReport,
    ReportException,
    ReportWriteException,
    bin_index,
    bins,
    write_csv,
)


"""
Tests for bench.core.report module
"""


class TestBins:
    """Test frequency bins"""

    def test_edges(self):
        """Test nine power-of-two bins up to 256"""
        assert bins()[0] == (0, 1)
        assert bins()[-1] == (128, 256)
        assert len(bins()) == 9

    @pytest.mark.parametrize(
        "f,index",
        [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4), (129, 8), (256, 8)],
    )
    def test_bin_index(self, f, index):
        """Test (lo, hi] membership"""
        assert bin_index(f) == index

    @pytest.mark.parametrize("f", [0, -1, 257, 10_000])
    def test_outside(self, f):
        """Test frequencies outside (0, 256] have no bin"""
        assert bin_index(f) is None


class TestBinnedMaeReport:
    """Test error aggregation"""

    @pytest.fixture
    def report(self):
        """Report for two estimators"""
        return BinnedMaeReport(config="320x2", estimators=("cms", "cmm"))

    def test_perfect_estimator(self, report):
        """Test a perfect estimator has zero error in every populated bin"""
        for f in (1, 2, 3, 7, 100, 256):
            report.add(f, {"cms": float(f), "cmm": f + 1.0})
        populated = report.tokens > 0
        assert np.all(report.mae("cms")[populated] == 0.0)
        assert np.allclose(report.mae("cmm")[populated], 1.0)

    def test_mean_within_bin(self, report):
        """Test errors are averaged per bin"""
        report.add(3, {"cms": 5.0, "cmm": 3.0})
        report.add(4, {"cms": 4.0, "cmm": 0.0})
        assert report.mae("cms")[2] == pytest.approx(1.0)
        assert report.mae("cmm")[2] == pytest.approx(2.0)
        assert report.tokens[2] == 2

    def test_empty_bins_are_nan(self, report):
        """Test bins without tokens report NaN"""
        report.add(1, {"cms": 1.0, "cmm": 1.0})
        assert np.isnan(report.mae("cms")[5])

    def test_out_of_range_ignored(self, report):
        """Test tokens above 256 are not binned"""
        report.add(300, {"cms": 0.0, "cmm": 0.0})
        assert report.tokens.sum() == 0

    def test_missing_estimate(self, report):
        """Test every estimator must report"""
        with pytest.raises(ReportException):
            report.add(2, {"cms": 2.0})

    def test_unknown_estimator(self, report):
        """Test asking for an unknown estimator raises"""
        with pytest.raises(ReportException):
            report.mae("dp-mean")

    def test_needs_estimators(self):
        """Test an empty estimator list is rejected"""
        with pytest.raises(ReportException):
            BinnedMaeReport(config="x", estimators=())

    def test_text_table(self, report):
        """Test the text table has a header, one line per bin and dashes for empty bins"""
        report.add(1, {"cms": 1.5, "cmm": 1.0})
        lines = report.to_text().splitlines()
        assert lines[0] == "config 320x2"
        assert lines[1].split() == ["bin", "cms", "cmm", "tokens"]
        assert len(lines) == 2 + len(BIN_EDGES) - 1
        assert lines[2].split() == ["(0,1]", "0.50", "0.00", "1"]
        assert lines[3].split() == ["(1,2]", "-", "-", "0"]

    def test_rows(self, report):
        """Test one CSV row per estimator and bin"""
        report.add(1, {"cms": 2.0, "cmm": 1.0})
        rows = report.rows()
        assert len(rows) == 2 * (len(BIN_EDGES) - 1)
        assert rows[0]["mae"] == "1.000000"
        assert rows[1]["mae"] == ""


class TestWriteCsv:
    """Test CSV output"""

    def test_write(self, tmp_path):
        """Test the CSV holds a header and every row of every report"""
        first = BinnedMaeReport(config="320x2", estimators=("cms",))
        second = BinnedMaeReport(config="160x4", estimators=("cms",))
        first.add(2, {"cms": 3.0})
        path = tmp_path / "mae.csv"
        write_csv([first, second], path)
        with path.open() as handle:
            rows = list(csv.DictReader(handle))
        assert tuple(rows[0].keys()) == CSV_FIELDS
        assert len(rows) == 2 * (len(BIN_EDGES) - 1)
        assert {row["config"] for row in rows} == {"320x2", "160x4"}

    def test_unwritable(self, tmp_path):
        """Test an unwritable path raises a write error"""
        with pytest.raises(ReportWriteException):
            write_csv([BinnedMaeReport(config="x", estimators=("cms",))], tmp_path / "missing" / "out.csv")
