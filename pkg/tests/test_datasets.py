#!/usr/bin/env python3
import pytest
import numpy as np
from collections import Counter

from sketchbit.bench.core.datasets import (
    DatasetDescriptor,
    DatasetException,
    DatasetFormatException,
    generate_zipf,
    load_dataset,
    materialize,
    read_tokens,
    read_uci_bow,
    write_tokens,
)


"""
Tests for bench.core.datasets module
"""


class TestZipf:
    """Test synthetic Zipf streams"""

    def test_deterministic(self):
        """Test the same seed gives the same stream"""
        assert generate_zipf(1.5, 1000, vocab=500, seed=3) == generate_zipf(1.5, 1000, vocab=500, seed=3)

    def test_single_word_vocabulary(self):
        """Test a one-word vocabulary repeats rank 1"""
        assert set(generate_zipf(2.0, 50, vocab=1)) == {"1"}

    def test_ranks_in_vocabulary(self):
        """Test every rank lies in 1..vocab"""
        ranks = [int(t) for t in generate_zipf(1.2, 5000, vocab=100, seed=1)]
        assert min(ranks) >= 1 and max(ranks) <= 100

    def test_rank_one_frequency(self):
        """Test the top rank appears about m / H(vocab, c) times"""
        c, m, vocab = 2.5, 100_000, 100_000
        p1 = 1.0 / np.sum(np.arange(1, vocab + 1, dtype=float) ** -c)
        count = Counter(generate_zipf(c, m, vocab=vocab, seed=7))["1"]
        assert abs(count - m * p1) < 4 * np.sqrt(m * p1 * (1 - p1))

    @pytest.mark.parametrize("c", [1.0, 0.5])
    def test_exponent_above_one(self, c):
        """Test c <= 1 is rejected"""
        with pytest.raises(DatasetException):
            generate_zipf(c, 10)

    def test_empty_stream(self):
        """Test m = 0 is rejected"""
        with pytest.raises(DatasetException):
            generate_zipf(1.5, 0)


class TestTokenFiles:
    """Test plain token files"""

    def test_round_trip(self, tmp_path):
        """Test written tokens read back unchanged"""
        path = tmp_path / "tokens.txt"
        write_tokens(["a", "b b", "a"], path)
        assert read_tokens(path) == ["a", "b b", "a"]

    def test_blank_lines_skipped(self, tmp_path):
        """Test blank lines are not tokens"""
        path = tmp_path / "tokens.txt"
        path.write_text("x\n\n  \ny\n")
        assert read_tokens(path) == ["x", "y"]

    def test_split(self, tmp_path):
        """Test split lowercases and splits on whitespace"""
        path = tmp_path / "text.txt"
        path.write_text("The cat\tSAT on\n\nthe Mat\n")
        assert read_tokens(path, split=True) == ["the", "cat", "sat", "on", "the", "mat"]

    def test_missing_file(self, tmp_path):
        """Test an unreadable file raises a format error"""
        with pytest.raises(DatasetFormatException):
            read_tokens(tmp_path / "missing.txt")

    def test_empty_stream(self, tmp_path):
        """Test an empty file is refused as a dataset"""
        path = tmp_path / "empty.txt"
        path.write_text("\n\n")
        with pytest.raises(DatasetException):
            load_dataset("text", path)


class TestUciBagOfWords:
    """Test UCI bag-of-words files"""

    def test_expand_triples(self, tmp_path):
        """Test triples expand into repeated word ids"""
        path = tmp_path / "docword.txt"
        path.write_text("2\n3\n2\n1 1 2\n2 3 1\n")
        assert read_uci_bow(path) == ["1", "1", "3"]

    def test_bad_header(self, tmp_path):
        """Test a non-integer header names its line"""
        path = tmp_path / "docword.txt"
        path.write_text("D\n3\n1\n1 1 1\n")
        with pytest.raises(DatasetFormatException, match=":1:"):
            read_uci_bow(path)

    def test_bad_triple(self, tmp_path):
        """Test a short triple names its line"""
        path = tmp_path / "docword.txt"
        path.write_text("1\n3\n2\n1 1 1\n1 2\n")
        with pytest.raises(DatasetFormatException, match=":5:"):
            read_uci_bow(path)

    def test_short_header(self, tmp_path):
        """Test a file without the three header lines is rejected"""
        path = tmp_path / "docword.txt"
        path.write_text("1\n3\n")
        with pytest.raises(DatasetFormatException):
            read_uci_bow(path)

    def test_load_dataset(self, tmp_path):
        """Test load_dataset dispatches on the source"""
        path = tmp_path / "docword.txt"
        path.write_text("1\n2\n1\n1 2 3\n")
        assert load_dataset("uci", path) == ["2", "2", "2"]
        with pytest.raises(DatasetException):
            load_dataset("zipf", path)


class TestDescriptor:
    """Test dataset descriptors"""

    def test_zipf_materializes(self):
        """Test a Zipf descriptor generates its stream"""
        descriptor = DatasetDescriptor(source="zipf", m=200, exponent=1.5, vocab=50, seed=2)
        assert materialize(descriptor) == generate_zipf(1.5, 200, vocab=50, seed=2)
        assert descriptor.label() == "zipf(c=1.5)"

    def test_file_materializes(self, tmp_path):
        """Test a text descriptor reads its file"""
        path = tmp_path / "t.txt"
        path.write_text("a\nb\n")
        descriptor = DatasetDescriptor(source="text", m=2, path=path)
        assert materialize(descriptor) == ["a", "b"]
        assert descriptor.label() == "text:t.txt"

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"source": "csv", "m": 1},
            {"source": "text", "m": 0},
            {"source": "zipf", "m": 10, "exponent": 1.0},
            {"source": "zipf", "m": 10},
        ],
    )
    def test_invalid(self, kwargs):
        """Test invalid descriptors are rejected"""
        with pytest.raises(DatasetException):
            DatasetDescriptor(**kwargs)

    def test_file_source_needs_path(self):
        """Test a file descriptor without a path cannot materialize"""
        with pytest.raises(DatasetException):
            materialize(DatasetDescriptor(source="uci", m=1))
