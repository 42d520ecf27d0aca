#!/usr/bin/env python3
import argparse
import pytest

from sketchbit.helpers.config_file import (
    CONFIG_ENV_VAR,
    ConfigFileException,
    ConfigKeyException,
    apply_config_defaults,
    load_config,
    resolve_config_path,
)


"""
Tests for helpers.config_file module
"""


class TestConfigFile:
    """Test key = value config files"""

    @pytest.fixture
    def parser(self):
        """Parser with one flag of each kind"""
        parser = argparse.ArgumentParser(prog="demo")
        parser.add_argument("--config")
        parser.add_argument("-j", "--j_buckets", type=int, default=320)
        parser.add_argument("--split", action="store_true")
        parser.add_argument("--estimators", nargs="+", default=["cms"])
        parser.add_argument("--model", choices=["dp", "pyp"], default="pyp")
        return parser

    def test_load(self, tmp_path):
        """Test comments, blank lines and dashed keys"""
        path = tmp_path / "c.conf"
        path.write_text("# header\n\nj-buckets = 64   # inline\nmodel=dp\n")
        assert load_config(path) == {"j_buckets": "64", "model": "dp"}

    def test_malformed_line(self, tmp_path):
        """Test lines without '=' name their line number"""
        path = tmp_path / "c.conf"
        path.write_text("model = dp\nj_buckets 64\n")
        with pytest.raises(ConfigFileException, match=":2:"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        """Test an unreadable file raises"""
        with pytest.raises(ConfigFileException):
            load_config(tmp_path / "missing.conf")

    def test_resolve_prefers_flag(self, tmp_path, monkeypatch):
        """Test the flag wins over the environment variable"""
        monkeypatch.setenv(CONFIG_ENV_VAR, str(tmp_path / "env.conf"))
        assert resolve_config_path(str(tmp_path / "flag.conf")) == tmp_path / "flag.conf"
        assert resolve_config_path(None) == tmp_path / "env.conf"

    def test_resolve_none(self, monkeypatch):
        """Test no flag and no environment variable means no config"""
        monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
        assert resolve_config_path(None) is None

    def test_defaults_converted(self, parser):
        """Test values are converted with the flag's type"""
        apply_config_defaults(
            parser, {"j_buckets": "64", "split": "yes", "estimators": "cms, dp-mean", "model": "dp"}
        )
        args = parser.parse_args([])
        assert args.j_buckets == 64
        assert args.split is True
        assert args.estimators == ["cms", "dp-mean"]
        assert args.model == "dp"

    def test_flags_win(self, parser):
        """Test explicit flags override config defaults"""
        apply_config_defaults(parser, {"j_buckets": "64"})
        assert parser.parse_args(["-j", "8"]).j_buckets == 8

    @pytest.mark.parametrize(
        "config",
        [{"buckets": "3"}, {"j_buckets": "many"}, {"split": "maybe"}, {"model": "hmm"}],
    )
    def test_bad_values(self, parser, config):
        """Test unknown keys and unconvertible values are rejected"""
        with pytest.raises(ConfigKeyException):
            apply_config_defaults(parser, config)
