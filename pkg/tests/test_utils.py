"""
Unit tests for utils module.
"""

import logging
from pathlib import Path
from unittest.mock import patch

import pytest
from rich.logging import RichHandler

from ddlab.utils import (
    configure_logging,
    describe_path,
    ensure_dir,
    expand_path,
    parse_csv_floats,
)


class TestPaths:
    """Tests for path utility functions."""

    def test_expand_path(self, monkeypatch, tmp_path):
        """Test ~ and environment variables are expanded."""
        monkeypatch.setenv("DDLAB_RUNS", str(tmp_path))
        assert expand_path("$DDLAB_RUNS/a") == (tmp_path / "a").resolve()

        with patch.dict("os.environ", {"HOME": str(tmp_path)}):
            assert expand_path("~/b") == (tmp_path / "b").resolve()

    def test_ensure_dir(self, tmp_path):
        """Test nested output directories are created."""
        out = ensure_dir(str(tmp_path / "x" / "y"))
        assert out.is_dir()
        assert ensure_dir(str(out)) == out

    def test_describe_path(self):
        """Test home is collapsed to ~."""
        assert describe_path(None) == "-"
        assert describe_path(Path.home() / "runs") == "~/runs"
        assert describe_path(Path("/nowhere/runs")) == "/nowhere/runs"


class TestParsing:
    """Tests for comma separated numbers."""

    def test_parse(self):
        """Test numbers with spaces and exponents."""
        assert parse_csv_floats("0.1, 0.2,1e-3") == [0.1, 0.2, 1e-3]
        assert parse_csv_floats("-4,4,201") == [-4.0, 4.0, 201.0]

    @pytest.mark.parametrize("text", ["", " , ", "0.1,abc"])
    def test_invalid(self, text):
        """Test empty lists and non-numbers."""
        with pytest.raises(ValueError):
            parse_csv_floats(text)


class TestLogging:
    """Tests for logging setup."""

    @pytest.mark.parametrize("verbosity,level", [(0, logging.WARNING), (1, logging.INFO), (2, logging.DEBUG), (5, logging.DEBUG)])
    def test_levels(self, verbosity, level):
        """Test verbosity maps to a level."""
        logger = configure_logging(verbosity)
        assert logger.name == "ddlab"
        assert logger.level == level

    def test_no_stacked_handlers(self):
        """Test repeated setup keeps a single rich handler."""
        configure_logging(1)
        logger = configure_logging(1)
        assert sum(isinstance(h, RichHandler) for h in logger.handlers) == 1
