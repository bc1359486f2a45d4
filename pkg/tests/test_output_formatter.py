"""Tests for output formatter module."""

import json

import pytest

from active_rays.output_formatter import (JsonFormatter, OutputType,
                                          RichTableFormatter, TableFormatter,
                                          TextFormatter, get_formatter)
from active_rays.raster_metrics import EvalReport, SampleScore


@pytest.fixture
def report():
    return EvalReport(
        samples=(
            SampleScore("tile_a", 0.8, False, 9.0, 10.0, 1.0),
            SampleScore("tile_b", 0.6, False, 12.5, 15.0, 2.5),
        ),
        miou=0.7,
        rmse_m2=1.9039,
        resolution_m=0.3,
    )


@pytest.fixture
def bare_report():
    return EvalReport(
        samples=(SampleScore("empty", 1.0, True),),
        miou=1.0,
        rmse_m2=None,
        resolution_m=None,
    )


class TestTextFormatter:
    """Test the TextFormatter class."""

    def test_format_rows(self, report):
        """Test one aligned row per sample."""
        output = TextFormatter().format(report)
        lines = output.split("\n")

        assert lines[0].split() == ["Sample", "IoU", "Pred", "m²", "GT", "m²", "|Error|", "m²"]
        assert lines[2].split() == ["tile_a", "0.800", "9.00", "10.00", "1.00"]
        assert lines[3].split() == ["tile_b", "0.600", "12.50", "15.00", "2.50"]

    def test_format_aggregates(self, report):
        """Test the mIoU and RMSE lines."""
        output = TextFormatter().format(report)

        assert "mIoU  0.700" in output
        assert "RMSE  1.90 m²" in output

    def test_format_without_resolution(self, bare_report):
        """Test that missing areas print as dashes and RMSE is omitted."""
        output = TextFormatter().format(bare_report)

        assert "RMSE" not in output
        assert output.split("\n")[2].split() == ["empty", "1.000", "-", "-", "-"]
        assert "both masks empty" in output

    def test_format_preserves_order(self, report):
        """Test that samples keep the report order."""
        output = TextFormatter().format(report)
        assert output.index("tile_a") < output.index("tile_b")


class TestJsonFormatter:
    """Test the JsonFormatter class."""

    def test_format_valid_json(self, report):
        """Test that output is valid JSON with the report schema."""
        data = json.loads(JsonFormatter().format(report))

        assert data["schema"] == "active-rays/report"
        assert data["miou"] == 0.7
        assert [s["id"] for s in data["samples"]] == ["tile_a", "tile_b"]

    def test_format_null_areas(self, bare_report):
        """Test null areas without a resolution."""
        data = json.loads(JsonFormatter().format(bare_report))

        assert data["rmse_m2"] is None
        assert data["samples"][0]["both_empty"] is True


class TestTableFormatter:
    """Test the TableFormatter class."""

    def test_format_creates_table(self, report):
        """Test that table output contains samples and the footer."""
        output = TableFormatter().format(report)

        assert "tile_a" in output
        assert "tile_b" in output
        assert "mIoU" in output
        assert "0.700" in output
        assert "RMSE" in output


class TestRichTableFormatter:
    """Test the RichTableFormatter class."""

    def test_format_creates_rich_table(self, report):
        """Test that rich table output has title and caption."""
        output = RichTableFormatter().format(report)

        assert "Building Extraction Results" in output
        assert "tile_a" in output
        assert "mIoU 0.700" in output


class TestGetFormatter:
    """Test the get_formatter function."""

    @pytest.mark.parametrize("output_type, expected", [
        (OutputType.text, TextFormatter),
        (OutputType.json, JsonFormatter),
        (OutputType.table, TableFormatter),
        (OutputType.rich_table, RichTableFormatter),
        ("rich-table", RichTableFormatter),
    ])
    def test_get_formatter(self, output_type, expected):
        """Test each output type."""
        assert isinstance(get_formatter(output_type), expected)

    def test_get_invalid_formatter(self):
        """Test that invalid formatter type raises error."""
        with pytest.raises(ValueError, match="Unknown output type"):
            get_formatter("csv")
