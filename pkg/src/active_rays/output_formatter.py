"""Output formatting module for evaluation reports."""

from abc import ABC, abstractmethod
from enum import Enum
from typing import List, Optional

from rich.box import ROUNDED, SIMPLE
from rich.console import Console
from rich.table import Table

from .file_formats import dump_json
from .raster_metrics import EvalReport


class OutputType(str, Enum):
    json = "json"
    text = "text"
    table = "table"
    rich_table = "rich-table"


def _area(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.2f}"


def _rows(report: EvalReport) -> List[List[str]]:
    return [
        [s.sample_id, f"{s.iou:.3f}", _area(s.pred_area_m2), _area(s.gt_area_m2),
         _area(s.area_error_m2)]
        for s in report.samples
    ]


HEADERS = ["Sample", "IoU", "Pred m²", "GT m²", "|Error| m²"]


class OutputFormatter(ABC):
    """Abstract base class for report formatters."""

    @abstractmethod
    def format(self, report: EvalReport) -> str:
        """
        Format the report for output.

        Args:
            report: Scores of one evaluation run

        Returns:
            Formatted string output
        """
        pass


class TextFormatter(OutputFormatter):
    """Aligned plain-text table followed by the aggregate rows."""

    def format(self, report: EvalReport) -> str:
        rows = [HEADERS] + _rows(report)
        widths = [max(len(row[i]) for row in rows) for i in range(len(HEADERS))]
        lines = []
        for number, row in enumerate(rows):
            cells = [row[0].ljust(widths[0])] + [
                cell.rjust(width) for cell, width in zip(row[1:], widths[1:])
            ]
            lines.append("  ".join(cells).rstrip())
            if number == 0:
                lines.append("  ".join("-" * width for width in widths))

        lines.append("")
        lines.append(f"mIoU  {report.miou:.3f}")
        if report.rmse_m2 is not None:
            lines.append(f"RMSE  {report.rmse_m2:.2f} m²  (resolution {report.resolution_m:g} m/px)")
        both_empty = sum(s.both_empty for s in report.samples)
        if both_empty:
            lines.append(f"note: {both_empty} sample(s) with both masks empty scored IoU 1.0")
        return "\n".join(lines)


class JsonFormatter(OutputFormatter):
    """JSON formatter for structured output."""

    def format(self, report: EvalReport) -> str:
        return dump_json(report.to_dict()).rstrip("\n")


class TableFormatter(OutputFormatter):
    """Table formatter using Rich library with simple box style."""

    def format(self, report: EvalReport) -> str:
        console = Console()
        table = Table(box=SIMPLE, safe_box=True, show_footer=True)

        table.add_column("Sample", style="cyan", footer="mIoU")
        table.add_column("IoU", style="yellow", justify="right", footer=f"{report.miou:.3f}")
        table.add_column("Pred m²", justify="right")
        table.add_column("GT m²", justify="right", footer="RMSE" if report.rmse_m2 is not None else "")
        table.add_column("|Error| m²", style="green", justify="right",
                         footer=_area(report.rmse_m2) if report.rmse_m2 is not None else "")

        for row in _rows(report):
            table.add_row(*row)

        with console.capture() as capture:
            console.print(table)

        return capture.get()


class RichTableFormatter(OutputFormatter):
    """Rich table formatter with fancy styling."""

    def format(self, report: EvalReport) -> str:
        console = Console()
        table = Table(
            title="Building Extraction Results",
            box=ROUNDED,
            safe_box=True,
            show_header=True,
            header_style="bold magenta"
        )

        table.add_column("Sample", style="bold cyan", no_wrap=False)
        table.add_column("IoU", style="yellow", justify="right", width=7)
        table.add_column("Pred m²", justify="right")
        table.add_column("GT m²", justify="right")
        table.add_column("|Error| m²", style="green", justify="right")

        for row_count, row in enumerate(_rows(report)):
            style = "dim" if row_count % 2 else None
            table.add_row(*row, style=style)

        caption = f"[dim]mIoU {report.miou:.3f} over {len(report.samples)} samples"
        if report.rmse_m2 is not None:
            caption += f", RMSE {report.rmse_m2:.2f} m²"
        table.caption = caption + "[/dim]"

        with console.capture() as capture:
            console.print(table)

        return capture.get()


def get_formatter(output_type: OutputType) -> OutputFormatter:
    """
    Get the appropriate formatter based on output type.

    Args:
        output_type: Type of output formatter ('text', 'json', 'table', 'rich-table')

    Returns:
        OutputFormatter instance

    Raises:
        ValueError: If output_type is not recognized
    """
    formatters = {
        'text': TextFormatter,
        'json': JsonFormatter,
        'table': TableFormatter,
        'rich-table': RichTableFormatter,
    }

    formatter_class = formatters.get(output_type)
    if not formatter_class:
        raise ValueError(f"Unknown output type: {output_type}")

    return formatter_class()
