#!/usr/bin/env python3
"""Main entry point for the active-rays CLI."""

import logging
from pathlib import Path
from typing import List, NoReturn, Optional, Tuple

import typer
from PIL import Image, UnidentifiedImageError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.progress import Progress, SpinnerColumn, TextColumn
from typing_extensions import Annotated

from .contour_geometry import DEFAULT_VERTICES, MIN_VERTICES, init_circle, to_cartesian
from .energy_landscape import RhoMaxMode, rho_max_for
from .errors import (
    ConfigError,
    DegenerateShapeError,
    DimensionMismatchError,
    ExitCode,
    FormatError,
    InvalidContourError,
    NumericalFailure,
    ShapeSpecError,
    UnmatchedPairError,
)
from .evolution_solver import SolverConfig, evolve
from .file_discovery import find_sample_pairs
from .file_formats import (
    read_contour_csv,
    read_emap,
    read_mask_pgm,
    write_contour_csv,
    write_emap,
    write_json,
    write_mask_pgm,
)
from .oracle_landscapes import gt_mask, load_shape_spec, synth_landscape
from .output_formatter import OutputType, TextFormatter, get_formatter
from .path_utils import format_path, prepare_output
from .raster_metrics import Mask, evaluate_batch, rasterize, rasterize_polygon
from .svg_render import ContourRole, Overlay, grayscale, render_svg

app = typer.Typer(
    name="active-rays",
    help="Evolve polar active contours over energy landscapes and score the outlines.",
    add_completion=False,
    no_args_is_help=True,
    pretty_exceptions_show_locals=False,
    pretty_exceptions_short=True,
    rich_markup_mode="rich",
    add_help_option=True,
    context_settings={"help_option_names": ["-h", "--help"]}
)

# Use stderr for console output to keep stdout clean for actual results
console = Console(stderr=True)


def _fail(message: str, code: ExitCode) -> NoReturn:
    console.print(f"[red]Error:[/red] {escape(message)}")
    raise typer.Exit(int(code))


def _configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False, show_time=False)],
        force=True,
    )


def parse_point(value: Optional[str]) -> Optional[Tuple[float, float]]:
    """Parse an ``x,y`` pair."""
    if value is None:
        return None
    try:
        x, y = (float(part) for part in value.split(","))
    except ValueError:
        raise typer.BadParameter(f"expected 'x,y', got {value!r}")
    return x, y


@app.callback()
def main(
    verbose: Annotated[
        int,
        typer.Option(
            "--verbose", "-v",
            count=True,
            help="Log progress (-v) or every solver iteration (-vv) to stderr"
        )
    ] = 0,
):
    """
    Extract building outlines with active rays: contours parameterized by
    radii along fixed rays, evolved over data, curvature and balloon maps.
    """
    _configure_logging(verbose)


@app.command("synth")
def synth(
    spec: Annotated[
        Path,
        typer.Argument(
            exists=True, dir_okay=False, readable=True,
            help="Shape spec JSON file",
            metavar="SPEC",
        )
    ],
    out: Annotated[
        Path,
        typer.Option("--out", "-o", help="Output landscape (EMAP)")
    ],
    mask: Annotated[
        Path,
        typer.Option("--mask", "-m", help="Output ground-truth mask (PGM)")
    ],
):
    """
    Generate an analytic energy landscape and ground-truth mask from a shape.
    """
    try:
        shape, params = load_shape_spec(spec)
    except (FormatError, ShapeSpecError) as e:
        _fail(str(e), ExitCode.USAGE)
    except OSError as e:
        _fail(f"Error reading input: {e}", ExitCode.IO)

    try:
        landscape = synth_landscape(
            shape,
            d_scale=params.d_scale,
            beta_const=params.beta_const,
            kappa_const=params.kappa_const,
            blur_sigma=params.blur_sigma,
        )
    except DegenerateShapeError as e:
        _fail(str(e), ExitCode.DEGENERATE_SHAPE)

    try:
        write_emap(prepare_output(out), landscape)
        write_mask_pgm(prepare_output(mask), gt_mask(shape))
    except OSError as e:
        _fail(f"Error writing output: {e}", ExitCode.IO)

    console.print(f"[green]Landscape written to:[/green] {format_path(out)}")
    console.print(f"[green]Mask written to:[/green] {format_path(mask)}")


@app.command("evolve")
def evolve_command(
    landscape_path: Annotated[
        Path,
        typer.Option(
            "--landscape", "-l",
            exists=True, dir_okay=False, readable=True,
            help="Input landscape (EMAP)"
        )
    ],
    out: Annotated[
        Path,
        typer.Option("--out", "-o", help="Output contour CSV")
    ],
    trace_path: Annotated[
        Optional[Path],
        typer.Option("--trace", help="Output solver trace JSON")
    ] = None,
    mask_path: Annotated[
        Optional[Path],
        typer.Option("--mask", help="Also write the rasterized contour (PGM)")
    ] = None,
    init_center: Annotated[
        Optional[str],
        typer.Option(
            "--init-center", metavar="X,Y",
            callback=parse_point,
            help="Reference point of the initial circle [default: image center]"
        )
    ] = None,
    init_radius: Annotated[
        Optional[float],
        typer.Option("--init-radius", min=0.0, help="Initial radius in pixels")
    ] = None,
    init_radius_fraction: Annotated[
        float,
        typer.Option(
            "--init-radius-fraction", min=0.0, max=1.0,
            help="Initial radius as a fraction of rho_max (ignored with --init-radius)"
        )
    ] = 0.25,
    vertices: Annotated[
        int,
        typer.Option("--vertices", "-L", min=MIN_VERTICES, help="Vertex count L")
    ] = DEFAULT_VERTICES,
    gamma: Annotated[
        float,
        typer.Option("--gamma", help="Damping of the semi-implicit step")
    ] = 1.0,
    max_iters: Annotated[
        int,
        typer.Option("--max-iters", min=1, help="Iteration limit")
    ] = 400,
    tol: Annotated[
        float,
        typer.Option("--tol", help="Stop when no radius moves more than this (pixels)")
    ] = 1e-3,
    rho_floor: Annotated[
        float,
        typer.Option("--rho-floor", help="Smallest radius allowed (pixels)")
    ] = 0.5,
    rho_max_mode: Annotated[
        RhoMaxMode,
        typer.Option(
            "--rho-max-mode",
            case_sensitive=False,
            help="Radius cap: one value for all rays, or one per ray"
        )
    ] = RhoMaxMode.global_,
    backtracking: Annotated[
        bool,
        typer.Option("--backtracking/--no-backtracking", help="Halve steps that raise the energy")
    ] = True,
):
    """
    Evolve a circular initial contour to a local energy minimum.
    """
    try:
        config = SolverConfig(
            max_iters=max_iters, step_gamma=gamma, tol_rho=tol,
            rho_floor=rho_floor, backtracking=backtracking,
        )
    except ConfigError as e:
        _fail(str(e), ExitCode.USAGE)

    try:
        landscape = read_emap(landscape_path)
    except FormatError as e:
        _fail(str(e), ExitCode.USAGE)
    except OSError as e:
        _fail(f"Error reading input: {e}", ExitCode.IO)

    center = init_center or (landscape.width / 2.0, landscape.height / 2.0)
    try:
        rho_max = rho_max_for(landscape.shape, center, vertices, rho_max_mode)
        radius = init_radius if init_radius is not None else init_radius_fraction * float(rho_max.min())
        init = init_circle(center, radius, vertices, rho_max)
    except InvalidContourError as e:
        _fail(str(e), ExitCode.USAGE)

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
        transient=True
    ) as progress:
        progress.add_task(f"Evolving {vertices}-vertex contour...", total=None)
        try:
            contour, trace = evolve(landscape, init, config)
        except NumericalFailure as e:
            if trace_path:
                write_json(prepare_output(trace_path), e.trace.to_dict())
            _fail(str(e), ExitCode.NUMERICAL_FAILURE)

    try:
        write_contour_csv(prepare_output(out), to_cartesian(contour))
        if trace_path:
            write_json(prepare_output(trace_path), trace.to_dict())
        if mask_path:
            write_mask_pgm(prepare_output(mask_path),
                           rasterize(contour, landscape.height, landscape.width))
    except OSError as e:
        _fail(f"Error writing output: {e}", ExitCode.IO)

    console.print(
        f"[dim]{trace.status.value} after {len(trace)} iteration(s), "
        f"E = {trace.records[-1].energy.total if trace.records else trace.initial_energy.total:.6g}[/dim]"
    )
    console.print(f"[green]Contour written to:[/green] {format_path(out)}")


def _load_pair_masks(pair, from_contours: bool, height: Optional[int], width: Optional[int]):
    if from_contours:
        pred = rasterize_polygon(read_contour_csv(pair.pred_path), height, width)
        gt = rasterize_polygon(read_contour_csv(pair.gt_path), height, width)
        return pred, gt
    return read_mask_pgm(pair.pred_path), read_mask_pgm(pair.gt_path)


@app.command("eval")
def eval_command(
    directory: Annotated[
        Path,
        typer.Argument(
            exists=True, file_okay=False,
            help="Directory of <id>_pred / <id>_gt files",
            metavar="DIR",
        )
    ],
    resolution_m: Annotated[
        Optional[float],
        typer.Option("--resolution-m", min=0.0, help="Ground size of one pixel in meters (enables RMSE)")
    ] = None,
    out: Annotated[
        Optional[Path],
        typer.Option("--out", "-o", help="Write the report as JSON")
    ] = None,
    table: Annotated[
        Optional[Path],
        typer.Option("--table", help="Write the plain-text table")
    ] = None,
    output_type: Annotated[
        OutputType,
        typer.Option(
            "--output-type", "-t",
            help="Format printed to stdout",
            case_sensitive=False,
            show_default=True,
        )] = OutputType.text,
    jobs: Annotated[
        int,
        typer.Option("--jobs", "-j", min=1, help="Samples scored in parallel")
    ] = 1,
    from_contours: Annotated[
        bool,
        typer.Option("--from-contours", help="Pair vertex CSVs instead of PGM masks")
    ] = False,
    height: Annotated[
        Optional[int],
        typer.Option("--height", min=1, help="Raster height for --from-contours")
    ] = None,
    width: Annotated[
        Optional[int],
        typer.Option("--width", min=1, help="Raster width for --from-contours")
    ] = None,
):
    """
    Score predicted masks against ground truth (mIoU, area RMSE).
    """
    if resolution_m is not None and resolution_m <= 0:
        raise typer.BadParameter("--resolution-m must be positive")
    if from_contours and (height is None or width is None):
        raise typer.BadParameter("--from-contours needs --height and --width")

    try:
        pairs = find_sample_pairs(directory, ".csv" if from_contours else ".pgm")
    except UnmatchedPairError as e:
        _fail(str(e), ExitCode.UNMATCHED_PAIR)

    console.print(f"[dim]Found {len(pairs)} sample pair(s)[/dim]")

    samples: List[Tuple[str, Mask, Mask]] = []
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
        transient=True
    ) as progress:
        for pair in pairs:
            task = progress.add_task(f"Loading {pair.sample_id}...", total=None)
            try:
                pred, gt = _load_pair_masks(pair, from_contours, height, width)
            except FormatError as e:
                _fail(str(e), ExitCode.USAGE)
            except OSError as e:
                _fail(f"Error reading input: {e}", ExitCode.IO)
            samples.append((pair.sample_id, pred, gt))
            progress.update(task, completed=True)

    try:
        report = evaluate_batch(samples, resolution_m=resolution_m, max_workers=jobs)
    except DimensionMismatchError as e:
        _fail(str(e), ExitCode.DIMENSION_MISMATCH)

    try:
        if out:
            write_json(prepare_output(out), report.to_dict())
        if table:
            prepare_output(table).write_text(TextFormatter().format(report) + "\n", encoding="utf-8")
    except OSError as e:
        _fail(f"Error writing output: {e}", ExitCode.IO)

    # Print to stdout (not stderr) for pipeable output
    print(get_formatter(output_type).format(report))


@app.command("render")
def render_command(
    out: Annotated[
        Path,
        typer.Option("--out", "-o", help="Output SVG")
    ],
    landscape_path: Annotated[
        Optional[Path],
        typer.Option(
            "--landscape", "-l", exists=True, dir_okay=False,
            help="Landscape whose D map becomes the background"
        )
    ] = None,
    image_path: Annotated[
        Optional[Path],
        typer.Option("--image", exists=True, dir_okay=False, help="Source image background")
    ] = None,
    gt: Annotated[
        Optional[List[Path]],
        typer.Option("--gt", exists=True, dir_okay=False, help="Ground-truth contour CSV (repeatable)")
    ] = None,
    pred: Annotated[
        Optional[List[Path]],
        typer.Option("--pred", exists=True, dir_okay=False, help="Predicted contour CSV (repeatable)")
    ] = None,
):
    """
    Draw contours over a landscape or image: ground truth blue, predictions yellow.
    """
    if landscape_path is None and image_path is None:
        raise typer.BadParameter("give --landscape or --image")
    if not gt and not pred:
        raise typer.BadParameter("give at least one --gt or --pred contour")

    try:
        background = None
        if landscape_path is not None:
            landscape = read_emap(landscape_path)
            background = grayscale(landscape.D)
        if image_path is not None:
            with Image.open(image_path) as source:
                image = source.convert("RGB")
            if background is not None and image.size != background.size:
                _fail(
                    f"image is {image.size[0]}x{image.size[1]} but landscape is "
                    f"{background.size[0]}x{background.size[1]}",
                    ExitCode.DIMENSION_MISMATCH,
                )
            background = image
        overlays = [Overlay(read_contour_csv(path), ContourRole.ground_truth) for path in gt or []]
        overlays += [Overlay(read_contour_csv(path), ContourRole.prediction) for path in pred or []]
    except (FormatError, UnidentifiedImageError) as e:
        _fail(str(e), ExitCode.USAGE)
    except OSError as e:
        _fail(f"Error reading input: {e}", ExitCode.IO)

    try:
        document = render_svg(background, overlays)
    except DimensionMismatchError as e:
        _fail(str(e), ExitCode.DIMENSION_MISMATCH)

    try:
        prepare_output(out).write_text(document, encoding="utf-8")
    except OSError as e:
        _fail(f"Error writing output: {e}", ExitCode.IO)

    console.print(f"[green]SVG written to:[/green] {format_path(out)}")


def cli():
    """Main entry point for the CLI."""
    app()


if __name__ == "__main__":
    cli()
