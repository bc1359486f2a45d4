"""
SVG overlays of contours on a raster background.

The background (a D map or a source image) is embedded as a base64 PNG;
each contour becomes one closed path. Ground truth is drawn in blue and
predictions in yellow.
"""

import base64
import io
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from PIL import Image

from .errors import DimensionMismatchError


class ContourRole(str, Enum):
    ground_truth = "gt"
    prediction = "pred"


STROKE_COLORS = {
    ContourRole.ground_truth: "#0000ff",
    ContourRole.prediction: "#ffff00",
}


@dataclass(frozen=True)
class Overlay:
    vertices: np.ndarray
    role: ContourRole


def grayscale(values: np.ndarray) -> Image.Image:
    """Map a non-negative field onto 8-bit gray, 0 -> black, max -> white."""
    peak = float(np.max(values))
    scaled = values / peak if peak > 0 else np.zeros_like(values)
    return Image.fromarray(np.round(scaled * 255.0).astype(np.uint8))


def _png_data_uri(image: Image.Image) -> str:
    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return "data:image/png;base64," + base64.b64encode(buffer.getvalue()).decode("ascii")


def _path_data(vertices: np.ndarray) -> str:
    points = [f"{x:.6g},{y:.6g}" for x, y in vertices]
    return "M" + " L".join(points) + " Z"


def check_overlay_bounds(overlays: Sequence[Overlay], width: int, height: int) -> None:
    """
    Raises:
        DimensionMismatchError: If a vertex falls outside [0, W] x [0, H]
    """
    for number, overlay in enumerate(overlays, start=1):
        xs, ys = overlay.vertices[:, 0], overlay.vertices[:, 1]
        if xs.min() < 0 or ys.min() < 0 or xs.max() > width or ys.max() > height:
            raise DimensionMismatchError(
                f"contour {number} ({overlay.role.value}) extends beyond the "
                f"{width}x{height} background"
            )


def render_svg(background: Image.Image, overlays: Sequence[Overlay], stroke_width: float = 1.0) -> str:
    """
    Render contours over a background image.

    Args:
        background: Image whose pixel grid defines the SVG coordinates
        overlays: Contours to draw, in drawing order
        stroke_width: Line width in pixels

    Returns:
        Standalone SVG document
    """
    width, height = background.size
    check_overlay_bounds(overlays, width, height)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'  <image x="0" y="0" width="{width}" height="{height}" '
        f'style="image-rendering:pixelated" href="{_png_data_uri(background)}"/>',
    ]
    for overlay in overlays:
        parts.append(
            f'  <path class="{overlay.role.value}" d="{_path_data(overlay.vertices)}" '
            f'fill="none" stroke="{STROKE_COLORS[overlay.role]}" stroke-width="{stroke_width:g}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
