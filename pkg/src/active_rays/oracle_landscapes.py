"""Analytic energy landscapes built from known building shapes.

D is the (optionally blurred) unsigned distance to the shape boundary, so
it vanishes on the outline; beta is constant; kappa is constant inside the
shape and zero outside, so the balloon only inflates within the object.
"""

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import gaussian_filter
from shapely.geometry import MultiPoint, Point, Polygon, box as box_polygon

from .energy_landscape import EnergyLandscape
from .errors import ConfigError, DegenerateShapeError, FormatError, ShapeSpecError
from .raster_metrics import Mask, polygon_contains, rasterize_polygon

logger = logging.getLogger(__name__)


class ShapeKind(str, Enum):
    disk = "disk"
    rectangle = "rectangle"
    polygon = "polygon"
    rounded_rectangle = "rounded-rectangle"


@dataclass(frozen=True, eq=False)
class ShapeSpec:
    """Ground-truth building outline on an H x W image.

    Disks use ``center`` and ``radius``; rectangles ``box`` as
    ``(x0, y0, x1, y1)``; rounded rectangles ``box`` plus corner
    ``radius``; polygons ``vertices``.
    """

    kind: ShapeKind
    height: int
    width: int
    center: Optional[Tuple[float, float]] = None
    radius: Optional[float] = None
    box: Optional[Tuple[float, float, float, float]] = None
    vertices: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ShapeKind(self.kind))
        if self.height < 2 or self.width < 2:
            raise ShapeSpecError(f"image must be at least 2x2, got {self.height}x{self.width}")
        kind = self.kind
        if kind is ShapeKind.disk:
            if self.center is None or self.radius is None:
                raise ShapeSpecError("disk needs 'center' and 'radius'")
            if self.radius < 0:
                raise ShapeSpecError(f"disk radius must be non-negative, got {self.radius}")
        elif kind in (ShapeKind.rectangle, ShapeKind.rounded_rectangle):
            if self.box is None or len(self.box) != 4:
                raise ShapeSpecError(f"{kind.value} needs 'x0', 'y0', 'x1', 'y1'")
            x0, y0, x1, y1 = self.box
            if x1 < x0 or y1 < y0:
                raise ShapeSpecError(f"{kind.value} corners are reversed: {self.box}")
            if kind is ShapeKind.rounded_rectangle:
                if self.radius is None or self.radius < 0:
                    raise ShapeSpecError("rounded-rectangle needs a non-negative 'radius'")
                if self.radius > min(x1 - x0, y1 - y0) / 2:
                    raise ShapeSpecError(
                        f"corner radius {self.radius} exceeds half the shorter side"
                    )
        else:
            if self.vertices is None:
                raise ShapeSpecError("polygon needs 'vertices'")
            vertices = np.array(self.vertices, dtype=np.float64)
            if vertices.ndim != 2 or vertices.shape[1] != 2 or vertices.shape[0] < 3:
                raise ShapeSpecError("polygon needs at least 3 [x, y] vertices")
            footprint = Polygon(vertices)
            # collinear outlines are left for synth_landscape to report as zero area
            if footprint.convex_hull.area > 0 and not footprint.is_valid:
                raise ShapeSpecError("polygon edges intersect each other")
            vertices.setflags(write=False)
            object.__setattr__(self, "vertices", vertices)

        if not self._overlaps_image():
            raise ShapeSpecError(
                f"{kind.value} lies outside the {self.width}x{self.height} image"
            )

    @classmethod
    def disk(cls, center, radius, height, width) -> "ShapeSpec":
        return cls(ShapeKind.disk, height, width, center=tuple(center), radius=radius)

    @classmethod
    def rectangle(cls, box, height, width) -> "ShapeSpec":
        return cls(ShapeKind.rectangle, height, width, box=tuple(box))

    @classmethod
    def rounded_rectangle(cls, box, radius, height, width) -> "ShapeSpec":
        return cls(ShapeKind.rounded_rectangle, height, width, box=tuple(box), radius=radius)

    @classmethod
    def polygon(cls, vertices, height, width) -> "ShapeSpec":
        return cls(ShapeKind.polygon, height, width, vertices=np.asarray(vertices, dtype=np.float64))

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        if self.kind is ShapeKind.disk:
            x_c, y_c = self.center
            return x_c - self.radius, y_c - self.radius, x_c + self.radius, y_c + self.radius
        if self.kind is ShapeKind.polygon:
            lo = self.vertices.min(axis=0)
            hi = self.vertices.max(axis=0)
            return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])
        return tuple(float(v) for v in self.box)

    @property
    def footprint(self) -> Polygon:
        """The shape as a shapely polygon; disks and rounded corners are approximated."""
        if self.kind is ShapeKind.disk:
            return Point(self.center).buffer(self.radius, 64)
        if self.kind is ShapeKind.polygon:
            return Polygon(self.vertices)
        if self.kind is ShapeKind.rounded_rectangle and self.radius > 0:
            x0, y0, x1, y1 = self.box
            r = self.radius
            core = MultiPoint([(x0 + r, y0 + r), (x1 - r, y0 + r), (x1 - r, y1 - r), (x0 + r, y1 - r)])
            return core.convex_hull.buffer(r, 16)
        return box_polygon(*self.box)

    def _overlaps_image(self) -> bool:
        footprint = self.footprint
        if footprint.is_empty or not footprint.area > 0:
            x_lo, y_lo, x_hi, y_hi = self.bounds
            return x_hi > 0 and x_lo < self.width and y_hi > 0 and y_lo < self.height
        return footprint.intersection(box_polygon(0, 0, self.width, self.height)).area > 0

    @property
    def area(self) -> float:
        if self.kind is ShapeKind.disk:
            return float(np.pi * self.radius ** 2)
        if self.kind is ShapeKind.polygon:
            return float(self.footprint.area)
        x0, y0, x1, y1 = self.box
        area = (x1 - x0) * (y1 - y0)
        if self.kind is ShapeKind.rounded_rectangle:
            area -= (4 - np.pi) * self.radius ** 2
        return float(area)

    def outline(self) -> np.ndarray:
        """Vertex list of polygonal kinds."""
        if self.kind is ShapeKind.polygon:
            return self.vertices
        if self.kind is ShapeKind.rectangle:
            x0, y0, x1, y1 = self.box
            return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=np.float64)
        raise ShapeSpecError(f"{self.kind.value} has no polygonal outline")

    def _rounded_box_sdf(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        x0, y0, x1, y1 = self.box
        r = self.radius
        half_x, half_y = (x1 - x0) / 2, (y1 - y0) / 2
        q_x = np.abs(xs - (x0 + x1) / 2) - (half_x - r)
        q_y = np.abs(ys - (y0 + y1) / 2) - (half_y - r)
        outside = np.hypot(np.maximum(q_x, 0.0), np.maximum(q_y, 0.0))
        inside = np.minimum(np.maximum(q_x, q_y), 0.0)
        return outside + inside - r

    def boundary_distance(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Unsigned Euclidean distance from each point to the outline."""
        if self.kind is ShapeKind.disk:
            x_c, y_c = self.center
            return np.abs(np.hypot(xs - x_c, ys - y_c) - self.radius)
        if self.kind is ShapeKind.rounded_rectangle:
            return np.abs(self._rounded_box_sdf(xs, ys))

        vertices = self.outline()
        best = np.full(np.broadcast(xs, ys).shape, np.inf)
        for a, b in zip(vertices, np.roll(vertices, -1, axis=0)):
            edge = b - a
            length_sq = float(edge @ edge)
            if length_sq == 0.0:
                t = 0.0
            else:
                t = np.clip(((xs - a[0]) * edge[0] + (ys - a[1]) * edge[1]) / length_sq, 0.0, 1.0)
            best = np.minimum(best, np.hypot(xs - (a[0] + t * edge[0]), ys - (a[1] + t * edge[1])))
        return best

    def contains(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        if self.kind is ShapeKind.disk:
            x_c, y_c = self.center
            return (xs - x_c) ** 2 + (ys - y_c) ** 2 < self.radius ** 2
        if self.kind is ShapeKind.rounded_rectangle:
            return self._rounded_box_sdf(xs, ys) < 0
        return polygon_contains(self.outline(), xs, ys)


@dataclass(frozen=True)
class SynthParams:
    d_scale: float = 1.0
    beta_const: float = 0.0
    kappa_const: float = 0.0
    blur_sigma: float = 0.0

    def __post_init__(self):
        if not self.d_scale > 0:
            raise ConfigError(f"d_scale must be positive, got {self.d_scale}")
        for name in ("beta_const", "kappa_const", "blur_sigma"):
            value = getattr(self, name)
            if not value >= 0:
                raise ConfigError(f"{name} must be non-negative, got {value}")


def _lattice(height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    return xs, ys


def synth_landscape(
    shape: ShapeSpec,
    d_scale: float = 1.0,
    beta_const: float = 0.0,
    kappa_const: float = 0.0,
    blur_sigma: float = 0.0,
) -> EnergyLandscape:
    """
    Build the analytic landscape of a shape.

    Maps are sampled on the integer lattice ``(c, r)``.

    Raises:
        DegenerateShapeError: If the shape has zero area
        ConfigError: If a parameter is out of range
    """
    params = SynthParams(d_scale, beta_const, kappa_const, blur_sigma)
    if not shape.area > 0:
        raise DegenerateShapeError(f"{shape.kind.value} has zero area")

    xs, ys = _lattice(shape.height, shape.width)
    data = params.d_scale * shape.boundary_distance(xs, ys)
    if params.blur_sigma > 0:
        data = gaussian_filter(data, sigma=params.blur_sigma, mode="nearest")
    beta = np.full(data.shape, params.beta_const)
    kappa = np.where(shape.contains(xs, ys), params.kappa_const, 0.0)
    logger.debug("synthesized %s landscape %dx%d (D max %.4g)",
                 shape.kind.value, shape.height, shape.width, float(data.max()))
    return EnergyLandscape(D=data, beta=beta, kappa=kappa)


def gt_mask(shape: ShapeSpec) -> Mask:
    """Pixels whose centers ``(c + 0.5, r + 0.5)`` lie inside the shape."""
    if shape.kind in (ShapeKind.rectangle, ShapeKind.polygon):
        return rasterize_polygon(shape.outline(), shape.height, shape.width)
    xs, ys = _lattice(shape.height, shape.width)
    return Mask(shape.contains(xs + 0.5, ys + 0.5))


def _dimension(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ShapeSpecError(f"'{name}' must be an integer, got {value!r}")
    if isinstance(value, float) and not value.is_integer():
        raise ShapeSpecError(f"'{name}' must be an integer, got {value!r}")
    return int(value)


def _pair(value: Any, name: str) -> Tuple[float, float]:
    if not isinstance(value, Sequence) or len(value) != 2:
        raise ShapeSpecError(f"'{name}' must be an [x, y] pair")
    return float(value[0]), float(value[1])


def shape_from_dict(document: Dict[str, Any]) -> Tuple[ShapeSpec, SynthParams]:
    """
    Parse a shape-spec document (see README for the schema).

    Raises:
        ShapeSpecError: On missing or mistyped fields
    """
    try:
        height = _dimension(document["height"], "height")
        width = _dimension(document["width"], "width")
        shape = document["shape"]
        kind = ShapeKind(shape["kind"])
        if kind is ShapeKind.disk:
            spec = ShapeSpec.disk(_pair(shape["center"], "center"), float(shape["radius"]),
                                  height, width)
        elif kind is ShapeKind.polygon:
            vertices = [_pair(v, "vertices") for v in shape["vertices"]]
            spec = ShapeSpec.polygon(vertices, height, width)
        else:
            box = tuple(float(shape[k]) for k in ("x0", "y0", "x1", "y1"))
            if kind is ShapeKind.rectangle:
                spec = ShapeSpec.rectangle(box, height, width)
            else:
                spec = ShapeSpec.rounded_rectangle(box, float(shape["radius"]), height, width)
        params = SynthParams(
            d_scale=float(document.get("d_scale", 1.0)),
            beta_const=float(document.get("beta", 0.0)),
            kappa_const=float(document.get("kappa", 0.0)),
            blur_sigma=float(document.get("blur_sigma", 0.0)),
        )
    except ShapeSpecError:
        raise
    except ConfigError as e:
        raise ShapeSpecError(str(e))
    except (KeyError, TypeError, ValueError) as e:
        raise ShapeSpecError(f"invalid shape spec: {e!r}")
    return spec, params


def load_shape_spec(path: Path) -> Tuple[ShapeSpec, SynthParams]:
    """Read a shape-spec JSON file."""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FormatError(f"malformed JSON: {e}", path=Path(path))
    if not isinstance(document, dict):
        raise FormatError("shape spec must be a JSON object", path=Path(path))
    return shape_from_dict(document)
