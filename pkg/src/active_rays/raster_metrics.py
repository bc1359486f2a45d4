"""Contour rasterization and segmentation metrics (IoU, area error)."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .contour_geometry import PolarContour, to_cartesian
from .errors import DimensionMismatchError

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "active-rays/report"
REPORT_VERSION = 1


@dataclass(frozen=True, eq=False)
class Mask:
    """Binary raster, ``True`` where the building is.

    ``degenerate`` flags masks produced from a collinear polygon.
    """

    bits: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise DimensionMismatchError(f"mask must be 2-D, got shape {bits.shape}")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def height(self) -> int:
        return int(self.bits.shape[0])

    @property
    def width(self) -> int:
        return int(self.bits.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    @classmethod
    def empty(cls, height: int, width: int, degenerate: bool = False) -> "Mask":
        return cls(np.zeros((height, width), dtype=bool), degenerate=degenerate)


def _edges(vertices: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    x_i, y_i = vertices[:, 0], vertices[:, 1]
    x_j, y_j = np.roll(x_i, 1), np.roll(y_i, 1)
    return x_i, y_i, x_j, y_j


def _crossings(vertices: np.ndarray, y: float) -> np.ndarray:
    """x positions where the horizontal line at ``y`` crosses the polygon edges.

    An edge counts when exactly one endpoint lies strictly above ``y``.
    """
    x_i, y_i, x_j, y_j = _edges(vertices)
    active = (y_i > y) != (y_j > y)
    x_i, y_i, x_j, y_j = x_i[active], y_i[active], x_j[active], y_j[active]
    return (x_j - x_i) * (y - y_i) / (y_j - y_i) + x_i


def polygon_contains(vertices: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """
    Even-odd point-in-polygon test for many points.

    A point is inside when an odd number of edge crossings lie strictly to
    its right. The crossing predicate is the one ``rasterize_polygon`` uses.
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    inside = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
    xs, ys = np.broadcast_arrays(xs, ys)
    x_i, y_i, x_j, y_j = _edges(vertices)
    for a_x, a_y, b_x, b_y in zip(x_i, y_i, x_j, y_j):
        active = (a_y > ys) != (b_y > ys)
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = (b_x - a_x) * (ys - a_y) / (b_y - a_y) + a_x
        inside ^= active & (xs < cross)
    return inside


def _is_degenerate(vertices: np.ndarray) -> bool:
    spans = vertices - vertices[0]
    reference = spans[int(np.argmax(np.hypot(spans[:, 0], spans[:, 1])))]
    cross = spans[:, 0] * reference[1] - spans[:, 1] * reference[0]
    scale = max(float(np.max(np.abs(spans))), 1.0)
    return bool(np.all(np.abs(cross) <= 1e-12 * scale * scale))


def rasterize_polygon(vertices: np.ndarray, height: int, width: int) -> Mask:
    """
    Fill a closed polygon by scanlines with the even-odd rule.

    Pixel ``[r, c]`` is set iff its center ``(c + 0.5, r + 0.5)`` is inside.
    A polygon whose vertices are all collinear gives an empty mask with the
    ``degenerate`` flag set.
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    if vertices.shape[0] < 3 or _is_degenerate(vertices):
        logger.warning("degenerate polygon with %d collinear vertices; mask left empty",
                       vertices.shape[0])
        return Mask.empty(height, width, degenerate=True)

    bits = np.zeros((height, width), dtype=bool)
    centers = np.arange(width) + 0.5
    first = max(int(np.floor(vertices[:, 1].min())), 0)
    last = min(int(np.ceil(vertices[:, 1].max())), height - 1)
    for row in range(first, last + 1):
        crossings = np.sort(_crossings(vertices, row + 0.5))
        if crossings.size == 0:
            continue
        # crossings at or left of a center; odd means inside
        left_of = np.searchsorted(crossings, centers, side="right")
        bits[row] = (left_of % 2) == 1
    return Mask(bits)


def rasterize(contour: PolarContour, height: int, width: int) -> Mask:
    return rasterize_polygon(to_cartesian(contour), height, width)


def _check_same_shape(a: Mask, b: Mask, sample_id: Optional[str] = None):
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"mask shapes differ: {a.shape} vs {b.shape}", sample_id=sample_id
        )


def iou(a: Mask, b: Mask) -> float:
    """
    Intersection over union of two masks; 1.0 when both are empty.

    Raises:
        DimensionMismatchError: If the masks differ in size
    """
    _check_same_shape(a, b)
    union = np.count_nonzero(a.bits | b.bits)
    if union == 0:
        return 1.0
    return np.count_nonzero(a.bits & b.bits) / union


def area_m2(mask: Mask, resolution_m: float) -> float:
    """Set-pixel count times the ground area of one pixel."""
    if not resolution_m > 0:
        raise ValueError(f"resolution_m must be positive, got {resolution_m}")
    return mask.count * resolution_m * resolution_m


@dataclass(frozen=True)
class SampleScore:
    sample_id: str
    iou: float
    both_empty: bool
    pred_area_m2: Optional[float] = None
    gt_area_m2: Optional[float] = None
    area_error_m2: Optional[float] = None


@dataclass(frozen=True)
class EvalReport:
    samples: Tuple[SampleScore, ...]
    miou: float
    rmse_m2: Optional[float]
    resolution_m: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "version": REPORT_VERSION,
            "resolution_m": self.resolution_m,
            "miou": self.miou,
            "rmse_m2": self.rmse_m2,
            "samples": [
                {
                    "id": s.sample_id,
                    "iou": s.iou,
                    "both_empty": s.both_empty,
                    "pred_area_m2": s.pred_area_m2,
                    "gt_area_m2": s.gt_area_m2,
                    "area_error_m2": s.area_error_m2,
                }
                for s in self.samples
            ],
        }


def _score(sample: Tuple[str, Mask, Mask], resolution_m: Optional[float]) -> SampleScore:
    sample_id, pred, gt = sample
    _check_same_shape(pred, gt, sample_id)
    score = iou(pred, gt)
    both_empty = pred.count == 0 and gt.count == 0
    if resolution_m is None:
        return SampleScore(sample_id, score, both_empty)
    pred_area = area_m2(pred, resolution_m)
    gt_area = area_m2(gt, resolution_m)
    return SampleScore(
        sample_id, score, both_empty,
        pred_area_m2=pred_area, gt_area_m2=gt_area, area_error_m2=abs(pred_area - gt_area),
    )


def evaluate_batch(
    samples: Sequence[Tuple[str, Mask, Mask]],
    resolution_m: Optional[float] = None,
    max_workers: Optional[int] = None,
) -> EvalReport:
    """
    Score (id, predicted, ground truth) mask triples.

    Args:
        samples: Triples in the order they should appear in the report
        resolution_m: Ground size of a pixel; without it no areas are computed
        max_workers: Thread count for scoring; ``None`` or 1 scores serially

    Returns:
        Per-sample scores plus mIoU (mean IoU) and RMSE of area errors

    Raises:
        DimensionMismatchError: Naming the first sample whose masks differ in size
    """
    if resolution_m is not None and not resolution_m > 0:
        raise ValueError(f"resolution_m must be positive, got {resolution_m}")
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            scores: List[SampleScore] = list(pool.map(lambda s: _score(s, resolution_m), samples))
    else:
        scores = [_score(sample, resolution_m) for sample in samples]

    if not scores:
        raise ValueError("nothing to evaluate")
    miou = math.fsum(s.iou for s in scores) / len(scores)
    rmse = None
    if resolution_m is not None:
        rmse = math.sqrt(math.fsum(s.area_error_m2 ** 2 for s in scores) / len(scores))
    return EvalReport(samples=tuple(scores), miou=miou, rmse_m2=rmse, resolution_m=resolution_m)
