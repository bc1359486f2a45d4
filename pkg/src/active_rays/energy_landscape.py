"""Energy maps D, beta, kappa and the contour energy functional.

Maps are indexed ``[row, column]`` and sampled at continuous ``(x, y)``
positions where ``x`` is the column and ``y`` the row coordinate; the
value of pixel ``[r, c]`` sits at ``(c, r)``.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Tuple, Union

import numpy as np

from .contour_geometry import PolarContour, to_cartesian
from .errors import InvalidContourError, LandscapeError


class RhoMaxMode(str, Enum):
    global_ = "global"
    per_ray = "per-ray"


def _as_field(name: str, values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.ndim != 2:
        raise LandscapeError(f"{name} must be a 2-D map, got shape {array.shape}")
    if array.shape[0] < 2 or array.shape[1] < 2:
        raise LandscapeError(f"{name} must be at least 2x2, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise LandscapeError(f"{name} contains NaN or infinite values")
    if np.any(array < 0):
        raise LandscapeError(f"{name} must be non-negative (min {array.min():.6g})")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class EnergyLandscape:
    """The three non-negative energy maps of one image.

    ``grad_D_x`` and ``grad_D_y`` are derived from ``D`` (central
    differences inside, one-sided on the border) and cannot be passed in.
    """

    D: np.ndarray
    beta: np.ndarray
    kappa: np.ndarray
    grad_D_x: np.ndarray = field(init=False, repr=False)
    grad_D_y: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        data = _as_field("D", self.D)
        beta = _as_field("beta", self.beta)
        kappa = _as_field("kappa", self.kappa)
        if not (data.shape == beta.shape == kappa.shape):
            raise LandscapeError(
                f"map shapes differ: D {data.shape}, beta {beta.shape}, kappa {kappa.shape}"
            )
        grad_y, grad_x = np.gradient(data)
        grad_x.setflags(write=False)
        grad_y.setflags(write=False)
        object.__setattr__(self, "D", data)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "grad_D_x", grad_x)
        object.__setattr__(self, "grad_D_y", grad_y)

    @property
    def height(self) -> int:
        return int(self.D.shape[0])

    @property
    def width(self) -> int:
        return int(self.D.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    @classmethod
    def constant(cls, height: int, width: int, d: float = 0.0, beta: float = 0.0,
                 kappa: float = 0.0) -> "EnergyLandscape":
        return cls(
            D=np.full((height, width), d),
            beta=np.full((height, width), beta),
            kappa=np.full((height, width), kappa),
        )


class EnergyBreakdown(NamedTuple):
    data: float
    curve: float
    balloon: float
    total: float


def sample_bilinear(values: np.ndarray, points) -> Union[float, np.ndarray]:
    """
    Bilinearly interpolate a map at sub-pixel positions.

    Positions outside ``[0, W-1] x [0, H-1]`` are clamped to the border
    first.

    Args:
        values: H x W map
        points: One ``(x, y)`` pair or an array of shape (N, 2)

    Returns:
        A float for a single point, else an array of N samples
    """
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    height, width = values.shape

    xs = np.clip(pts[:, 0], 0.0, width - 1.0)
    ys = np.clip(pts[:, 1], 0.0, height - 1.0)
    x0 = np.minimum(np.floor(xs).astype(np.intp), width - 2)
    y0 = np.minimum(np.floor(ys).astype(np.intp), height - 2)
    fx = xs - x0
    fy = ys - y0

    top = values[y0, x0] * (1.0 - fx) + values[y0, x0 + 1] * fx
    bottom = values[y0 + 1, x0] * (1.0 - fx) + values[y0 + 1, x0 + 1] * fx
    sampled = top * (1.0 - fy) + bottom * fy
    return float(sampled[0]) if single else sampled


def sample_vertices(values: np.ndarray, contour: PolarContour) -> np.ndarray:
    return sample_bilinear(values, to_cartesian(contour))


def energy_data(landscape: EnergyLandscape, contour: PolarContour) -> float:
    """Sum of D over the contour vertices."""
    return float(np.sum(sample_vertices(landscape.D, contour)))


def second_differences(contour: PolarContour) -> np.ndarray:
    """c_{i+1} - 2 c_i + c_{i-1} per vertex, cyclic; shape (L, 2)."""
    points = to_cartesian(contour)
    return np.roll(points, -1, axis=0) - 2.0 * points + np.roll(points, 1, axis=0)


def energy_curve(landscape: EnergyLandscape, contour: PolarContour) -> float:
    """Sum of beta(c_i) * |c_{i+1} - 2 c_i + c_{i-1}|^2."""
    beta = sample_vertices(landscape.beta, contour)
    squared = np.sum(second_differences(contour) ** 2, axis=1)
    return float(np.sum(beta * squared))


def energy_balloon(landscape: EnergyLandscape, contour: PolarContour) -> float:
    """Sum of kappa(c_i) * (1 - rho_i / rho_max)."""
    kappa = sample_vertices(landscape.kappa, contour)
    return float(np.sum(kappa * (1.0 - contour.radii / contour.rho_max)))


def energy_total(landscape: EnergyLandscape, contour: PolarContour) -> EnergyBreakdown:
    data = energy_data(landscape, contour)
    curve = energy_curve(landscape, contour)
    balloon = energy_balloon(landscape, contour)
    return EnergyBreakdown(data=data, curve=curve, balloon=balloon, total=data + curve + balloon)


def rho_max_for(
    shape: Tuple[int, int],
    center: Tuple[float, float],
    num_vertices: int,
    mode: RhoMaxMode = RhoMaxMode.global_,
) -> np.ndarray:
    """
    Per-ray radius cap keeping vertices inside the sampling extent.

    The extent is ``[0, W-1] x [0, H-1]``. In ``global`` mode every ray
    gets the distance from the center to the nearest edge; in ``per-ray``
    mode each ray gets its own distance to the extent boundary.

    Raises:
        InvalidContourError: If the center is not strictly inside the extent
    """
    height, width = shape
    x_c, y_c = center
    margins = np.array([x_c, width - 1.0 - x_c, y_c, height - 1.0 - y_c])
    if np.any(margins <= 0):
        raise InvalidContourError(
            f"reference point {tuple(center)} is not inside the {width}x{height} image"
        )
    if RhoMaxMode(mode) is RhoMaxMode.global_:
        return np.full(num_vertices, float(margins.min()))

    angles = np.arange(num_vertices) * (2.0 * np.pi / num_vertices)
    caps = np.full(num_vertices, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        for component, low, high in (
            (np.cos(angles), margins[0], margins[1]),
            (np.sin(angles), margins[2], margins[3]),
        ):
            reach = np.where(component > 0, high / component,
                             np.where(component < 0, -low / component, np.inf))
            caps = np.minimum(caps, reach)
    return caps
