"""Polar ("active rays") contour representation.

A contour is a reference point plus L radii measured along rays at the
fixed angles i * 2*pi/L, counter-clockwise from the positive x-axis. The
module is raster-agnostic: coordinates are plain (x, y) pairs in pixels.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.signal import resample as fourier_resample

from .errors import InvalidContourError

MIN_VERTICES = 4
DEFAULT_VERTICES = 60

# Lower bound applied after resampling; interpolation may undershoot zero.
_RADIUS_EPSILON = 1e-6

Point = Tuple[float, float]
RadiusCap = Union[float, Sequence[float], np.ndarray]


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class PolarContour:
    """Star-shaped contour with radii along L uniformly spaced rays.

    ``rho_max`` is stored per ray; a scalar cap is broadcast to every ray.
    Arrays are copied and made read-only on construction.
    """

    center: Point
    radii: np.ndarray
    rho_max: np.ndarray

    def __post_init__(self):
        radii = np.array(self.radii, dtype=np.float64).reshape(-1)
        if radii.size < MIN_VERTICES:
            raise InvalidContourError(
                f"a contour needs at least {MIN_VERTICES} vertices, got {radii.size}"
            )
        cap = np.broadcast_to(np.asarray(self.rho_max, dtype=np.float64), radii.shape)
        cap = np.array(cap, dtype=np.float64)
        if not np.all(np.isfinite(radii)) or np.any(np.isnan(cap)):
            raise InvalidContourError("radii must be finite and rho_max defined")
        if np.any(cap <= 0):
            raise InvalidContourError("rho_max must be positive on every ray")
        if np.any(radii <= 0):
            raise InvalidContourError("radii must be strictly positive")
        if np.any(radii > cap):
            worst = int(np.argmax(radii - cap))
            raise InvalidContourError(
                f"radius {radii[worst]:.6g} on ray {worst} exceeds rho_max {cap[worst]:.6g}"
            )
        x_c, y_c = (float(v) for v in self.center)
        object.__setattr__(self, "center", (x_c, y_c))
        object.__setattr__(self, "radii", _frozen(radii))
        object.__setattr__(self, "rho_max", _frozen(cap))

    @property
    def num_vertices(self) -> int:
        return int(self.radii.size)

    @property
    def delta_theta(self) -> float:
        return 2.0 * np.pi / self.num_vertices

    @property
    def angles(self) -> np.ndarray:
        return np.arange(self.num_vertices) * self.delta_theta

    @property
    def directions(self) -> np.ndarray:
        """Unit ray vectors u_i = (cos i*dtheta, sin i*dtheta), shape (L, 2)."""
        angles = self.angles
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)

    def with_radii(self, radii: np.ndarray) -> "PolarContour":
        return PolarContour(center=self.center, radii=radii, rho_max=self.rho_max)


def to_cartesian(contour: PolarContour) -> np.ndarray:
    """
    Convert a polar contour to its Cartesian vertices.

    Args:
        contour: Contour to convert

    Returns:
        Array of shape (L, 2) holding (x, y) per vertex, in ray order
    """
    x_c, y_c = contour.center
    angles = contour.angles
    xs = x_c + contour.radii * np.cos(angles)
    ys = y_c + contour.radii * np.sin(angles)
    return np.stack([xs, ys], axis=1)


def init_circle(
    center: Point,
    radius: float,
    num_vertices: int = DEFAULT_VERTICES,
    rho_max: RadiusCap = np.inf,
) -> PolarContour:
    """
    Build a circular initial contour.

    Args:
        center: Reference point (x, y) in pixels
        radius: Radius of every ray
        num_vertices: Vertex count L
        rho_max: Per-ray cap (scalar or length-L sequence)

    Returns:
        Contour with all radii equal to ``radius``

    Raises:
        InvalidContourError: If radius is outside (0, rho_max] or L < 4
    """
    if num_vertices < MIN_VERTICES:
        raise InvalidContourError(
            f"a contour needs at least {MIN_VERTICES} vertices, got {num_vertices}"
        )
    cap = np.broadcast_to(np.asarray(rho_max, dtype=np.float64), (num_vertices,))
    if not radius > 0:
        raise InvalidContourError(f"initial radius must be positive, got {radius}")
    if radius > float(np.min(cap)):
        raise InvalidContourError(
            f"initial radius {radius} exceeds rho_max {float(np.min(cap)):.6g}"
        )
    return PolarContour(
        center=center,
        radii=np.full(num_vertices, float(radius)),
        rho_max=cap,
    )


def _periodic_linear(values: np.ndarray, new_count: int) -> np.ndarray:
    old_count = values.size
    old_angles = np.arange(old_count) * (2.0 * np.pi / old_count)
    new_angles = np.arange(new_count) * (2.0 * np.pi / new_count)
    return np.interp(new_angles, old_angles, values, period=2.0 * np.pi)


def resample(contour: PolarContour, new_count: int, method: str = "fourier") -> PolarContour:
    """
    Change the vertex count of a contour by periodic interpolation in angle.

    ``fourier`` is band-limited trigonometric interpolation and reproduces
    smooth radius profiles closely; ``linear`` interpolates between
    neighbouring rays. Both pass through the original radii when
    ``new_count`` is a multiple of L.

    Raises:
        InvalidContourError: If new_count < 4 or the method is unknown
    """
    if new_count < MIN_VERTICES:
        raise InvalidContourError(
            f"cannot resample to {new_count} vertices (minimum {MIN_VERTICES})"
        )
    if new_count == contour.num_vertices:
        return contour

    if method == "fourier":
        radii = fourier_resample(contour.radii, new_count)
    elif method == "linear":
        radii = _periodic_linear(contour.radii, new_count)
    else:
        raise InvalidContourError(f"unknown resampling method: {method}")

    if np.all(contour.rho_max == contour.rho_max[0]):
        cap = np.full(new_count, contour.rho_max[0])
    else:
        cap = _periodic_linear(contour.rho_max, new_count)
    radii = np.clip(radii, _RADIUS_EPSILON, cap)
    return PolarContour(center=contour.center, radii=radii, rho_max=cap)


def from_vertices(
    points: np.ndarray,
    center: Point,
    rho_max: RadiusCap = np.inf,
    angle_tolerance: float = 1e-6,
) -> PolarContour:
    """
    Recover a polar contour from Cartesian vertices and its reference point.

    Vertex i must lie on the ray at angle i * 2*pi/L.

    Raises:
        InvalidContourError: If a vertex is off its ray
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2:
        raise InvalidContourError("vertices must have shape (L, 2)")
    offsets = points - np.asarray(center, dtype=np.float64)
    radii = np.hypot(offsets[:, 0], offsets[:, 1])
    count = points.shape[0]
    expected = np.arange(count) * (2.0 * np.pi / count)
    actual = np.arctan2(offsets[:, 1], offsets[:, 0])
    # wrapped angular difference in (-pi, pi]
    drift = np.angle(np.exp(1j * (actual - expected)))
    off_ray = np.abs(drift) > angle_tolerance
    if np.any(off_ray & (radii > 0)):
        first = int(np.argmax(off_ray & (radii > 0)))
        raise InvalidContourError(
            f"vertex {first} is not on ray {first} of a {count}-ray contour around {tuple(center)}"
        )
    return PolarContour(center=center, radii=radii, rho_max=rho_max)
