"""Readers and writers for EMAP landscapes, contour CSVs, PGM masks and JSON."""

import json
import logging
import math
import struct
from pathlib import Path
from typing import Any

import numpy as np
from PIL import Image, UnidentifiedImageError

from .energy_landscape import EnergyLandscape
from .errors import FormatError, LandscapeError
from .raster_metrics import Mask

logger = logging.getLogger(__name__)

EMAP_MAGIC = b"EMAP"
EMAP_VERSION = 1
# magic, version, H, W
_EMAP_HEADER = struct.Struct("<4sIII")
_EMAP_PLANE = np.dtype("<f4")

CSV_HEADER = "x,y"
SIGNIFICANT_DIGITS = 6


def emap_bytes(landscape: EnergyLandscape) -> bytes:
    header = _EMAP_HEADER.pack(EMAP_MAGIC, EMAP_VERSION, landscape.height, landscape.width)
    planes = [np.ascontiguousarray(plane, dtype=_EMAP_PLANE).tobytes()
              for plane in (landscape.D, landscape.beta, landscape.kappa)]
    return header + b"".join(planes)


def write_emap(path: Path, landscape: EnergyLandscape) -> None:
    """
    Write the three energy planes as row-major little-endian float32.

    Gradient planes are not stored; they are recomputed on load.
    """
    Path(path).write_bytes(emap_bytes(landscape))


def read_emap(path: Path) -> EnergyLandscape:
    """
    Read an EMAP file.

    Raises:
        FormatError: On bad magic, unknown version, truncated planes or maps
            that violate the landscape invariants
    """
    path = Path(path)
    payload = path.read_bytes()
    if len(payload) < _EMAP_HEADER.size:
        raise FormatError("file too short for an EMAP header", path=path)
    magic, version, height, width = _EMAP_HEADER.unpack_from(payload)
    if magic != EMAP_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {EMAP_MAGIC!r}", path=path)
    if version != EMAP_VERSION:
        raise FormatError(f"unsupported EMAP version {version}", path=path)
    plane_size = height * width
    expected = _EMAP_HEADER.size + 3 * plane_size * _EMAP_PLANE.itemsize
    if len(payload) != expected:
        raise FormatError(
            f"expected {expected} bytes for a {height}x{width} landscape, got {len(payload)}",
            path=path,
        )
    planes = np.frombuffer(payload, dtype=_EMAP_PLANE, offset=_EMAP_HEADER.size)
    planes = planes.reshape(3, height, width).astype(np.float64)
    try:
        landscape = EnergyLandscape(D=planes[0], beta=planes[1], kappa=planes[2])
    except LandscapeError as e:
        raise FormatError(str(e), path=path)
    logger.debug("read %dx%d landscape from %s", height, width, path)
    return landscape


def contour_csv(points: np.ndarray) -> str:
    lines = [CSV_HEADER]
    lines.extend(f"{float(x)!r},{float(y)!r}" for x, y in np.asarray(points, dtype=np.float64))
    return "\n".join(lines) + "\n"


def write_contour_csv(path: Path, points: np.ndarray) -> None:
    """Write Cartesian vertices one per line; values round-trip exactly."""
    Path(path).write_text(contour_csv(points), encoding="utf-8")


def read_contour_csv(path: Path) -> np.ndarray:
    """
    Read vertices written by ``write_contour_csv`` (header line optional).

    Returns:
        Array of shape (L, 2)

    Raises:
        FormatError: On malformed lines or fewer than 3 vertices
    """
    path = Path(path)
    points = []
    lines = path.read_text(encoding="utf-8").splitlines()
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or (number == 1 and line.replace(" ", "") == CSV_HEADER):
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise FormatError(f"line {number}: expected 'x,y', got {line!r}", path=path)
        try:
            point = (float(fields[0]), float(fields[1]))
        except ValueError:
            raise FormatError(f"line {number}: not a number pair: {line!r}", path=path)
        if not all(math.isfinite(v) for v in point):
            raise FormatError(f"line {number}: non-finite coordinate", path=path)
        points.append(point)
    if len(points) < 3:
        raise FormatError(f"a contour needs at least 3 vertices, got {len(points)}", path=path)
    return np.array(points, dtype=np.float64)


def write_mask_pgm(path: Path, mask: Mask) -> None:
    """Binary PGM (P5, maxval 255): 0 background, 255 building."""
    pixels = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(pixels).save(Path(path), format="PPM")


def read_mask_pgm(path: Path) -> Mask:
    """Read a grayscale PGM; pixels >= 128 count as building."""
    path = Path(path)
    try:
        with Image.open(path) as image:
            if image.mode not in ("L", "1"):
                raise FormatError(f"expected a grayscale PGM, got mode {image.mode}", path=path)
            pixels = np.asarray(image.convert("L"))
    except UnidentifiedImageError:
        raise FormatError("not a PGM image", path=path)
    return Mask(pixels >= 128)


def _round_floats(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    return value


def dump_json(document: Any) -> str:
    """Deterministic JSON: sorted keys, floats at six significant digits."""
    return json.dumps(_round_floats(document), indent=2, sort_keys=True) + "\n"


def write_json(path: Path, document: Any) -> None:
    Path(path).write_text(dump_json(document), encoding="utf-8")
