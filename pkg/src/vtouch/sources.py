"""Cursor sources: laser-spot detection with homography projection, IMU
yaw/pitch angle mapping, and IR fingertip orthogonal projection.

All mapping operations clamp to the screen and carry an out-of-bounds flag
instead of rejecting, so downstream dwell logic sees a continuous cursor.
The unclamped coordinates are kept on the result for calibration checks.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .core import ScreenSpec, VTouchError, validate_screen_spec


class AmbiguousSpot(VTouchError):
    """Two disjoint bright regions of comparable peak intensity."""


class DegenerateQuad(VTouchError):
    """Three of a calibration quad's points are collinear."""

    def __init__(self, which: str):
        self.which = which
        super().__init__(f"collinear triple in {which} quad")


class ProjectionAtInfinity(VTouchError):
    """Homogeneous w-coordinate vanished during perspective division."""


class ZeroSpan(VTouchError):
    """IMU calibration produced an empty yaw or pitch span."""


@dataclass(frozen=True)
class ScreenPoint:
    """A mapped screen coordinate, clamped, with the raw pre-clamp values."""

    x_px: float
    y_px: float
    in_bounds: bool
    raw_x_px: float
    raw_y_px: float


def _clamped(raw_x: float, raw_y: float, x_max: float, y_max: float) -> ScreenPoint:
    x = min(max(raw_x, 0.0), x_max)
    y = min(max(raw_y, 0.0), y_max)
    return ScreenPoint(x, y, in_bounds=(x == raw_x and y == raw_y),
                       raw_x_px=raw_x, raw_y_px=raw_y)


# ---------------------------------------------------------------------------
# Camera frames and laser-spot detection
# ---------------------------------------------------------------------------

class Frame:
    """8-bit grayscale camera frame, row-major."""

    def __init__(self, width: int, height: int, pixels):
        arr = np.asarray(pixels, dtype=np.uint8)
        if arr.ndim == 1:
            if arr.size != width * height:
                raise ValueError(
                    f"pixel buffer has {arr.size} bytes, expected {width * height}"
                )
            arr = arr.reshape(height, width)
        elif arr.shape != (height, width):
            raise ValueError(f"pixel array shape {arr.shape} != ({height}, {width})")
        self.width = int(width)
        self.height = int(height)
        self.pixels = arr

    @classmethod
    def from_pgm(cls, data: bytes) -> "Frame":
        """Parse a binary PGM (P5, maxval <= 255)."""
        # Header tokens may be separated by whitespace and '#' comments.
        tokens: list[bytes] = []
        pos = 0
        while len(tokens) < 4:
            m = re.compile(rb"\s*(#[^\n]*\n)*\s*(\S+)").match(data, pos)
            if not m:
                raise ValueError("truncated PGM header")
            tokens.append(m.group(2))
            pos = m.end()
        if tokens[0] != b"P5":
            raise ValueError(f"not a binary PGM (magic {tokens[0]!r})")
        width, height, maxval = (int(t) for t in tokens[1:])
        if maxval != 255:
            raise ValueError(f"unsupported maxval {maxval} (need 255)")
        pos += 1  # single whitespace byte after maxval
        raster = data[pos:pos + width * height]
        if len(raster) != width * height:
            raise ValueError("truncated PGM raster")
        return cls(width, height, np.frombuffer(raster, dtype=np.uint8))

    def to_pgm(self) -> bytes:
        header = f"P5\n{self.width} {self.height}\n255\n".encode("ascii")
        return header + self.pixels.tobytes()


# Any second region whose peak reaches this fraction of the brightest peak
# makes the detection ambiguous (reflections in a cabin look exactly so).
AMBIGUITY_RATIO = 0.8

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


def detect_laser_spot(frame: Frame, min_intensity: int) -> Optional[tuple[float, float]]:
    """Sub-pixel centroid of the brightest spot, or None when nothing reaches
    min_intensity.

    Pixels >= min_intensity are grouped with 8-connectivity; the region with
    the highest peak wins and its intensity-weighted centroid is returned.
    """
    if not 0 < min_intensity <= 255:
        raise ValueError(f"min_intensity must be in 1..255, got {min_intensity}")
    img = frame.pixels
    mask = img >= min_intensity
    if not mask.any():
        return None
    labels, n = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    index = np.arange(1, n + 1)
    peaks = ndimage.maximum(img, labels=labels, index=index)
    order = np.argsort(peaks)[::-1]
    best = index[order[0]]
    if n > 1 and peaks[order[1]] >= AMBIGUITY_RATIO * peaks[order[0]]:
        raise AmbiguousSpot(
            f"second region peak {peaks[order[1]]:.0f} within "
            f"{AMBIGUITY_RATIO:.0%} of brightest {peaks[order[0]]:.0f}"
        )
    ys, xs = np.nonzero(labels == best)
    weights = img[ys, xs].astype(np.float64)
    total = weights.sum()
    return float((xs * weights).sum() / total), float((ys * weights).sum() / total)


# ---------------------------------------------------------------------------
# Homography (camera -> screen)
# ---------------------------------------------------------------------------

Point = tuple[float, float]


def _has_collinear_triple(quad: Sequence[Point]) -> bool:
    pts = [np.asarray(p, dtype=float) for p in quad]
    scale = max(np.abs(np.array(pts)).max(), 1.0)
    for i in range(4):
        for j in range(i + 1, 4):
            for k in range(j + 1, 4):
                a, b, c = pts[i], pts[j], pts[k]
                cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
                if abs(cross) <= 1e-9 * scale * scale:
                    return True
    return False


@dataclass(frozen=True)
class Homography:
    """3x3 projective map, normalized so the bottom-right element is 1."""

    m: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"homography must be 3x3, got {m.shape}")
        if abs(m[2, 2]) < 1e-300:
            raise ValueError("cannot normalize: bottom-right element is zero")
        m = m / m[2, 2]
        if abs(np.linalg.det(m)) <= 1e-12:
            raise ValueError("homography is not invertible")
        object.__setattr__(self, "m", m)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))


def calibrate_homography(camera_quad: Sequence[Point],
                         screen_quad: Sequence[Point]) -> Homography:
    """Direct linear transform from four camera/screen point pairs."""
    if len(camera_quad) != 4 or len(screen_quad) != 4:
        raise ValueError("calibration needs exactly four point pairs")
    if _has_collinear_triple(camera_quad):
        raise DegenerateQuad("camera")
    if _has_collinear_triple(screen_quad):
        raise DegenerateQuad("screen")
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(camera_quad, screen_quad)):
        a[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y]
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise DegenerateQuad("camera") from exc
    return Homography(np.append(h, 1.0).reshape(3, 3))


def project_to_screen(h: Homography, pt: Point, spec: ScreenSpec) -> ScreenPoint:
    """Apply the homography with perspective division, clamped to the screen
    plane [0, width] x [0, height]."""
    validate_screen_spec(spec)
    vec = h.m @ np.array([pt[0], pt[1], 1.0])
    if abs(vec[2]) < 1e-12:
        raise ProjectionAtInfinity(f"w = {vec[2]:.3e} for point {pt}")
    raw_x, raw_y = float(vec[0] / vec[2]), float(vec[1] / vec[2])
    return _clamped(raw_x, raw_y, float(spec.width_px), float(spec.height_px))


# ---------------------------------------------------------------------------
# IMU yaw/pitch mapping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationCorners:
    """Four (yaw, pitch) pairs recorded while aiming at the screen corners,
    ordered top-left, top-right, bottom-right, bottom-left."""

    corners: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.corners) != 4:
            raise ValueError(f"need exactly 4 corners, got {len(self.corners)}")
        for yaw, pitch in self.corners:
            if not (math.isfinite(yaw) and math.isfinite(pitch)):
                raise ValueError("corner angles must be finite")


@dataclass(frozen=True)
class ImuCalibration:
    """Yaw and pitch limits mapped to the screen edges."""

    yaw_LL: float
    yaw_RL: float
    pitch_TL: float
    pitch_BL: float

    def __post_init__(self) -> None:
        if self.yaw_LL == self.yaw_RL or self.pitch_TL == self.pitch_BL:
            raise ZeroSpan(
                f"yaw span {self.yaw_LL}..{self.yaw_RL}, "
                f"pitch span {self.pitch_TL}..{self.pitch_BL}"
            )


def calibrate_imu(corners: CalibrationCorners) -> ImuCalibration:
    """Angle limits from the four corner recordings.

    The top limit is the smaller of the two top-corner pitches, the bottom
    limit the larger of the bottom-corner pitches (and symmetrically for
    yaw), so the calibrated span is the rectangle all four corners cover.
    """
    (y1, p1), (y2, p2), (y3, p3), (y4, p4) = corners.corners
    return ImuCalibration(
        yaw_LL=max(y1, y4),
        yaw_RL=min(y2, y3),
        pitch_TL=min(p1, p2),
        pitch_BL=max(p3, p4),
    )


def imu_to_screen(cal: ImuCalibration, yaw: float, pitch: float,
                  spec: ScreenSpec) -> ScreenPoint:
    """Map yaw to x and pitch to y linearly over the calibrated spans.

    Both axes are corner-anchored: (yaw_LL, pitch_TL) lands on (0, 0) and
    (yaw_RL, pitch_BL) on (resx, resy). Results clamp to [0, res-1].
    """
    validate_screen_spec(spec)
    raw_x = (cal.yaw_LL - yaw) * spec.width_px / abs(cal.yaw_RL - cal.yaw_LL)
    raw_y = (cal.pitch_TL - pitch) * spec.height_px / abs(cal.pitch_TL - cal.pitch_BL)
    return _clamped(raw_x, raw_y, spec.width_px - 1.0, spec.height_px - 1.0)


# ---------------------------------------------------------------------------
# IR fingertip projection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeapCalibration:
    """Constants of the fingertip orthogonal projection onto the screen."""

    a: float = 0.0
    b: float = 0.0
    c: float = 1.0
    d: float = 0.0
    w: float = 1.0
    h: float = 1.0

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"w and h must be > 0, got w={self.w}, h={self.h}")


@dataclass(frozen=True)
class FingertipSample:
    """Fingertip position in the IR sensor's frame, millimeters."""

    ftp_x: float
    ftp_y: float
    ftp_z: float
    t_ms: float = 0.0

    def __post_init__(self) -> None:
        for v in (self.ftp_x, self.ftp_y, self.ftp_z):
            if not math.isfinite(v):
                raise ValueError("fingertip coordinates must be finite")


def fingertip_to_screen(cal: LeapCalibration, ftp: FingertipSample,
                        spec: ScreenSpec) -> ScreenPoint:
    """Orthogonal projection of the fingertip onto the display:

        x = width/w * (ftp.x + a)
        y = height/h * (b + c*ftp.y - d*ftp.z)
    """
    validate_screen_spec(spec)
    raw_x = spec.width_px / cal.w * (ftp.ftp_x + cal.a)
    raw_y = spec.height_px / cal.h * (cal.b + cal.c * ftp.ftp_y - cal.d * ftp.ftp_z)
    return _clamped(raw_x, raw_y, spec.width_px - 1.0, spec.height_px - 1.0)
