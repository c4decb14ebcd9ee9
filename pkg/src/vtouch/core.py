"""Shared geometry and time base: screen description, cursor samples, and
the visual-angle conversion every switch and source builds on.

Conventions: screen origin is top-left with y growing downward; timestamps
are milliseconds on a session-monotonic clock.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class VTouchError(Exception):
    """Base class for all workbench errors."""


class NonPositiveDimension(VTouchError):
    """A dimension that must be strictly positive is zero or negative."""

    def __init__(self, field: str, value: float):
        self.field = field
        self.value = value
        super().__init__(f"{field} must be > 0, got {value!r}")


class AngleOutOfRange(VTouchError):
    """Visual angle outside the supported (0, 90) degree range."""


class OutOfOrderSample(VTouchError):
    """A timestamped sample arrived earlier than its predecessor."""

    def __init__(self, t_ms: float, last_t_ms: float):
        self.t_ms = t_ms
        self.last_t_ms = last_t_ms
        super().__init__(f"sample at t={t_ms} ms arrived after t={last_t_ms} ms")


class Source(str, Enum):
    """Identity of the device (or proxy) that produced a cursor sample."""

    LASER = "laser"
    IMU = "imu"
    IR = "ir"
    GAZE = "gaze"
    POINTER_PROXY = "pointer_proxy"


@dataclass(frozen=True)
class ScreenSpec:
    """Physical display geometry.

    pixel_pitch_mm is the physical size of one pixel; viewing_distance_mm
    is the eye-to-screen distance used to realize visual-angle thresholds
    on the pixel grid.
    """

    width_px: int
    height_px: int
    pixel_pitch_mm: float
    viewing_distance_mm: float

    @property
    def center(self) -> tuple[float, float]:
        return self.width_px / 2.0, self.height_px / 2.0


# Workbench default: the display geometry of the pointing studies this
# workbench reproduces, with a 650 mm default viewing distance (the studies
# never report one; it is configurable per session).
DEFAULT_SCREEN = ScreenSpec(
    width_px=1024, height_px=768, pixel_pitch_mm=0.42, viewing_distance_mm=650.0
)


def validate_screen_spec(spec: ScreenSpec) -> ScreenSpec:
    """Return spec unchanged if every dimension is strictly positive."""
    for field in ("width_px", "height_px", "pixel_pitch_mm", "viewing_distance_mm"):
        value = getattr(spec, field)
        if not value > 0:
            raise NonPositiveDimension(field, value)
    return spec


def visual_angle_to_pixels(full_angle_deg: float, spec: ScreenSpec) -> float:
    """On-screen radius in pixels subtending `full_angle_deg` at the eye.

    The full cone angle is split symmetrically about the line of sight, so
    the radius is distance * tan(angle/2) converted to pixels.
    """
    if not 0.0 < full_angle_deg < 90.0:
        raise AngleOutOfRange(
            f"full angle must be in (0, 90) degrees, got {full_angle_deg}"
        )
    validate_screen_spec(spec)
    half_rad = math.radians(full_angle_deg / 2.0)
    return spec.viewing_distance_mm * math.tan(half_rad) / spec.pixel_pitch_mm


@dataclass(frozen=True)
class CursorSample:
    """One timestamped screen-space cursor position, tagged with its source."""

    t_ms: float
    x_px: float
    y_px: float
    source: Source = Source.POINTER_PROXY

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_px) and math.isfinite(self.y_px)):
            raise ValueError(f"cursor coordinates must be finite: ({self.x_px}, {self.y_px})")
