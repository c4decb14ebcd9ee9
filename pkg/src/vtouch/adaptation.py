"""Kinematics-triggered target expansion: estimate cursor speed and
along-path acceleration, detect the homing phase of a rapid aiming
movement, and expand the nearest target 1.5x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

from .core import CursorSample, OutOfOrderSample, VTouchError


class InsufficientWindow(VTouchError):
    """Fewer samples than the kinematics estimator needs."""


class DuplicateTimestamps(VTouchError):
    """Two window samples share a timestamp; finite differences undefined."""


class EmptyLayout(VTouchError):
    """Adaptation applied to a layout with no targets."""


class Role(str, Enum):
    TARGET = "target"
    DISTRACTER = "distracter"


@dataclass(frozen=True)
class Target:
    """A square button. current_width_px is either the base width or the
    base width times the expansion factor; base_width_px never changes."""

    id: int
    x_px: float
    y_px: float
    base_width_px: float
    current_width_px: float
    role: Role = Role.DISTRACTER

    @property
    def expanded(self) -> bool:
        return self.current_width_px != self.base_width_px

    def contains(self, x: float, y: float) -> bool:
        half = self.current_width_px / 2.0
        return abs(x - self.x_px) <= half and abs(y - self.y_px) <= half

    def distance_to(self, x: float, y: float) -> float:
        return math.hypot(x - self.x_px, y - self.y_px)


def make_target(id: int, x_px: float, y_px: float, width_px: float,
                role: Role = Role.DISTRACTER) -> Target:
    if width_px <= 0:
        from .core import NonPositiveDimension
        raise NonPositiveDimension("width_px", width_px)
    return Target(id, x_px, y_px, width_px, width_px, role)


@dataclass(frozen=True)
class TargetLayout:
    targets: tuple[Target, ...]

    def __post_init__(self) -> None:
        if len({t.id for t in self.targets}) != len(self.targets):
            raise ValueError("target ids must be unique")

    @property
    def goal(self) -> Target:
        for t in self.targets:
            if t.role is Role.TARGET:
                return t
        raise ValueError("layout has no role=target entry")

    def nearest(self, x: float, y: float) -> Target:
        if not self.targets:
            raise EmptyLayout("layout has no targets")
        return min(self.targets, key=lambda t: (t.distance_to(x, y), t.id))

    def hit_test(self, x: float, y: float) -> Optional[Target]:
        """The hit target at (x, y) using current (possibly expanded)
        widths; overlaps resolve to the nearest center, ties to lowest id."""
        hits = [t for t in self.targets if t.contains(x, y)]
        if not hits:
            return None
        return min(hits, key=lambda t: (t.distance_to(x, y), t.id))


@dataclass(frozen=True)
class Kinematics:
    speed_px_per_s: float
    accel_px_per_s2: float


@dataclass(frozen=True)
class AdaptationConfig:
    expansion_factor: float = 1.5
    speed_zero_eps_px_per_s: float = 5.0
    window_samples: int = 5

    def __post_init__(self) -> None:
        if self.expansion_factor <= 1:
            raise ValueError(f"expansion_factor must be > 1, got {self.expansion_factor}")
        if self.window_samples < 3:
            raise ValueError("window_samples must be >= 3")


def estimate_kinematics(window: Sequence[CursorSample]) -> Kinematics:
    """Speed and along-path acceleration at the middle of the window.

    Speed is the norm of the central position difference at the middle
    sample; acceleration is the difference of the two adjacent segment
    speeds, so its sign distinguishes the speeding-up ballistic phase from
    the decelerating homing phase.
    """
    if len(window) < 3:
        raise InsufficientWindow(f"need >= 3 samples, got {len(window)}")
    for a, b in zip(window, window[1:]):
        if b.t_ms == a.t_ms:
            raise DuplicateTimestamps(f"repeated timestamp {a.t_ms} ms")
        if b.t_ms < a.t_ms:
            raise OutOfOrderSample(b.t_ms, a.t_ms)

    m = len(window) // 2
    prev, mid, nxt = window[m - 1], window[m], window[m + 1]
    span_ms = nxt.t_ms - prev.t_ms
    speed = math.hypot(nxt.x_px - prev.x_px, nxt.y_px - prev.y_px) / span_ms * 1000.0
    v_in = (math.hypot(mid.x_px - prev.x_px, mid.y_px - prev.y_px)
            / (mid.t_ms - prev.t_ms))
    v_out = (math.hypot(nxt.x_px - mid.x_px, nxt.y_px - mid.y_px)
             / (nxt.t_ms - mid.t_ms))
    accel = (v_out - v_in) / (span_ms / 2.0) * 1e6
    return Kinematics(speed_px_per_s=speed, accel_px_per_s2=accel)


def homing_detected(k: Kinematics, cfg: AdaptationConfig) -> bool:
    """True in the homing phase: decelerating, or stopped while not
    accelerating.

    The bare stopped test would also match the instant a movement starts
    (speed rises from zero), which is the ballistic phase and must not
    expand anything; requiring a non-positive acceleration restricts the
    stopped trigger to actual rest.
    """
    if k.accel_px_per_s2 < 0:
        return True
    return k.speed_px_per_s <= cfg.speed_zero_eps_px_per_s and k.accel_px_per_s2 <= 0


def maybe_expand(layout: TargetLayout, cursor: CursorSample, k: Kinematics,
                 cfg: AdaptationConfig = AdaptationConfig()) -> TargetLayout:
    """Expand the target nearest the cursor while homing; otherwise revert
    everything to base width. At most one target is ever expanded."""
    if not layout.targets:
        raise EmptyLayout("layout has no targets")
    expand_id = (layout.nearest(cursor.x_px, cursor.y_px).id
                 if homing_detected(k, cfg) else None)
    changed = []
    for t in layout.targets:
        want = t.base_width_px * cfg.expansion_factor if t.id == expand_id else t.base_width_px
        changed.append(t if t.current_width_px == want
                       else replace(t, current_width_px=want))
    return TargetLayout(tuple(changed))


def revert_all(layout: TargetLayout) -> TargetLayout:
    return TargetLayout(tuple(
        t if not t.expanded else replace(t, current_width_px=t.base_width_px)
        for t in layout.targets
    ))
