"""Selection engine: steering-touch gating, per-source dwell timers, and
arbitration of concurrent switch inputs into a single SelectionEvent.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

from .core import CursorSample, OutOfOrderSample, Source


class SwitchKind(str, Enum):
    MECHANICAL_LEFT = "mechanical_left"
    MECHANICAL_RIGHT = "mechanical_right"
    MECHANICAL_DOUBLE = "mechanical_double"
    THUMB_TAP = "thumb_tap"
    DWELL = "dwell"
    GAZE = "gaze"


@dataclass(frozen=True)
class SelectionEvent:
    """A click-equivalent at the cursor position at emission time."""

    t_ms: float
    x_px: float
    y_px: float
    switch: SwitchKind


@dataclass(frozen=True)
class ModeState:
    """Laser gating state driven by the steering-wheel touch sensor."""

    hand_on_wheel: bool = False

    @property
    def laser_enabled(self) -> bool:
        return not self.hand_on_wheel


def update_mode(state: ModeState, wheel_touch: bool) -> ModeState:
    """Hand on the wheel turns the laser off; hand off turns it on."""
    if state.hand_on_wheel == wheel_touch:
        return state
    return ModeState(hand_on_wheel=wheel_touch)


# Dwell durations the hand trackers shipped with: the IMU tracker selects
# after 1.5 s at a fixed position, the IR tracker after 1 s.
DWELL_MS_DEFAULTS: dict[Source, float] = {
    Source.IMU: 1500.0,
    Source.IR: 1000.0,
}
DEFAULT_DWELL_RADIUS_PX = 10.0


@dataclass(frozen=True)
class DwellConfig:
    dwell_ms: float
    radius_px: float = DEFAULT_DWELL_RADIUS_PX

    def __post_init__(self) -> None:
        if self.dwell_ms <= 0 or self.radius_px <= 0:
            raise ValueError("dwell_ms and radius_px must be positive")

    @classmethod
    def for_source(cls, source: Source, radius_px: float = DEFAULT_DWELL_RADIUS_PX,
                   fallback_ms: float = 1000.0) -> "DwellConfig":
        return cls(DWELL_MS_DEFAULTS.get(source, fallback_ms), radius_px)


class DwellTimer:
    """Fires once per stationary episode: the first sample at least dwell_ms
    after the anchor, with every sample since within radius of it. Leaving
    the radius re-anchors at the current sample."""

    def __init__(self, cfg: DwellConfig):
        self.cfg = cfg
        self._last_t: Optional[float] = None
        self._anchor: Optional[CursorSample] = None
        self._fired = False

    def reset(self) -> None:
        self._anchor = None
        self._fired = False

    def update(self, sample: CursorSample) -> Optional[SelectionEvent]:
        if self._last_t is not None and sample.t_ms < self._last_t:
            raise OutOfOrderSample(sample.t_ms, self._last_t)
        self._last_t = sample.t_ms

        if self._anchor is not None:
            dx = sample.x_px - self._anchor.x_px
            dy = sample.y_px - self._anchor.y_px
            if dx * dx + dy * dy > self.cfg.radius_px ** 2:
                self._anchor = None
        if self._anchor is None:
            self._anchor = sample
            self._fired = False
            return None
        if self._fired or sample.t_ms - self._anchor.t_ms < self.cfg.dwell_ms:
            return None
        self._fired = True
        return SelectionEvent(sample.t_ms, sample.x_px, sample.y_px, SwitchKind.DWELL)


# Mechanical buttons beat the thumb tap, which beats the gaze switch, which
# beats dwell. The studies ran one switch per condition; the workbench may
# enable several, so the order must be fixed and deterministic.
ARBITRATION_PRIORITY: tuple[SwitchKind, ...] = (
    SwitchKind.MECHANICAL_LEFT,
    SwitchKind.MECHANICAL_RIGHT,
    SwitchKind.MECHANICAL_DOUBLE,
    SwitchKind.THUMB_TAP,
    SwitchKind.GAZE,
    SwitchKind.DWELL,
)

DEBOUNCE_MS = 150.0


@dataclass
class Arbiter:
    """Per-session switch arbitration with debounce state."""

    debounce_ms: float = DEBOUNCE_MS
    _last_emit: dict[SwitchKind, float] = field(default_factory=dict)

    def arbitrate(self, events: Sequence[SelectionEvent],
                  mode: ModeState) -> Optional[SelectionEvent]:
        """At most one event per tick; None while the laser is gated off."""
        if not mode.laser_enabled:
            return None
        for kind in ARBITRATION_PRIORITY:
            for ev in events:
                if ev.switch is not kind:
                    continue
                last = self._last_emit.get(kind)
                if last is not None and ev.t_ms - last < self.debounce_ms:
                    continue
                self._last_emit[kind] = ev.t_ms
                return ev
        return None


@dataclass(frozen=True)
class SwitchPress:
    """One physical switch edge from a JSONL event log."""

    t_ms: float
    switch: SwitchKind
    pressed: bool


def read_switch_jsonl(lines: Iterable[str]) -> list[SwitchPress]:
    """Parse switch events from JSONL lines {t_ms, switch, pressed}."""
    presses = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        presses.append(SwitchPress(
            t_ms=float(obj["t_ms"]),
            switch=SwitchKind(obj["switch"]),
            pressed=bool(obj["pressed"]),
        ))
    return presses
