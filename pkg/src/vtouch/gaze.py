"""Eye-gaze switch: fires when gaze holds within a visual-angle cone for a
dwell duration, plus glance metrics over cued selection episodes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .core import (
    OutOfOrderSample,
    ScreenSpec,
    VTouchError,
    visual_angle_to_pixels,
)


class NoGlanceFound(VTouchError):
    """No in-region gaze episode followed a cue."""

    def __init__(self, cue_t_ms: float):
        self.cue_t_ms = cue_t_ms
        super().__init__(f"no glance into the region after cue at {cue_t_ms} ms")


@dataclass(frozen=True)
class GazeSample:
    t_ms: float
    x_px: float
    y_px: float
    valid: bool = True


@dataclass(frozen=True)
class GazeSwitchConfig:
    cone_full_angle_deg: float = 1.6
    dwell_ms: float = 300.0
    refractory_ms: float = 500.0

    def __post_init__(self) -> None:
        if self.cone_full_angle_deg <= 0 or self.dwell_ms <= 0 or self.refractory_ms <= 0:
            raise ValueError("gaze switch parameters must be positive")


@dataclass(frozen=True)
class GazeTrigger:
    """A fixation-complete event: time and the fixation centroid."""

    t_ms: float
    x_px: float
    y_px: float


class FixationSwitch:
    """Dispersion-based fixation trigger.

    An episode starts at an anchor sample; any sample farther than the cone
    radius from the anchor restarts the episode there. When an episode spans
    the dwell duration a trigger fires at the episode centroid, unless it
    falls inside the refractory window of the previous trigger, in which
    case it is swallowed and the episode restarts. Invalid samples (tracker
    lost the eyes) reset the episode outright so a dropout can never
    produce a stale trigger.
    """

    def __init__(self, cfg: GazeSwitchConfig, spec: ScreenSpec):
        self.cfg = cfg
        self.radius_px = visual_angle_to_pixels(cfg.cone_full_angle_deg, spec)
        self._last_t: Optional[float] = None
        self._last_trigger_t: Optional[float] = None
        self._anchor: Optional[GazeSample] = None
        self._sum_x = 0.0
        self._sum_y = 0.0
        self._count = 0

    def _restart(self, sample: Optional[GazeSample]) -> None:
        self._anchor = sample
        if sample is None:
            self._sum_x = self._sum_y = 0.0
            self._count = 0
        else:
            self._sum_x, self._sum_y, self._count = sample.x_px, sample.y_px, 1

    def update(self, sample: GazeSample) -> Optional[GazeTrigger]:
        if self._last_t is not None and sample.t_ms < self._last_t:
            raise OutOfOrderSample(sample.t_ms, self._last_t)
        self._last_t = sample.t_ms

        if not sample.valid:
            self._restart(None)
            return None
        if self._anchor is None:
            self._restart(sample)
            return None

        dx = sample.x_px - self._anchor.x_px
        dy = sample.y_px - self._anchor.y_px
        if dx * dx + dy * dy > self.radius_px * self.radius_px:
            self._restart(sample)
            return None

        self._sum_x += sample.x_px
        self._sum_y += sample.y_px
        self._count += 1
        if sample.t_ms - self._anchor.t_ms < self.cfg.dwell_ms:
            return None

        in_refractory = (
            self._last_trigger_t is not None
            and sample.t_ms - self._last_trigger_t < self.cfg.refractory_ms
        )
        centroid = (self._sum_x / self._count, self._sum_y / self._count)
        self._restart(sample)
        if in_refractory:
            return None
        self._last_trigger_t = sample.t_ms
        return GazeTrigger(sample.t_ms, centroid[0], centroid[1])


# ---------------------------------------------------------------------------
# Glance metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rect:
    """Axis-aligned screen rectangle, top-left anchored."""

    x_px: float
    y_px: float
    width_px: float
    height_px: float

    @property
    def center(self) -> tuple[float, float]:
        return self.x_px + self.width_px / 2.0, self.y_px + self.height_px / 2.0

    def contains(self, x: float, y: float) -> bool:
        return (self.x_px <= x <= self.x_px + self.width_px
                and self.y_px <= y <= self.y_px + self.height_px)


@dataclass(frozen=True)
class GlanceStats:
    mean_x_offset_px: float
    mean_y_offset_px: float
    mean_reaction_ms: float
    mean_glance_ms: float


def glance_metrics(log: Sequence[GazeSample], region: Rect,
                   cues: Sequence[float]) -> GlanceStats:
    """Per-cue glance statistics, averaged over cues.

    Reaction is the delay from a cue to the first in-region sample; the
    glance lasts until gaze leaves the region (or the log ends). Offsets are
    mean absolute distances from the region center, per axis.
    """
    if not cues:
        raise ValueError("at least one cue is required")
    last_t = None
    for s in log:
        if last_t is not None and s.t_ms < last_t:
            raise OutOfOrderSample(s.t_ms, last_t)
        last_t = s.t_ms

    cx, cy = region.center
    reactions: list[float] = []
    glances: list[float] = []
    x_offsets: list[float] = []
    y_offsets: list[float] = []

    sorted_cues = sorted(cues)
    for idx, cue_t in enumerate(sorted_cues):
        next_cue = sorted_cues[idx + 1] if idx + 1 < len(sorted_cues) else float("inf")
        entry_i = None
        for i, s in enumerate(log):
            if s.t_ms < cue_t or not s.valid:
                continue
            if s.t_ms >= next_cue:
                break
            if region.contains(s.x_px, s.y_px):
                entry_i = i
                break
        if entry_i is None:
            raise NoGlanceFound(cue_t)

        entry_t = log[entry_i].t_ms
        exit_t = log[-1].t_ms
        episode = []
        for s in log[entry_i:]:
            if s.valid and region.contains(s.x_px, s.y_px):
                episode.append(s)
            else:
                exit_t = s.t_ms
                break
        reactions.append(entry_t - cue_t)
        glances.append(exit_t - entry_t)
        x_offsets.append(sum(abs(s.x_px - cx) for s in episode) / len(episode))
        y_offsets.append(sum(abs(s.y_px - cy) for s in episode) / len(episode))

    n = len(sorted_cues)
    return GlanceStats(
        mean_x_offset_px=sum(x_offsets) / n,
        mean_y_offset_px=sum(y_offsets) / n,
        mean_reaction_ms=sum(reactions) / n,
        mean_glance_ms=sum(glances) / n,
    )


def read_gaze_jsonl(lines: Iterable[str]) -> list[GazeSample]:
    """Parse gaze samples from JSONL lines {t_ms, x_px, y_px, valid}."""
    samples = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        samples.append(GazeSample(
            t_ms=float(obj["t_ms"]),
            x_px=float(obj.get("x_px", 0.0)),
            y_px=float(obj.get("y_px", 0.0)),
            valid=bool(obj.get("valid", True)),
        ))
    return samples
