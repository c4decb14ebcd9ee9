"""Lane-change primary task: kinematic vehicle model with the 60 km/h cap,
a piecewise reference path with smooth lane transitions, driving metrics,
and dual-task cue scheduling.
"""
from __future__ import annotations

import json
import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import VTouchError
from .selection import SelectionEvent


class NonMonotoneArclength(VTouchError):
    """Longitudinal positions must strictly increase for path metrics."""


class SelectionBeforeCue(VTouchError):
    """A response cannot precede its cue."""


TOP_SPEED_MPS = 60.0 / 3.6  # simulator caps top speed at 60 km/h
WHEELBASE_M = 2.6
LANE_WIDTH_M = 3.5
LANE_CENTERS_M = (-LANE_WIDTH_M, 0.0, LANE_WIDTH_M)
TRANSITION_LENGTH_M = 30.0
SIM_TICK_MS = 10.0

CUE_GAP_MIN_MS = 5000
CUE_GAP_MAX_MS = 7000


@dataclass(frozen=True)
class VehicleState:
    s_m: float = 0.0
    y_m: float = 0.0
    heading_rad: float = 0.0
    speed_mps: float = 0.0
    steering_rad: float = 0.0
    t_ms: float = 0.0


def step_vehicle(state: VehicleState, steering_cmd_rad: float,
                 accel_cmd_mps2: float, dt_ms: float = SIM_TICK_MS) -> VehicleState:
    """One kinematic-bicycle step; position and heading advance with the
    pre-step speed, then speed integrates the acceleration command and
    clamps to [0, top speed]."""
    if not 0.0 < dt_ms <= 100.0:
        raise ValueError(f"dt_ms must be in (0, 100], got {dt_ms}")
    dt = dt_ms / 1000.0
    s = state.s_m + state.speed_mps * math.cos(state.heading_rad) * dt
    y = state.y_m + state.speed_mps * math.sin(state.heading_rad) * dt
    heading = state.heading_rad + (state.speed_mps / WHEELBASE_M) * math.tan(steering_cmd_rad) * dt
    speed = min(max(state.speed_mps + accel_cmd_mps2 * dt, 0.0), TOP_SPEED_MPS)
    return VehicleState(s, y, heading, speed, steering_cmd_rad, state.t_ms + dt_ms)


@dataclass(frozen=True)
class ReferencePath:
    """Lateral reference y_ref(s): lane centers joined by raised-cosine
    transitions starting at each signboard position."""

    initial_lane: int = 1  # index into LANE_CENTERS_M; 1 = center lane
    changes: tuple[tuple[float, int], ...] = ()

    def __post_init__(self) -> None:
        last_s = -math.inf
        for s, lane in self.changes:
            if s <= last_s:
                raise ValueError("lane-change positions must strictly increase")
            if not 0 <= lane < len(LANE_CENTERS_M):
                raise ValueError(f"lane index {lane} out of range")
            last_s = s

    def lane_at(self, s_m: float) -> int:
        lane = self.initial_lane
        for change_s, change_lane in self.changes:
            if s_m >= change_s:
                lane = change_lane
            else:
                break
        return lane

    def y_ref(self, s_m: float) -> float:
        y = LANE_CENTERS_M[self.initial_lane]
        for change_s, change_lane in self.changes:
            if s_m < change_s:
                break
            target = LANE_CENTERS_M[change_lane]
            u = (s_m - change_s) / TRANSITION_LENGTH_M
            if u >= 1.0:
                y = target
            else:
                y = y + (target - y) * 0.5 * (1.0 - math.cos(math.pi * u))
                break
        return y

    @classmethod
    def random_course(cls, seed: int, length_m: float,
                      spacing_m: float = 150.0) -> "ReferencePath":
        """Signboards at regular spacing, each commanding a random lane
        different from the current one."""
        rng = random.Random(seed)
        lane = 1
        changes = []
        s = spacing_m
        while s < length_m:
            lane = rng.choice([i for i in range(len(LANE_CENTERS_M)) if i != lane])
            changes.append((s, lane))
            s += spacing_m
        return cls(initial_lane=1, changes=tuple(changes))


def mean_lane_deviation(driven: Sequence[tuple[float, float]],
                        ref: ReferencePath) -> float:
    """Arclength-weighted mean absolute lateral deviation from the
    reference, by trapezoidal integration over s."""
    if len(driven) < 2:
        raise ValueError(f"need >= 2 samples, got {len(driven)}")
    for (s0, _), (s1, _) in zip(driven, driven[1:]):
        if s1 <= s0:
            raise NonMonotoneArclength(f"s went from {s0} to {s1}")
    total = 0.0
    for (s0, y0), (s1, y1) in zip(driven, driven[1:]):
        e0 = abs(y0 - ref.y_ref(s0))
        e1 = abs(y1 - ref.y_ref(s1))
        total += 0.5 * (e0 + e1) * (s1 - s0)
    return total / (driven[-1][0] - driven[0][0])


def steering_angle_sd(steering: Sequence[float]) -> float:
    """Population standard deviation of steering-angle samples."""
    if len(steering) < 2:
        raise ValueError(f"need >= 2 samples, got {len(steering)}")
    mean = sum(steering) / len(steering)
    return math.sqrt(sum((v - mean) ** 2 for v in steering) / len(steering))


@dataclass(frozen=True)
class CueSchedule:
    cue_times_ms: tuple[int, ...]

    def __post_init__(self) -> None:
        prev = 0
        for t in self.cue_times_ms:
            gap = t - prev
            if not CUE_GAP_MIN_MS <= gap <= CUE_GAP_MAX_MS:
                raise ValueError(f"cue gap {gap} ms outside [{CUE_GAP_MIN_MS}, {CUE_GAP_MAX_MS}]")
            prev = t

    def last_cue_before(self, t_ms: float) -> int | None:
        i = bisect_right(self.cue_times_ms, t_ms)
        return self.cue_times_ms[i - 1] if i else None


def schedule_cues(seed: int, duration_ms: float) -> CueSchedule:
    """Auditory-cue times with gaps uniform in [5, 7] s, deterministic for
    a seed, covering [0, duration]."""
    if duration_ms <= 0:
        raise ValueError(f"duration_ms must be > 0, got {duration_ms}")
    rng = random.Random(seed)
    times = []
    t = 0
    while True:
        t += rng.randint(CUE_GAP_MIN_MS, CUE_GAP_MAX_MS)
        if t > duration_ms:
            break
        times.append(t)
    return CueSchedule(tuple(times))


def response_time(cue_t_ms: float, selection: SelectionEvent) -> float:
    """Cue-to-selection delay; covers reacting to the cue, switching from
    driving, and the pointing itself."""
    if selection.t_ms < cue_t_ms:
        raise SelectionBeforeCue(
            f"selection at {selection.t_ms} ms precedes cue at {cue_t_ms} ms"
        )
    return selection.t_ms - cue_t_ms


# ---------------------------------------------------------------------------
# Drive log JSONL
# ---------------------------------------------------------------------------

def drive_log_to_jsonl(states: Sequence[VehicleState]) -> str:
    lines = []
    for st in states:
        lines.append(json.dumps({
            "t_ms": st.t_ms, "s_m": st.s_m, "y_m": st.y_m,
            "steering_rad": st.steering_rad, "speed_mps": st.speed_mps,
        }, sort_keys=True, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


def read_drive_jsonl(lines: Iterable[str]) -> list[VehicleState]:
    states = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        states.append(VehicleState(
            s_m=float(obj["s_m"]), y_m=float(obj["y_m"]),
            heading_rad=float(obj.get("heading_rad", 0.0)),
            speed_mps=float(obj["speed_mps"]),
            steering_rad=float(obj["steering_rad"]), t_ms=float(obj["t_ms"]),
        ))
    return states
