"""Deterministic synthetic participant: minimum-jerk aiming with Fitts-law
movement times, gaze scanpaths, and a lane-keeping driver, so every harness
runs without a human.

The motion model is the minimum-jerk profile: its closed-form derivatives
make the kinematics estimator and the expansion trigger analytically
checkable, and its speed peaks exactly at the movement midpoint, which is
what lets the homing phase be detected.
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .adaptation import (
    AdaptationConfig,
    TargetLayout,
    estimate_kinematics,
    maybe_expand,
)
from .core import CursorSample, ScreenSpec, Source, VTouchError
from .driving import (
    ReferencePath,
    VehicleState,
    mean_lane_deviation,
    schedule_cues,
    steering_angle_sd,
    step_vehicle,
    SIM_TICK_MS,
    TOP_SPEED_MPS,
    WHEELBASE_M,
)
from .gaze import FixationSwitch, GazeSample, GazeSwitchConfig, Rect
from .selection import DwellConfig, DwellTimer, SelectionEvent, SwitchKind
from .tasks import (
    FittsCondition,
    PointingTrial,
    TrialRecord,
    fitts_id,
    generate_grid_task_incar,
    generate_ring_task,
)


class TimeOutOfRange(VTouchError):
    """Sample time outside the [0, MT] movement interval."""


MAX_STEERING_RAD = 0.5
SAMPLE_PERIOD_MS = 10.0   # 100 Hz cursor streams
GAZE_PERIOD_MS = 1000.0 / 90.0


@dataclass(frozen=True)
class UserParams:
    """Calibrated oracle parameters (the studies report only mean times, so
    a and b are workbench calibrations, not measured constants)."""

    fitts_a_ms: float = 300.0
    fitts_b_ms_per_bit: float = 150.0
    reaction_ms: float = 300.0
    context_switch_ms: float = 500.0
    endpoint_noise_px: Optional[float] = None  # None: W/12 of the aimed target
    reaction_jitter_ms: float = 0.0            # uniform half-width on reaction
    mt_jitter_ms: float = 0.0                  # Gaussian sigma on movement time
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.fitts_a_ms, self.fitts_b_ms_per_bit, self.reaction_ms,
               self.context_switch_ms) < 0:
            raise ValueError("timing parameters must be >= 0")


# ---------------------------------------------------------------------------
# Minimum-jerk motion
# ---------------------------------------------------------------------------

def min_jerk_position(x0: float, x1: float, mt_ms: float, t_ms: float) -> float:
    """Position along one axis: x0 + (x1-x0)(10 tau^3 - 15 tau^4 + 6 tau^5)."""
    if mt_ms <= 0:
        raise TimeOutOfRange(f"movement time must be > 0, got {mt_ms}")
    if not 0.0 <= t_ms <= mt_ms:
        raise TimeOutOfRange(f"t={t_ms} outside [0, {mt_ms}]")
    tau = t_ms / mt_ms
    return x0 + (x1 - x0) * (10 * tau**3 - 15 * tau**4 + 6 * tau**5)


def min_jerk_velocity(x0: float, x1: float, mt_ms: float, t_ms: float) -> float:
    """Closed-form velocity in units per ms."""
    if mt_ms <= 0:
        raise TimeOutOfRange(f"movement time must be > 0, got {mt_ms}")
    if not 0.0 <= t_ms <= mt_ms:
        raise TimeOutOfRange(f"t={t_ms} outside [0, {mt_ms}]")
    tau = t_ms / mt_ms
    return (x1 - x0) * (30 * tau**2 - 60 * tau**3 + 30 * tau**4) / mt_ms


def min_jerk_acceleration(x0: float, x1: float, mt_ms: float, t_ms: float) -> float:
    """Closed-form acceleration in units per ms^2; sign flips at tau = 0.5."""
    if mt_ms <= 0:
        raise TimeOutOfRange(f"movement time must be > 0, got {mt_ms}")
    if not 0.0 <= t_ms <= mt_ms:
        raise TimeOutOfRange(f"t={t_ms} outside [0, {mt_ms}]")
    tau = t_ms / mt_ms
    return (x1 - x0) * (60 * tau - 180 * tau**2 + 120 * tau**3) / mt_ms**2


def min_jerk_trajectory(start: tuple[float, float], end: tuple[float, float],
                        mt_ms: float, t0_ms: float = 0.0,
                        period_ms: float = SAMPLE_PERIOD_MS,
                        source: Source = Source.POINTER_PROXY) -> list[CursorSample]:
    """Sampled 2D minimum-jerk reach from start to end, ending exactly on
    the endpoint at t0 + MT."""
    samples = []
    k = 0
    while True:
        t = min(k * period_ms, mt_ms)
        samples.append(CursorSample(
            t0_ms + t,
            min_jerk_position(start[0], end[0], mt_ms, t),
            min_jerk_position(start[1], end[1], mt_ms, t),
            source,
        ))
        if t >= mt_ms:
            return samples
        k += 1


def fitts_mt(params: UserParams, cond: FittsCondition) -> float:
    """Movement time a + b * log2(2D/W)."""
    return params.fitts_a_ms + params.fitts_b_ms_per_bit * fitts_id(cond)


# ---------------------------------------------------------------------------
# Pointing trials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointingPipeline:
    """The selection stack a simulated trial runs through."""

    spec: ScreenSpec
    switch: SwitchKind = SwitchKind.MECHANICAL_LEFT
    source: Source = Source.LASER
    dwell: Optional[DwellConfig] = None
    gaze: GazeSwitchConfig = GazeSwitchConfig()
    adaptation: AdaptationConfig = AdaptationConfig()

    @classmethod
    def for_modality(cls, modality: str, spec: ScreenSpec) -> "PointingPipeline":
        """laser: mechanical switch; gaze: laser with eye-gaze switch;
        ir/imu: the hand trackers' dwell selection."""
        if modality == "laser":
            return cls(spec, SwitchKind.MECHANICAL_LEFT, Source.LASER)
        if modality == "gaze":
            return cls(spec, SwitchKind.GAZE, Source.LASER)
        if modality == "ir":
            return cls(spec, SwitchKind.DWELL, Source.IR,
                       dwell=DwellConfig.for_source(Source.IR))
        if modality == "imu":
            return cls(spec, SwitchKind.DWELL, Source.IMU,
                       dwell=DwellConfig.for_source(Source.IMU))
        raise ValueError(f"unknown modality {modality!r}")


def _movement_time(params: UserParams, distance_px: float, width_px: float,
                   rng: random.Random) -> float:
    mt = (params.fitts_a_ms
          + params.fitts_b_ms_per_bit * math.log2(2.0 * max(distance_px, 1e-9) / width_px))
    if params.mt_jitter_ms > 0:
        mt += rng.gauss(0.0, params.mt_jitter_ms)
    return max(mt, 1.0)


def simulate_pointing_trial(params: UserParams, layout: TargetLayout,
                            pipeline: PointingPipeline, adaptive: bool,
                            cue_t_ms: float = 0.0,
                            rng: Optional[random.Random] = None) -> TrialRecord:
    """One cued reach: after the reaction delay, a 100 Hz minimum-jerk
    trajectory from screen center to the target (plus endpoint noise), then
    selection through the configured switch. Wrong hits re-aim until the
    target is hit or the trial times out."""
    rng = rng if rng is not None else random.Random(params.seed)
    goal = layout.goal
    base_w = goal.base_width_px
    sigma = (params.endpoint_noise_px if params.endpoint_noise_px is not None
             else base_w / 12.0)
    start = pipeline.spec.center
    condition = FittsCondition(max(goal.distance_to(*start), 1e-9), base_w)
    trial = PointingTrial(condition, cue_t_ms, adaptive, pipeline.source)

    # In adaptive mode the user exploits the grown hit region: for a
    # minimum-jerk reach the nearest target is expanded from homing onset,
    # so the effective width is the expanded one for the whole aim.
    w_eff = base_w * pipeline.adaptation.expansion_factor if adaptive else base_w

    dwell_timer = DwellTimer(pipeline.dwell) if pipeline.switch is SwitchKind.DWELL else None
    fixation = (FixationSwitch(pipeline.gaze, pipeline.spec)
                if pipeline.switch is SwitchKind.GAZE else None)
    window: deque[CursorSample] = deque(maxlen=pipeline.adaptation.window_samples)
    working = layout

    def feed(sample: CursorSample) -> Optional[SelectionEvent]:
        nonlocal working
        trial.log_sample(sample)
        window.append(sample)
        if adaptive and len(window) >= 3:
            k = estimate_kinematics(list(window))
            working = maybe_expand(working, sample, k, pipeline.adaptation)
        return dwell_timer.update(sample) if dwell_timer is not None else None

    reaction = params.reaction_ms
    if params.reaction_jitter_ms > 0:
        reaction += rng.uniform(-params.reaction_jitter_ms, params.reaction_jitter_ms)
    t = cue_t_ms + reaction
    position = start

    while True:
        aim = (goal.x_px + rng.gauss(0.0, sigma), goal.y_px + rng.gauss(0.0, sigma))
        distance = math.hypot(goal.x_px - position[0], goal.y_px - position[1])
        mt = _movement_time(params, distance, w_eff, rng)
        event: Optional[SelectionEvent] = None
        for sample in min_jerk_trajectory(position, aim, mt, t, source=pipeline.source):
            ev = feed(sample)
            if ev is not None and event is None:
                event = ev
        t += mt
        position = aim

        if pipeline.switch is SwitchKind.GAZE:
            # Eyes settle on the spot once the cursor arrives; the switch
            # fires after the fixation dwell. The emitted position is the
            # cursor's, not the gaze centroid.
            k = 0
            while event is None:
                gt = t + k * GAZE_PERIOD_MS
                trig = fixation.update(GazeSample(gt, goal.x_px, goal.y_px))
                if trig is not None:
                    event = SelectionEvent(gt, position[0], position[1], SwitchKind.GAZE)
                k += 1
            # keep the cursor stream alive under the fixation
            k = 1
            while t + k * SAMPLE_PERIOD_MS <= event.t_ms:
                feed(CursorSample(t + k * SAMPLE_PERIOD_MS, position[0],
                                  position[1], pipeline.source))
                k += 1
            t = event.t_ms
        elif dwell_timer is not None:
            k = 1
            while event is None:
                st = t + k * SAMPLE_PERIOD_MS
                event = feed(CursorSample(st, position[0], position[1], pipeline.source))
                k += 1
            t = max(t, event.t_ms)
        else:
            event = SelectionEvent(t, position[0], position[1], pipeline.switch)

        record = trial.step(event, working if adaptive else layout)
        if record is not None:
            return record
        if trial.expired(t):
            return trial.abort(pipeline.switch)
        # wrong hit or empty-space click: notice, re-aim from here
        t += params.reaction_ms


def simulate_pointing_session(params: UserParams, pipeline: PointingPipeline,
                              conditions: Sequence[FittsCondition],
                              n_trials: int, adaptive: bool,
                              n_targets: int = 8,
                              inter_trial_ms: float = 500.0) -> list[TrialRecord]:
    """A block of cued trials cycling through the conditions; one shared
    seeded generator makes the whole session reproducible."""
    rng = random.Random(params.seed)
    records = []
    cue_t = 0.0
    for i in range(n_trials):
        cond = conditions[i % len(conditions)]
        layout = generate_ring_task(cond, pipeline.spec, n_targets=n_targets, rng=rng)
        rec = simulate_pointing_trial(params, layout, pipeline, adaptive,
                                      cue_t_ms=cue_t, rng=rng)
        records.append(rec)
        end_t = rec.select_t_ms if rec.select_t_ms is not None else cue_t + 10_000.0
        cue_t = end_t + inter_trial_ms
    return records


def simulate_incar_session(params: UserParams, pipeline: PointingPipeline,
                           n_selections: int, adaptive: bool = False,
                           button_px: float = 70.0,
                           inter_trial_ms: float = 500.0) -> list[TrialRecord]:
    """Grid-task selections as run inside the car."""
    rng = random.Random(params.seed)
    records = []
    cue_t = 0.0
    for _ in range(n_selections):
        layout = generate_grid_task_incar(pipeline.spec, button_px=button_px, rng=rng)
        rec = simulate_pointing_trial(params, layout, pipeline, adaptive,
                                      cue_t_ms=cue_t, rng=rng)
        records.append(rec)
        end_t = rec.select_t_ms if rec.select_t_ms is not None else cue_t + 10_000.0
        cue_t = end_t + inter_trial_ms
    return records


# ---------------------------------------------------------------------------
# Gaze scanpaths
# ---------------------------------------------------------------------------

def gaze_scanpath(params: UserParams, region: Rect, cue_t_ms: float,
                  spec: ScreenSpec, rng: Optional[random.Random] = None,
                  fixation_jitter_px: float = 1.0) -> list[GazeSample]:
    """90 Hz gaze stream for one cued glance: center fixation, then a
    fixation inside the region after a sampled reaction (0.8-1.4 s),
    holding a sampled duration (0.2-1 s), then back to center.

    The measured per-axis offsets are sampled from the 100-200 px / 400-800
    px bands but clamped inside the region so the glance actually lands on
    it (the bands come from a study whose screen geometry is unknown).
    """
    rng = rng if rng is not None else random.Random(params.seed)
    reaction = rng.uniform(800.0, 1400.0)
    duration = rng.uniform(200.0, 1000.0)
    off_x = math.copysign(rng.uniform(100.0, 200.0), rng.uniform(-1, 1))
    off_y = math.copysign(rng.uniform(400.0, 800.0), rng.uniform(-1, 1))
    margin = 3.0 * fixation_jitter_px + 1.0
    half_w = max(region.width_px / 2.0 - margin, 0.0)
    half_h = max(region.height_px / 2.0 - margin, 0.0)
    off_x = min(max(off_x, -half_w), half_w)
    off_y = min(max(off_y, -half_h), half_h)

    cx, cy = spec.center
    rx, ry = region.center
    fx, fy = rx + off_x, ry + off_y

    samples = []
    t = cue_t_ms
    end_center = cue_t_ms + reaction
    end_glance = end_center + duration
    end_tail = end_glance + 150.0
    while t < end_tail:
        if t < end_center or t >= end_glance:
            x, y = cx, cy
        else:
            x, y = fx, fy
        samples.append(GazeSample(
            t,
            x + rng.gauss(0.0, fixation_jitter_px),
            y + rng.gauss(0.0, fixation_jitter_px),
            valid=True,
        ))
        t += GAZE_PERIOD_MS
    return samples


# ---------------------------------------------------------------------------
# Lane keeping and dual-task driving
# ---------------------------------------------------------------------------

def lane_keeping_control(state: VehicleState, ref: ReferencePath, gain: float,
                         heading_damping: Optional[float] = None) -> float:
    """Proportional steering on lateral error with heading damping, clamped
    to +/-0.5 rad. The default damping keeps the closed loop overdamped at
    every gain (damping ratio 1.25, speed-independent)."""
    if gain <= 0:
        raise ValueError(f"gain must be > 0, got {gain}")
    if heading_damping is None:
        heading_damping = 2.5 * math.sqrt(gain * WHEELBASE_M)
    err = ref.y_ref(state.s_m) - state.y_m
    steering = gain * err - heading_damping * state.heading_rad
    return min(max(steering, -MAX_STEERING_RAD), MAX_STEERING_RAD)


@dataclass(frozen=True)
class DriveResult:
    states: tuple[VehicleState, ...]
    cue_times_ms: tuple[int, ...]
    response_times_ms: tuple[float, ...]
    mean_deviation_m: float
    steering_sd_rad: float
    mean_speed_mps: float


def simulate_drive(params: UserParams, pipeline: PointingPipeline,
                   duration_ms: float, secondary: bool,
                   gain: float = 0.1, seed: Optional[int] = None,
                   course: Optional[ReferencePath] = None,
                   accel_mps2: float = 1.5) -> DriveResult:
    """Closed-loop lane keeping, optionally interrupted by cued dashboard
    selections during which the driver holds the wheel still.

    Each cue costs reaction + context switch + the grid-task pointing time
    (plus the switch's own dwell); steering is frozen for that whole span.
    """
    seed = params.seed if seed is None else seed
    rng = random.Random(seed)
    if course is None:
        expected_length = TOP_SPEED_MPS * duration_ms / 1000.0
        course = ReferencePath.random_course(seed + 1, expected_length)
    cues = schedule_cues(seed, duration_ms) if secondary else None

    switch_latency = pipeline.dwell.dwell_ms if pipeline.dwell is not None else (
        pipeline.gaze.dwell_ms if pipeline.switch is SwitchKind.GAZE else 0.0)

    state = VehicleState(speed_mps=TOP_SPEED_MPS)
    states = [state]
    response_times: list[float] = []
    busy_until = -math.inf
    cue_iter = iter(cues.cue_times_ms) if cues is not None else iter(())
    next_cue = next(cue_iter, None)

    while state.t_ms < duration_ms:
        if next_cue is not None and state.t_ms >= next_cue:
            layout = generate_grid_task_incar(pipeline.spec, rng=rng)
            goal = layout.goal
            distance = goal.distance_to(*pipeline.spec.center)
            mt = _movement_time(params, distance, goal.base_width_px, rng)
            rt = params.reaction_ms + params.context_switch_ms + mt + switch_latency
            response_times.append(rt)
            busy_until = next_cue + rt
            next_cue = next(cue_iter, None)
        if state.t_ms < busy_until:
            steering = state.steering_rad  # hands busy with the display
        else:
            steering = lane_keeping_control(state, course, gain)
        state = step_vehicle(state, steering, accel_mps2, SIM_TICK_MS)
        states.append(state)

    driven = [(st.s_m, st.y_m) for st in states]
    return DriveResult(
        states=tuple(states),
        cue_times_ms=cues.cue_times_ms if cues is not None else (),
        response_times_ms=tuple(response_times),
        mean_deviation_m=mean_lane_deviation(driven, course),
        steering_sd_rad=steering_angle_sd([st.steering_rad for st in states]),
        mean_speed_mps=sum(st.speed_mps for st in states) / len(states),
    )
