"""Pointing-task harness: ring and in-car grid layout generation, the trial
lifecycle with wrong-selection accounting, and Fitts' law analytics.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .core import CursorSample, NonPositiveDimension, ScreenSpec, Source, VTouchError
from .adaptation import Role, Target, TargetLayout, make_target
from .selection import SelectionEvent, SwitchKind


class RingOverflow(VTouchError):
    """The requested ring does not fit on the screen."""


class DegenerateDesign(VTouchError):
    """Fitts regression needs at least two distinct difficulty values."""


# The width/distance grid of the pointing study this workbench reproduces.
PAPER_WIDTHS_PX = (45.0, 55.0, 65.0, 75.0)
PAPER_DISTANCES_PX = (80.0, 160.0, 240.0, 325.0)

TRIAL_TIMEOUT_MS = 10_000.0


@dataclass(frozen=True)
class FittsCondition:
    D_px: float
    W_px: float

    def __post_init__(self) -> None:
        if self.D_px <= 0:
            raise NonPositiveDimension("D_px", self.D_px)
        if self.W_px <= 0:
            raise NonPositiveDimension("W_px", self.W_px)


def fitts_id(cond: FittsCondition) -> float:
    """Index of difficulty in bits: log2(2D/W)."""
    return math.log2(2.0 * cond.D_px / cond.W_px)


def paper_grid() -> list[FittsCondition]:
    return [FittsCondition(d, w) for w in PAPER_WIDTHS_PX for d in PAPER_DISTANCES_PX]


def generate_ring_task(cond: FittsCondition, spec: ScreenSpec, n_targets: int = 8,
                       seed: int = 0, rng: Optional[random.Random] = None) -> TargetLayout:
    """Squares of width W evenly spaced on a circle of radius D around the
    screen center; a uniformly-seeded one is the target, the rest
    distracters."""
    if n_targets < 2:
        raise ValueError(f"need at least 2 targets, got {n_targets}")
    half_extent = min(spec.width_px, spec.height_px) / 2.0
    if cond.D_px + cond.W_px / 2.0 > half_extent:
        raise RingOverflow(
            f"D + W/2 = {cond.D_px + cond.W_px / 2.0} exceeds half-extent {half_extent}"
        )
    rng = rng if rng is not None else random.Random(seed)
    target_idx = rng.randrange(n_targets)
    cx, cy = spec.center
    targets = []
    for i in range(n_targets):
        angle = 2.0 * math.pi * i / n_targets - math.pi / 2.0
        role = Role.TARGET if i == target_idx else Role.DISTRACTER
        targets.append(make_target(
            i, cx + cond.D_px * math.cos(angle), cy + cond.D_px * math.sin(angle),
            cond.W_px, role,
        ))
    return TargetLayout(tuple(targets))


def generate_grid_task_incar(spec: ScreenSpec, n_buttons: int = 6,
                             button_px: float = 70.0, seed: int = 0,
                             rng: Optional[random.Random] = None) -> TargetLayout:
    """The in-car task: one highlighted target among blue buttons, all
    button_px squares on a fixed centered grid."""
    if button_px <= 0:
        raise NonPositiveDimension("button_px", button_px)
    if n_buttons < 2:
        raise ValueError(f"need at least 2 buttons, got {n_buttons}")
    rng = rng if rng is not None else random.Random(seed)
    target_idx = rng.randrange(n_buttons)

    cols = math.ceil(n_buttons / 2)
    rows = 2
    pitch = 2.0 * button_px
    cx, cy = spec.center
    if cols * pitch > spec.width_px or rows * pitch > spec.height_px:
        raise RingOverflow(f"{cols}x{rows} grid of {button_px} px buttons exceeds screen")
    targets = []
    for i in range(n_buttons):
        r, c = divmod(i, cols)
        x = cx + (c - (cols - 1) / 2.0) * pitch
        y = cy + (r - (rows - 1) / 2.0) * pitch
        role = Role.TARGET if i == target_idx else Role.DISTRACTER
        targets.append(make_target(i, x, y, button_px, role))
    return TargetLayout(tuple(targets))


# ---------------------------------------------------------------------------
# Trial lifecycle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    """One pointing trial. select_t_ms is None when the trial timed out."""

    condition: FittsCondition
    cue_t_ms: float
    select_t_ms: Optional[float]
    correct: bool
    selected_target_id: Optional[int]
    adaptive: bool
    wrong_hits: int = 0
    source: Source = Source.POINTER_PROXY
    switch: SwitchKind = SwitchKind.MECHANICAL_LEFT
    trajectory: tuple[CursorSample, ...] = ()
    tlx_score: Optional[float] = None
    sus_score: Optional[float] = None

    @property
    def selection_time_ms(self) -> Optional[float]:
        if self.select_t_ms is None:
            return None
        return self.select_t_ms - self.cue_t_ms


@dataclass
class PointingTrial:
    """Active trial: hit-tests selection events until the target is hit or
    the timeout passes. Wrong hits (distracters) are counted and the trial
    continues; clicks on empty space are ignored."""

    condition: FittsCondition
    cue_t_ms: float
    adaptive: bool
    source: Source = Source.POINTER_PROXY
    timeout_ms: float = TRIAL_TIMEOUT_MS
    wrong_hits: int = 0
    trajectory: list[CursorSample] = field(default_factory=list)

    def log_sample(self, sample: CursorSample) -> None:
        self.trajectory.append(sample)

    def expired(self, t_ms: float) -> bool:
        return t_ms - self.cue_t_ms > self.timeout_ms

    def _record(self, select_t: Optional[float], correct: bool,
                selected: Optional[int], switch: SwitchKind) -> TrialRecord:
        return TrialRecord(
            condition=self.condition,
            cue_t_ms=self.cue_t_ms,
            select_t_ms=select_t,
            correct=correct,
            selected_target_id=selected,
            adaptive=self.adaptive,
            wrong_hits=self.wrong_hits,
            source=self.source,
            switch=switch,
            trajectory=tuple(self.trajectory),
        )

    def abort(self, switch: SwitchKind = SwitchKind.MECHANICAL_LEFT) -> TrialRecord:
        return self._record(None, False, None, switch)

    def step(self, event: SelectionEvent,
             layout: TargetLayout) -> Optional[TrialRecord]:
        """Apply one selection event; a TrialRecord ends the trial."""
        if self.expired(event.t_ms):
            return self.abort(event.switch)
        hit = layout.hit_test(event.x_px, event.y_px)
        if hit is None:
            return None
        if hit.role is Role.TARGET:
            return self._record(event.t_ms, True, hit.id, event.switch)
        self.wrong_hits += 1
        return None


# ---------------------------------------------------------------------------
# Fitts analytics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FittsFit:
    """OLS fit of mean selection time against index of difficulty.

    ip_bits_per_s is 1000/slope; it is None (slope_positive False) when the
    fitted slope is not positive. throughput_mean_bits_per_s is the
    alternative mean(ID/MT) reading, kept for comparison.
    """

    a_ms: float
    b_ms_per_bit: float
    r2: float
    ip_bits_per_s: Optional[float]
    slope_positive: bool
    throughput_mean_bits_per_s: float
    n_trials: int


def fit_fitts(trials: Sequence[TrialRecord]) -> FittsFit:
    """Least squares on per-condition mean selection times; wrong and
    timed-out trials never enter the means."""
    done = [t for t in trials if t.correct and t.select_t_ms is not None]
    by_id: dict[float, list[float]] = {}
    throughputs = []
    for t in done:
        tid = fitts_id(t.condition)
        mt = t.selection_time_ms
        by_id.setdefault(tid, []).append(mt)
        if mt > 0:
            throughputs.append(tid / (mt / 1000.0))
    if len(by_id) < 2:
        raise DegenerateDesign(
            f"{len(by_id)} distinct difficulty value(s); need >= 2"
        )

    xs = sorted(by_id)
    ys = [sum(by_id[x]) / len(by_id[x]) for x in xs]
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    b = sxy / sxx
    a = my - b * mx
    ss_res = sum((y - (a + b * x)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - my) ** 2 for y in ys)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    positive = b > 0
    return FittsFit(
        a_ms=a,
        b_ms_per_bit=b,
        r2=r2,
        ip_bits_per_s=1000.0 / b if positive else None,
        slope_positive=positive,
        throughput_mean_bits_per_s=(sum(throughputs) / len(throughputs)
                                    if throughputs else 0.0),
        n_trials=len(done),
    )


def wrong_selection_rate(records: Sequence[TrialRecord]) -> float:
    """Percent of hits that landed on distracters."""
    wrong = sum(r.wrong_hits for r in records)
    correct = sum(1 for r in records if r.correct)
    total = wrong + correct
    return 100.0 * wrong / total if total else 0.0


# ---------------------------------------------------------------------------
# JSONL log schema
# ---------------------------------------------------------------------------

def trial_record_to_dict(r: TrialRecord) -> dict:
    return {
        "kind": "trial_result",
        "D_px": r.condition.D_px,
        "W_px": r.condition.W_px,
        "cue_t_ms": r.cue_t_ms,
        "select_t_ms": r.select_t_ms,
        "correct": r.correct,
        "selected_target_id": r.selected_target_id,
        "adaptive": r.adaptive,
        "wrong_hits": r.wrong_hits,
        "source": r.source.value,
        "switch": r.switch.value,
        "trajectory": [[s.t_ms, s.x_px, s.y_px] for s in r.trajectory],
        "tlx_score": r.tlx_score,
        "sus_score": r.sus_score,
    }


def trial_record_from_dict(obj: dict) -> TrialRecord:
    source = Source(obj.get("source", "pointer_proxy"))
    return TrialRecord(
        condition=FittsCondition(float(obj["D_px"]), float(obj["W_px"])),
        cue_t_ms=float(obj["cue_t_ms"]),
        select_t_ms=None if obj.get("select_t_ms") is None else float(obj["select_t_ms"]),
        correct=bool(obj["correct"]),
        selected_target_id=obj.get("selected_target_id"),
        adaptive=bool(obj.get("adaptive", False)),
        wrong_hits=int(obj.get("wrong_hits", 0)),
        source=source,
        switch=SwitchKind(obj.get("switch", "mechanical_left")),
        trajectory=tuple(CursorSample(t, x, y, source)
                         for t, x, y in obj.get("trajectory", [])),
        tlx_score=obj.get("tlx_score"),
        sus_score=obj.get("sus_score"),
    )


def write_trials_jsonl(records: Sequence[TrialRecord]) -> str:
    return "".join(json.dumps(trial_record_to_dict(r), sort_keys=True,
                              separators=(",", ":")) + "\n"
                   for r in records)


def read_trials_jsonl(lines: Iterable[str]) -> list[TrialRecord]:
    records = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        if obj.get("kind", "trial_result") != "trial_result":
            continue
        records.append(trial_record_from_dict(obj))
    return records
