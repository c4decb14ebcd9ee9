import json

import pytest
from hypothesis import given, settings, strategies as st

from vtouch.core import OutOfOrderSample, ScreenSpec, visual_angle_to_pixels
from vtouch.gaze import (
    FixationSwitch,
    GazeSample,
    GazeSwitchConfig,
    GlanceStats,
    NoGlanceFound,
    Rect,
    glance_metrics,
    read_gaze_jsonl,
)

SPEC = ScreenSpec(1024, 768, 0.42, 650.0)
CFG = GazeSwitchConfig()  # 1.6 degrees, 300 ms dwell, 500 ms refractory
PERIOD = 1000.0 / 90.0


def stream(duration_ms, x=500.0, y=400.0, t0=0.0):
    t = t0
    samples = []
    while t < t0 + duration_ms:
        samples.append(GazeSample(t, x, y))
        t += PERIOD
    return samples


def run(samples, cfg=CFG, spec=SPEC):
    switch = FixationSwitch(cfg, spec)
    return [trig for s in samples if (trig := switch.update(s)) is not None]


class TestFixationSwitch:
    def test_stationary_triggers_at_dwell(self):
        triggers = run(stream(400.0))
        assert len(triggers) == 1
        trig = triggers[0]
        # first sample at/after 300 ms on the 90 Hz grid
        assert 300.0 <= trig.t_ms < 300.0 + PERIOD
        assert (trig.x_px, trig.y_px) == (500.0, 400.0)

    def test_sweep_faster_than_cone_never_triggers(self):
        # 60 px across in 300 ms exceeds the 21.6 px cone radius
        samples = [GazeSample(t, 500.0 + 60.0 * t / 300.0, 400.0)
                   for t in [i * PERIOD for i in range(28)]]
        assert run(samples) == []

    def test_refractory_swallows_second_completion(self):
        # 900 ms stationary: trigger at +300; the +600 completion falls in
        # the refractory window and restarts the episode, whose own
        # completion would need t >= 900.
        triggers = run(stream(900.0))
        assert len(triggers) == 1

    def test_trigger_train_cadence(self):
        triggers = run(stream(2000.0))
        assert len(triggers) >= 2
        gaps = [b.t_ms - a.t_ms for a, b in zip(triggers, triggers[1:])]
        assert all(g >= CFG.refractory_ms for g in gaps)

    def test_invalid_sample_resets_episode(self):
        samples = stream(250.0)
        samples.append(GazeSample(255.0, 0.0, 0.0, valid=False))
        samples.extend(stream(280.0, t0=260.0))
        assert run(samples) == []  # neither episode reaches 300 ms

    def test_out_of_order_rejected(self):
        switch = FixationSwitch(CFG, SPEC)
        switch.update(GazeSample(100.0, 1.0, 1.0))
        with pytest.raises(OutOfOrderSample):
            switch.update(GazeSample(50.0, 1.0, 1.0))

    @settings(max_examples=30, deadline=None)
    @given(st.lists(
        st.tuples(st.floats(min_value=1.0, max_value=40.0),
                  st.floats(min_value=0.0, max_value=1024.0),
                  st.floats(min_value=0.0, max_value=768.0),
                  st.booleans()),
        min_size=1, max_size=120))
    def test_never_triggers_before_dwell(self, steps):
        switch = FixationSwitch(CFG, SPEC)
        t = 0.0
        episode_start = None
        for dt, x, y, valid in steps:
            t += dt
            trig = switch.update(GazeSample(t, x, y, valid))
            if trig is not None:
                assert episode_start is not None
                assert trig.t_ms - episode_start >= CFG.dwell_ms
            # shadow bookkeeping: a conservative lower bound on episode age
            if not valid:
                episode_start = None
            elif episode_start is None:
                episode_start = t

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_inter_trigger_spacing(self, seed):
        rnd = __import__("random").Random(seed)
        switch = FixationSwitch(CFG, SPEC)
        t = 0.0
        last = None
        for _ in range(600):
            t += PERIOD
            # random walk that mostly fixates
            x = 500.0 + rnd.uniform(-4, 4)
            y = 400.0 + rnd.uniform(-4, 4)
            if rnd.random() < 0.02:
                x += 200.0
            trig = switch.update(GazeSample(t, x, y))
            if trig is not None:
                if last is not None:
                    assert trig.t_ms - last >= CFG.refractory_ms
                last = trig.t_ms

    def test_scale_invariance_of_trigger_times(self):
        rnd = __import__("random").Random(7)
        base = []
        t = 0.0
        for _ in range(300):
            t += PERIOD
            base.append(GazeSample(t, 500 + rnd.uniform(-8, 8), 400 + rnd.uniform(-8, 8)))
        times_1 = [trig.t_ms for trig in run(base)]
        # double every coordinate and the cone radius (via viewing distance)
        scaled = [GazeSample(s.t_ms, 2 * s.x_px, 2 * s.y_px) for s in base]
        spec2 = ScreenSpec(1024, 768, 0.42, 2 * 650.0)
        assert visual_angle_to_pixels(1.6, spec2) == pytest.approx(
            2 * visual_angle_to_pixels(1.6, SPEC), rel=1e-9)
        times_2 = [trig.t_ms for trig in run(scaled, spec=spec2)]
        assert times_1 == times_2


REGION = Rect(700.0, 500.0, 100.0, 100.0)


def glance_stream(cue_t, reaction_ms, glance_ms, at=(750.0, 550.0)):
    """Center fixation, then an in-region episode of the given length."""
    samples = []
    t = cue_t
    while t < cue_t + reaction_ms:
        samples.append(GazeSample(t, 512.0, 384.0))
        t += 10.0
    while t < cue_t + reaction_ms + glance_ms:
        samples.append(GazeSample(t, at[0], at[1]))
        t += 10.0
    for _ in range(5):
        samples.append(GazeSample(t, 512.0, 384.0))
        t += 10.0
    return samples


class TestGlanceMetrics:
    def test_hand_traced_episode(self):
        stats = glance_metrics(glance_stream(0.0, 850.0, 400.0), REGION, [0.0])
        assert stats.mean_reaction_ms == pytest.approx(850.0)
        assert stats.mean_glance_ms == pytest.approx(400.0)

    def test_no_glance(self):
        samples = [GazeSample(t * 10.0, 512.0, 384.0) for t in range(100)]
        with pytest.raises(NoGlanceFound):
            glance_metrics(samples, REGION, [0.0])

    def test_center_fixation_zero_offsets(self):
        stats = glance_metrics(glance_stream(0.0, 850.0, 400.0, at=REGION.center),
                               REGION, [0.0])
        assert stats.mean_x_offset_px == 0.0
        assert stats.mean_y_offset_px == 0.0

    def test_offsets_are_absolute(self):
        stats = glance_metrics(glance_stream(0.0, 500.0, 300.0, at=(730.0, 570.0)),
                               REGION, [0.0])
        assert stats.mean_x_offset_px == pytest.approx(20.0)
        assert stats.mean_y_offset_px == pytest.approx(20.0)

    def test_multiple_cues_average(self):
        s1 = glance_stream(0.0, 800.0, 400.0)
        s2 = glance_stream(3000.0, 1000.0, 200.0)
        stats = glance_metrics(s1 + s2, REGION, [0.0, 3000.0])
        assert stats.mean_reaction_ms == pytest.approx(900.0)
        assert stats.mean_glance_ms == pytest.approx(300.0)
        assert isinstance(stats, GlanceStats)


def test_read_gaze_jsonl():
    lines = [
        json.dumps({"t_ms": 0, "x_px": 1.5, "y_px": 2.5, "valid": True}),
        "",
        json.dumps({"t_ms": 11, "x_px": 0, "y_px": 0, "valid": False}),
    ]
    samples = read_gaze_jsonl(lines)
    assert samples == [GazeSample(0.0, 1.5, 2.5, True), GazeSample(11.0, 0.0, 0.0, False)]
