import io
import json
import math
import threading

import pytest
from fastapi.testclient import TestClient

from vtouch.config import InvalidConfig, default_session_config, session_config_to_dict
from vtouch.service import SessionStore, UnknownSession, create_app, run_stdio
from vtouch.synthetic import min_jerk_position


def config_doc():
    return session_config_to_dict(default_session_config())


def sample(sid, t, x, y, source="pointer_proxy"):
    return {"kind": "sample", "session_id": sid, "t_ms": t,
            "payload": {"x_px": x, "y_px": y, "source": source}}


def switch(sid, t, name, pressed=True):
    return {"kind": "switch", "session_id": sid, "t_ms": t,
            "payload": {"switch": name, "pressed": pressed}}


def decelerating_approach(sid, goal, n=60, total_ms=600.0, start=(512.0, 384.0)):
    msgs = []
    for k in range(n + 1):
        t = k * total_ms / n
        x = min_jerk_position(start[0], goal["x_px"], total_ms, t)
        y = min_jerk_position(start[1], goal["y_px"], total_ms, t)
        msgs.append(sample(sid, t, x, y))
    return msgs


def goal_of(target_state):
    return next(t for t in target_state["payload"]["targets"] if t["role"] == "target")


class TestSessionStore:
    def test_distinct_ids(self):
        store = SessionStore()
        a = store.create(config_doc())
        b = store.create(config_doc())
        assert a.handle.session_id != b.handle.session_id

    def test_invalid_config_path(self):
        store = SessionStore()
        doc = config_doc()
        doc["dwell_ms"]["ir"] = 0
        with pytest.raises(InvalidConfig) as exc:
            store.create(doc)
        assert exc.value.path == "dwell_ms.ir"

    def test_unknown_session(self):
        with pytest.raises(UnknownSession):
            SessionStore().get("nope")

    def test_invalid_mode(self):
        with pytest.raises(InvalidConfig):
            SessionStore().create(config_doc(), mode="flying")


class TestIngest:
    def test_stationary_dwell_fires_at_boundary(self):
        store = SessionStore()
        s = store.create(config_doc())
        sid = s.handle.session_id
        replies = []
        for k in range(0, 1101, 10):
            replies += s.ingest(sample(sid, float(k), 100.0, 100.0))
        selections = [r for r in replies if r["kind"] == "selection"]
        assert len(selections) == 1
        assert selections[0]["t_ms"] == 1000.0  # pointer dwell default 1 s

    def test_decelerating_approach_expands_target(self):
        store = SessionStore()
        s = store.create(config_doc(), mode="incar_grid", adaptive=True)
        sid = s.handle.session_id
        goal = goal_of(s.target_state_message())
        replies = []
        for msg in decelerating_approach(sid, goal):
            replies += s.ingest(msg)
        states = [r for r in replies if r["kind"] == "target_state"]
        assert states
        widths = {t["id"]: t["current_width_px"] for t in states[-1]["payload"]["targets"]}
        assert widths[goal["id"]] == 1.5 * goal["base_width_px"]
        assert sum(1 for w in widths.values() if w != goal["base_width_px"]) == 1

    def test_non_adaptive_never_expands(self):
        store = SessionStore()
        s = store.create(config_doc(), mode="incar_grid", adaptive=False)
        sid = s.handle.session_id
        goal = goal_of(s.target_state_message())
        replies = []
        for msg in decelerating_approach(sid, goal):
            replies += s.ingest(msg)
        assert [r for r in replies if r["kind"] == "target_state"] == []

    def test_out_of_order_sample(self):
        store = SessionStore()
        s = store.create(config_doc())
        sid = s.handle.session_id
        s.ingest(sample(sid, 100.0, 1.0, 1.0))
        replies = s.ingest(sample(sid, 50.0, 1.0, 1.0))
        assert replies[0]["kind"] == "error"
        assert replies[0]["payload"]["error"] == "OutOfOrderSample"

    def test_trial_completion_cycle(self):
        store = SessionStore()
        s = store.create(config_doc(), mode="incar_grid")
        sid = s.handle.session_id
        goal = goal_of(s.target_state_message())
        for msg in decelerating_approach(sid, goal):
            s.ingest(msg)
        replies = s.ingest(switch(sid, 650.0, "mechanical_left"))
        kinds = [r["kind"] for r in replies]
        assert kinds == ["selection", "trial_result", "target_state"]
        result = replies[1]["payload"]
        assert result["correct"] is True
        assert result["select_t_ms"] == 650.0
        assert replies[2]["payload"]["trial_index"] == 1

    def test_laser_gating_discards_samples_and_selections(self):
        store = SessionStore()
        s = store.create(config_doc(), mode="incar_grid")
        sid = s.handle.session_id
        goal = goal_of(s.target_state_message())
        s.ingest(switch(sid, 0.0, "wheel_touch", pressed=True))
        replies = []
        for msg in decelerating_approach(sid, goal):
            msg["payload"]["source"] = "laser"
            replies += s.ingest(msg)
        replies += s.ingest(switch(sid, 700.0, "mechanical_left"))
        assert [r for r in replies if r["kind"] == "selection"] == []
        assert s.export_log() == ""  # gated laser samples never existed
        # hand off the wheel: selections work again
        s.ingest(switch(sid, 710.0, "wheel_touch", pressed=False))
        for msg in decelerating_approach(sid, goal):
            msg["t_ms"] += 720.0
            msg["payload"]["source"] = "laser"
            replies += s.ingest(msg)
        replies += s.ingest(switch(sid, 1400.0, "mechanical_left"))
        assert [r for r in replies if r["kind"] == "selection"]

    def test_gaze_samples_trigger_selection_at_cursor(self):
        store = SessionStore()
        s = store.create(config_doc(), mode="incar_grid")
        sid = s.handle.session_id
        goal = goal_of(s.target_state_message())
        for msg in decelerating_approach(sid, goal):
            s.ingest(msg)
        replies = []
        t = 600.0
        while not replies:
            t += 1000.0 / 90.0
            replies += s.ingest(sample(sid, t, goal["x_px"], goal["y_px"], "gaze"))
        assert replies[0]["kind"] == "selection"
        assert replies[0]["payload"]["switch"] == "gaze"
        # position is the cursor's last position, not the gaze point
        assert replies[0]["payload"]["x_px"] == pytest.approx(goal["x_px"], abs=1e-6)


class TestExport:
    def _run_block(self, adaptive=False):
        store = SessionStore()
        s = store.create(config_doc(), mode="incar_grid", adaptive=adaptive)
        sid = s.handle.session_id
        t0 = 0.0
        for _ in range(6):
            goal = goal_of(s.target_state_message())
            for msg in decelerating_approach(sid, goal):
                msg["t_ms"] += t0
                s.ingest(msg)
            s.ingest(switch(sid, t0 + 650.0, "mechanical_left"))
            t0 += 1000.0
        return s

    def test_line_count_is_samples_plus_records(self):
        s = self._run_block()
        lines = [l for l in s.export_log().splitlines() if l]
        kinds = [json.loads(l)["kind"] for l in lines]
        assert kinds.count("sample") + kinds.count("trial_result") == len(lines)
        assert kinds.count("trial_result") == 6
        assert kinds.count("sample") == 6 * 61

    def test_export_byte_identical(self):
        s = self._run_block()
        assert s.export_log() == s.export_log()

    def test_analyze_round_trip_matches_live_fit(self):
        import random

        from vtouch.cli import analyze_records
        from vtouch.config import session_config_to_dict
        from vtouch.service import SessionStore
        from vtouch.tasks import fit_fitts, read_trials_jsonl

        store = SessionStore()
        doc = config_doc()
        doc["rng_seed"] = 77
        s = store.create(doc, mode="pointing")
        sid = s.handle.session_id
        rnd = random.Random(1)
        t0 = 0.0
        for _ in range(12):
            goal = goal_of(s.target_state_message())
            mt = 400.0 + rnd.uniform(0, 400.0)
            for msg in decelerating_approach(sid, goal, total_ms=mt):
                msg["t_ms"] += t0
                s.ingest(msg)
            s.ingest(switch(sid, t0 + mt + 10.0, "mechanical_left"))
            t0 += mt + 500.0
        live_fit = fit_fitts(s.records)
        exported = read_trials_jsonl(s.export_log().splitlines())
        export_fit = fit_fitts(exported)
        assert export_fit.a_ms == pytest.approx(live_fit.a_ms, abs=1e-6)
        assert export_fit.b_ms_per_bit == pytest.approx(live_fit.b_ms_per_bit, abs=1e-6)
        analyze_records(exported)  # the CLI path accepts the same records


class TestIsolation:
    def test_interleaved_sessions_match_solo_runs(self):
        def run(session, offset=0.0):
            sid = session.handle.session_id
            out = []
            goal = goal_of(session.target_state_message())
            for msg in decelerating_approach(sid, goal):
                msg["t_ms"] += offset
                out += session.ingest(msg)
            out += session.ingest(switch(sid, offset + 650.0, "mechanical_left"))
            return out

        solo_store = SessionStore()
        doc = config_doc()
        doc["rng_seed"] = 5
        solo_a = run(solo_store.create(doc, mode="incar_grid"))
        solo_b = run(solo_store.create(doc, mode="incar_grid", adaptive=True))

        store = SessionStore()
        a = store.create(doc, mode="incar_grid")
        b = store.create(doc, mode="incar_grid", adaptive=True)
        inter_a, inter_b = [], []
        goal_a = goal_of(a.target_state_message())
        goal_b = goal_of(b.target_state_message())
        msgs_a = decelerating_approach(a.handle.session_id, goal_a)
        msgs_b = decelerating_approach(b.handle.session_id, goal_b)
        for ma, mb in zip(msgs_a, msgs_b):
            inter_a += a.ingest(ma)
            inter_b += b.ingest(mb)
        inter_a += a.ingest(switch(a.handle.session_id, 650.0, "mechanical_left"))
        inter_b += b.ingest(switch(b.handle.session_id, 650.0, "mechanical_left"))

        def strip_ids(replies):
            out = []
            for r in replies:
                r = dict(r)
                r.pop("session_id")
                out.append(r)
            return out

        assert strip_ids(inter_a) == strip_ids(solo_a)
        assert strip_ids(inter_b) == strip_ids(solo_b)

    def test_concurrent_ingest_export(self):
        store = SessionStore()
        s = store.create(config_doc(), mode="incar_grid")
        sid = s.handle.session_id
        errors = []

        def pump():
            try:
                for k in range(300):
                    s.ingest(sample(sid, float(k * 10), 100.0, 100.0))
            except Exception as exc:  # noqa: BLE001
                errors.append(exc)

        thread = threading.Thread(target=pump)
        thread.start()
        for _ in range(50):
            text = s.export_log()
            for line in text.splitlines():
                json.loads(line)  # every snapshot is well-formed
        thread.join()
        assert not errors


class TestHttpApi:
    def test_create_and_log(self):
        client = TestClient(create_app())
        resp = client.post("/sessions", json={"config": config_doc(),
                                              "mode": "incar_grid"})
        assert resp.status_code == 200
        body = resp.json()
        sid = body["session_id"]
        assert body["target_state"]["payload"]["targets"]
        log = client.get(f"/sessions/{sid}/log")
        assert log.status_code == 200
        assert log.text == ""

    def test_invalid_config_400(self):
        client = TestClient(create_app())
        doc = config_doc()
        doc["dwell_ms"] = {"ir": 0}
        resp = client.post("/sessions", json={"config": doc})
        assert resp.status_code == 400
        assert resp.json()["path"] == "dwell_ms.ir"

    def test_unknown_session_404(self):
        client = TestClient(create_app())
        assert client.get("/sessions/zzz/log").status_code == 404

    def test_websocket_stream(self):
        client = TestClient(create_app())
        resp = client.post("/sessions", json={"config": config_doc(),
                                              "mode": "incar_grid"})
        sid = resp.json()["session_id"]
        with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            first = ws.receive_json()
            assert first["kind"] == "target_state"
            goal = goal_of(first)
            for msg in decelerating_approach(sid, goal):
                ws.send_json(msg)
            ws.send_json(switch(sid, 650.0, "mechanical_left"))
            kinds = []
            while "trial_result" not in kinds:
                kinds.append(ws.receive_json()["kind"])
            assert "selection" in kinds
        log = client.get(f"/sessions/{sid}/log").text
        assert sum(1 for l in log.splitlines()
                   if json.loads(l)["kind"] == "trial_result") == 1

    def test_websocket_unknown_session(self):
        client = TestClient(create_app())
        with client.websocket_connect("/sessions/ghost/stream") as ws:
            msg = ws.receive_json()
            assert msg["payload"]["error"] == "UnknownSession"


class TestStdio:
    def test_round_trip(self, tmp_path):
        store = SessionStore()
        probe = store.create(config_doc(), mode="incar_grid")
        goal = goal_of(probe.target_state_message())

        lines = [json.dumps(m) for m in
                 decelerating_approach("s", goal)]
        lines.append(json.dumps(switch("s", 650.0, "mechanical_left")))
        out = io.StringIO()
        export = tmp_path / "log.jsonl"
        run_stdio(config_doc(), "incar_grid", False,
                  io.StringIO("\n".join(lines) + "\n"), out, str(export))
        replies = [json.loads(l) for l in out.getvalue().splitlines()]
        kinds = [r["kind"] for r in replies]
        assert kinds[0] == "session"
        assert kinds[1] == "target_state"
        assert "trial_result" in kinds
        assert export.exists()
        exported = [json.loads(l) for l in export.read_text().splitlines()]
        assert sum(1 for e in exported if e["kind"] == "trial_result") == 1
