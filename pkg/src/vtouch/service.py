"""Session service: cursor samples and switch events in, adaptive target
state, selections, and trial results out.

Wire format (one JSON object per message, exactly these fields):

    {"kind": ..., "session_id": ..., "t_ms": ..., "payload": {...}}

kinds from clients: "sample" {x_px, y_px, source}, "switch" {switch,
pressed} where switch is a SwitchKind value or "wheel_touch".
kinds from the service: "session", "target_state", "selection",
"trial_result", "error". The browser pointer must declare itself as the
"pointer_proxy" source; the service never upgrades it to a real device.
"""
from __future__ import annotations

import json
import random
import threading
import uuid
from collections import deque
from dataclasses import dataclass
from typing import IO, Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from .adaptation import TargetLayout, estimate_kinematics, maybe_expand
from .config import InvalidConfig, SessionConfig, session_config_from_dict
from .core import CursorSample, Source, VTouchError
from .gaze import FixationSwitch, GazeSample
from .selection import (
    Arbiter,
    DwellConfig,
    DwellTimer,
    ModeState,
    SelectionEvent,
    SwitchKind,
    update_mode,
)
from .tasks import (
    FittsCondition,
    PointingTrial,
    TrialRecord,
    generate_grid_task_incar,
    generate_ring_task,
    paper_grid,
    trial_record_to_dict,
)


class UnknownSession(VTouchError):
    def __init__(self, session_id: str):
        self.session_id = session_id
        super().__init__(f"no session {session_id!r}")


MODES = ("pointing", "incar_grid")


def _message(kind: str, session_id: str, t_ms: float, payload: dict) -> dict:
    return {"kind": kind, "session_id": session_id, "t_ms": t_ms, "payload": payload}


@dataclass(frozen=True)
class SessionHandle:
    session_id: str
    config: SessionConfig
    mode: str
    adaptive: bool


class Session:
    """One live pipeline: layout + trial lifecycle + switches + adaptation.

    Message handling is serialized by the per-session lock; export takes
    the same lock, so it sees a consistent snapshot and can run while other
    threads keep ingesting.
    """

    def __init__(self, handle: SessionHandle):
        self.handle = handle
        self.lock = threading.Lock()
        cfg = handle.config
        self._rng = random.Random(cfg.rng_seed)
        self._mode_state = ModeState()
        self._arbiter = Arbiter()
        self._fixation = FixationSwitch(cfg.gaze, cfg.screen)
        self._dwell_timers: dict[Source, DwellTimer] = {}
        self._window: deque[CursorSample] = deque(maxlen=cfg.adaptation.window_samples)
        self._last_t: Optional[float] = None
        self._last_cursor: Optional[CursorSample] = None
        self._records: list[TrialRecord] = []
        self._samples: list[CursorSample] = []
        self._trial_index = 0
        self._layout: TargetLayout = self._generate_layout()
        self._trial = PointingTrial(self._condition_for(self._layout), 0.0,
                                    handle.adaptive, Source.POINTER_PROXY)

    # -- trial plumbing ----------------------------------------------------

    def _generate_layout(self) -> TargetLayout:
        cfg = self.handle.config
        if self.handle.mode == "incar_grid":
            return generate_grid_task_incar(cfg.screen, rng=self._rng)
        cond = self._rng.choice(paper_grid())
        return generate_ring_task(cond, cfg.screen, rng=self._rng)

    def _condition_for(self, layout: TargetLayout) -> FittsCondition:
        goal = layout.goal
        d = max(goal.distance_to(*self.handle.config.screen.center), 1e-9)
        return FittsCondition(d, goal.base_width_px)

    def _dwell_timer(self, source: Source) -> DwellTimer:
        timer = self._dwell_timers.get(source)
        if timer is None:
            cfg = self.handle.config
            timer = DwellTimer(DwellConfig(cfg.dwell_ms_for(source), cfg.dwell_radius_px))
            self._dwell_timers[source] = timer
        return timer

    def target_state_message(self, t_ms: float = 0.0) -> dict:
        return _message("target_state", self.handle.session_id, t_ms, {
            "targets": [{
                "id": t.id, "x_px": t.x_px, "y_px": t.y_px,
                "base_width_px": t.base_width_px,
                "current_width_px": t.current_width_px,
                "role": t.role.value,
            } for t in self._layout.targets],
            "cue_target_id": self._layout.goal.id,
            "condition": {"D_px": self._trial.condition.D_px,
                          "W_px": self._trial.condition.W_px},
            "trial_index": self._trial_index,
            "cue_t_ms": self._trial.cue_t_ms,
        })

    # -- ingestion ---------------------------------------------------------

    def ingest(self, msg: dict) -> list[dict]:
        with self.lock:
            return self._ingest_locked(msg)

    def _ingest_locked(self, msg: dict) -> list[dict]:
        sid = self.handle.session_id
        try:
            t_ms = float(msg["t_ms"])
            kind = msg["kind"]
            payload = msg.get("payload", {})
        except (KeyError, TypeError, ValueError) as exc:
            return [_message("error", sid, 0.0,
                             {"error": "MalformedMessage", "detail": str(exc)})]
        if self._last_t is not None and t_ms < self._last_t:
            return [_message("error", sid, t_ms, {
                "error": "OutOfOrderSample",
                "detail": f"t={t_ms} after t={self._last_t}",
            })]
        self._last_t = t_ms

        try:
            if kind == "sample":
                return self._on_sample(t_ms, payload)
            if kind == "switch":
                return self._on_switch(t_ms, payload)
        except VTouchError as exc:
            return [_message("error", sid, t_ms,
                             {"error": type(exc).__name__, "detail": str(exc)})]
        return [_message("error", sid, t_ms,
                         {"error": "UnknownKind", "detail": f"kind={kind!r}"})]

    def _on_sample(self, t_ms: float, payload: dict) -> list[dict]:
        source = Source(payload.get("source", "pointer_proxy"))
        x = float(payload["x_px"])
        y = float(payload["y_px"])

        if source is Source.GAZE:
            trig = self._fixation.update(GazeSample(t_ms, x, y))
            if trig is None or self._last_cursor is None:
                return []
            event = SelectionEvent(trig.t_ms, self._last_cursor.x_px,
                                   self._last_cursor.y_px, SwitchKind.GAZE)
            return self._dispatch([event], t_ms)

        if source is Source.LASER and not self._mode_state.laser_enabled:
            return []  # gated off: the sample never existed

        sample = CursorSample(t_ms, x, y, source)
        self._samples.append(sample)
        self._last_cursor = sample
        self._trial.log_sample(sample)

        replies = []
        if self.handle.adaptive:
            self._window.append(sample)
            if len(self._window) >= 3:
                k = estimate_kinematics(list(self._window))
                new_layout = maybe_expand(self._layout, sample, k,
                                          self.handle.config.adaptation)
                if new_layout != self._layout:
                    self._layout = new_layout
                    replies.append(self.target_state_message(t_ms))

        event = self._dwell_timer(source).update(sample)
        replies.extend(self._dispatch([event] if event else [], t_ms))
        return replies

    def _on_switch(self, t_ms: float, payload: dict) -> list[dict]:
        name = payload.get("switch")
        pressed = bool(payload.get("pressed", True))
        if name == "wheel_touch":
            self._mode_state = update_mode(self._mode_state, pressed)
            return []
        if not pressed:
            return []  # selections are edge-triggered on press
        switch = SwitchKind(name)
        if self._last_cursor is not None:
            x, y = self._last_cursor.x_px, self._last_cursor.y_px
        else:
            x, y = self.handle.config.screen.center
        return self._dispatch([SelectionEvent(t_ms, x, y, switch)], t_ms)

    def _dispatch(self, events: list[SelectionEvent], t_ms: float) -> list[dict]:
        chosen = self._arbiter.arbitrate(events, self._mode_state)
        if chosen is None:
            return []
        replies = [_message("selection", self.handle.session_id, chosen.t_ms, {
            "t_ms": chosen.t_ms, "x_px": chosen.x_px, "y_px": chosen.y_px,
            "switch": chosen.switch.value,
        })]
        record = self._trial.step(chosen, self._layout)
        if record is not None:
            self._records.append(record)
            payload = trial_record_to_dict(record)
            payload.pop("trajectory")
            payload["trial_index"] = self._trial_index
            replies.append(_message("trial_result", self.handle.session_id,
                                    chosen.t_ms, payload))
            self._trial_index += 1
            self._layout = self._generate_layout()
            self._trial = PointingTrial(self._condition_for(self._layout),
                                        chosen.t_ms, self.handle.adaptive,
                                        Source.POINTER_PROXY)
            for timer in self._dwell_timers.values():
                timer.reset()
            self._window.clear()
            replies.append(self.target_state_message(chosen.t_ms))
        return replies

    # -- export ------------------------------------------------------------

    def export_log(self) -> str:
        """All raw samples then all trial records, one JSON object per
        line; read-only and stable, so repeated exports are byte-identical."""
        with self.lock:
            lines = []
            for s in self._samples:
                lines.append(json.dumps({
                    "kind": "sample", "t_ms": s.t_ms, "x_px": s.x_px,
                    "y_px": s.y_px, "source": s.source.value,
                }, sort_keys=True, separators=(",", ":")))
            for r in self._records:
                lines.append(json.dumps(trial_record_to_dict(r), sort_keys=True,
                                        separators=(",", ":")))
        return "\n".join(lines) + ("\n" if lines else "")

    @property
    def records(self) -> list[TrialRecord]:
        with self.lock:
            return list(self._records)


class SessionStore:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def create(self, config_doc: dict, mode: str = "pointing",
               adaptive: bool = False) -> Session:
        if mode not in MODES:
            raise InvalidConfig("mode", f"must be one of {MODES}, got {mode!r}")
        config = session_config_from_dict(config_doc)
        handle = SessionHandle(uuid.uuid4().hex, config, mode, bool(adaptive))
        session = Session(handle)
        with self._lock:
            self._sessions[handle.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session


def create_app(store: Optional[SessionStore] = None) -> FastAPI:
    """FastAPI app: POST /sessions, GET /sessions/{id}/log,
    WS /sessions/{id}/stream."""
    from fastapi.middleware.cors import CORSMiddleware

    store = store if store is not None else SessionStore()
    app = FastAPI(title="vtouch session service")
    app.state.store = store
    # the browser runner is served from its own origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.post("/sessions")
    def create_session(body: dict):
        try:
            session = store.create(
                body.get("config", {}),
                mode=body.get("mode", "pointing"),
                adaptive=bool(body.get("adaptive", False)),
            )
        except InvalidConfig as exc:
            return JSONResponse(status_code=400, content={
                "error": "InvalidConfig", "path": exc.path, "detail": exc.reason,
            })
        return {
            "session_id": session.handle.session_id,
            "mode": session.handle.mode,
            "adaptive": session.handle.adaptive,
            "target_state": session.target_state_message(),
        }

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str):
        try:
            session = store.get(session_id)
        except UnknownSession:
            return JSONResponse(status_code=404, content={"error": "UnknownSession"})
        return PlainTextResponse(session.export_log(),
                                 media_type="application/jsonl")

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        await websocket.accept()
        try:
            session = store.get(session_id)
        except UnknownSession:
            await websocket.send_json(_message("error", session_id, 0.0,
                                               {"error": "UnknownSession",
                                                "detail": session_id}))
            await websocket.close()
            return
        await websocket.send_json(session.target_state_message())
        try:
            while True:
                msg = await websocket.receive_json()
                for reply in session.ingest(msg):
                    await websocket.send_json(reply)
        except WebSocketDisconnect:
            return

    return app


def run_stdio(config_doc: dict, mode: str, adaptive: bool,
              in_stream: IO[str], out_stream: IO[str],
              export_path: Optional[str] = None) -> None:
    """Line-delimited fallback transport: WireMessages on stdin, replies on
    stdout, so the whole pipeline runs headless with no client built."""
    store = SessionStore()
    session = store.create(config_doc, mode=mode, adaptive=adaptive)

    def emit(obj: dict) -> None:
        out_stream.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")
        out_stream.flush()

    emit(_message("session", session.handle.session_id, 0.0, {
        "mode": mode, "adaptive": adaptive,
    }))
    emit(session.target_state_message())
    for line in in_stream:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            emit(_message("error", session.handle.session_id, 0.0,
                          {"error": "MalformedMessage", "detail": str(exc)}))
            continue
        for reply in session.ingest(msg):
            emit(reply)
    if export_path:
        with open(export_path, "w", encoding="utf-8") as fh:
            fh.write(session.export_log())
