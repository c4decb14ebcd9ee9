"""Session configuration: one JSON document that pins screen geometry, the
seed, and every switch/adaptation parameter, strictly (unknown fields are
rejected with the offending path). Identical seed + config means a
bit-identical simulated session.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .adaptation import AdaptationConfig
from .core import ScreenSpec, Source, VTouchError, validate_screen_spec
from .gaze import GazeSwitchConfig
from .selection import DEFAULT_DWELL_RADIUS_PX, DWELL_MS_DEFAULTS
from .sources import ImuCalibration, LeapCalibration, ZeroSpan


class InvalidConfig(VTouchError):
    """A config document failed validation; path names the field."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


@dataclass(frozen=True)
class SessionConfig:
    screen: ScreenSpec
    rng_seed: int = 0
    dwell_radius_px: float = DEFAULT_DWELL_RADIUS_PX
    dwell_ms: Optional[dict[Source, float]] = None  # None: per-source defaults
    gaze: GazeSwitchConfig = GazeSwitchConfig()
    adaptation: AdaptationConfig = AdaptationConfig()
    imu_calibration: Optional[ImuCalibration] = None
    leap_calibration: Optional[LeapCalibration] = None

    def __post_init__(self) -> None:
        if self.dwell_ms is None:
            object.__setattr__(self, "dwell_ms", dict(DWELL_MS_DEFAULTS))

    def dwell_ms_for(self, source: Source, fallback_ms: float = 1000.0) -> float:
        return self.dwell_ms.get(source, fallback_ms)


def _check_fields(obj: dict, allowed: set[str], path: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise InvalidConfig(f"{path}.{sorted(unknown)[0]}" if path else sorted(unknown)[0],
                            "unknown field")


def _positive(value, path: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise InvalidConfig(path, f"not a number: {value!r}") from None
    if not v > 0:
        raise InvalidConfig(path, f"must be > 0, got {value!r}")
    return v


def session_config_from_dict(doc: dict) -> SessionConfig:
    if not isinstance(doc, dict):
        raise InvalidConfig("", "config must be a JSON object")
    _check_fields(doc, {"screen", "rng_seed", "dwell_radius_px", "dwell_ms",
                        "gaze", "adaptation", "imu_calibration",
                        "leap_calibration"}, "")

    screen_doc = doc.get("screen")
    if not isinstance(screen_doc, dict):
        raise InvalidConfig("screen", "required object missing")
    _check_fields(screen_doc, {"width_px", "height_px", "pixel_pitch_mm",
                               "viewing_distance_mm"}, "screen")
    try:
        screen = validate_screen_spec(ScreenSpec(
            width_px=int(screen_doc["width_px"]),
            height_px=int(screen_doc["height_px"]),
            pixel_pitch_mm=float(screen_doc["pixel_pitch_mm"]),
            viewing_distance_mm=float(screen_doc["viewing_distance_mm"]),
        ))
    except KeyError as exc:
        raise InvalidConfig(f"screen.{exc.args[0]}", "required field missing") from None
    except VTouchError as exc:
        raise InvalidConfig("screen", str(exc)) from None

    try:
        rng_seed = int(doc.get("rng_seed", 0))
    except (TypeError, ValueError):
        raise InvalidConfig("rng_seed", "must be an integer") from None

    dwell_radius = _positive(doc.get("dwell_radius_px", DEFAULT_DWELL_RADIUS_PX),
                             "dwell_radius_px")

    dwell_ms = dict(DWELL_MS_DEFAULTS)
    if "dwell_ms" in doc:
        if not isinstance(doc["dwell_ms"], dict):
            raise InvalidConfig("dwell_ms", "must be an object of source -> ms")
        for key, value in doc["dwell_ms"].items():
            try:
                source = Source(key)
            except ValueError:
                raise InvalidConfig(f"dwell_ms.{key}", "unknown source") from None
            dwell_ms[source] = _positive(value, f"dwell_ms.{key}")

    gaze = GazeSwitchConfig()
    if "gaze" in doc:
        gdoc = doc["gaze"]
        if not isinstance(gdoc, dict):
            raise InvalidConfig("gaze", "must be an object")
        _check_fields(gdoc, {"cone_full_angle_deg", "dwell_ms", "refractory_ms"}, "gaze")
        try:
            gaze = GazeSwitchConfig(
                cone_full_angle_deg=float(gdoc.get("cone_full_angle_deg", 1.6)),
                dwell_ms=float(gdoc.get("dwell_ms", 300.0)),
                refractory_ms=float(gdoc.get("refractory_ms", 500.0)),
            )
        except ValueError as exc:
            raise InvalidConfig("gaze", str(exc)) from None

    adaptation = AdaptationConfig()
    if "adaptation" in doc:
        adoc = doc["adaptation"]
        if not isinstance(adoc, dict):
            raise InvalidConfig("adaptation", "must be an object")
        _check_fields(adoc, {"expansion_factor", "speed_zero_eps_px_per_s",
                             "window_samples"}, "adaptation")
        try:
            adaptation = AdaptationConfig(
                expansion_factor=float(adoc.get("expansion_factor", 1.5)),
                speed_zero_eps_px_per_s=float(adoc.get("speed_zero_eps_px_per_s", 5.0)),
                window_samples=int(adoc.get("window_samples", 5)),
            )
        except ValueError as exc:
            raise InvalidConfig("adaptation", str(exc)) from None

    imu_cal = None
    if doc.get("imu_calibration") is not None:
        idoc = doc["imu_calibration"]
        if not isinstance(idoc, dict):
            raise InvalidConfig("imu_calibration", "must be an object")
        _check_fields(idoc, {"yaw_LL", "yaw_RL", "pitch_TL", "pitch_BL"},
                      "imu_calibration")
        try:
            imu_cal = ImuCalibration(
                yaw_LL=float(idoc["yaw_LL"]), yaw_RL=float(idoc["yaw_RL"]),
                pitch_TL=float(idoc["pitch_TL"]), pitch_BL=float(idoc["pitch_BL"]),
            )
        except KeyError as exc:
            raise InvalidConfig(f"imu_calibration.{exc.args[0]}",
                                "required field missing") from None
        except ZeroSpan as exc:
            raise InvalidConfig("imu_calibration", str(exc)) from None

    leap_cal = None
    if doc.get("leap_calibration") is not None:
        ldoc = doc["leap_calibration"]
        if not isinstance(ldoc, dict):
            raise InvalidConfig("leap_calibration", "must be an object")
        _check_fields(ldoc, {"a", "b", "c", "d", "w", "h"}, "leap_calibration")
        try:
            leap_cal = LeapCalibration(**{k: float(v) for k, v in ldoc.items()})
        except ValueError as exc:
            raise InvalidConfig("leap_calibration", str(exc)) from None

    return SessionConfig(screen=screen, rng_seed=rng_seed,
                         dwell_radius_px=dwell_radius, dwell_ms=dwell_ms,
                         gaze=gaze, adaptation=adaptation,
                         imu_calibration=imu_cal, leap_calibration=leap_cal)


def session_config_to_dict(cfg: SessionConfig) -> dict:
    doc = {
        "screen": {
            "width_px": cfg.screen.width_px,
            "height_px": cfg.screen.height_px,
            "pixel_pitch_mm": cfg.screen.pixel_pitch_mm,
            "viewing_distance_mm": cfg.screen.viewing_distance_mm,
        },
        "rng_seed": cfg.rng_seed,
        "dwell_radius_px": cfg.dwell_radius_px,
        "dwell_ms": {src.value: ms for src, ms in cfg.dwell_ms.items()},
        "gaze": {
            "cone_full_angle_deg": cfg.gaze.cone_full_angle_deg,
            "dwell_ms": cfg.gaze.dwell_ms,
            "refractory_ms": cfg.gaze.refractory_ms,
        },
        "adaptation": {
            "expansion_factor": cfg.adaptation.expansion_factor,
            "speed_zero_eps_px_per_s": cfg.adaptation.speed_zero_eps_px_per_s,
            "window_samples": cfg.adaptation.window_samples,
        },
    }
    if cfg.imu_calibration is not None:
        cal = cfg.imu_calibration
        doc["imu_calibration"] = {"yaw_LL": cal.yaw_LL, "yaw_RL": cal.yaw_RL,
                                  "pitch_TL": cal.pitch_TL, "pitch_BL": cal.pitch_BL}
    if cfg.leap_calibration is not None:
        cal = cfg.leap_calibration
        doc["leap_calibration"] = {"a": cal.a, "b": cal.b, "c": cal.c,
                                   "d": cal.d, "w": cal.w, "h": cal.h}
    return doc


def session_config_from_json(text: str) -> SessionConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig("", f"invalid JSON: {exc}") from None
    return session_config_from_dict(doc)


def session_config_to_json(cfg: SessionConfig) -> str:
    return json.dumps(session_config_to_dict(cfg), sort_keys=True, indent=2)


def default_session_config() -> SessionConfig:
    from .core import DEFAULT_SCREEN
    return SessionConfig(screen=DEFAULT_SCREEN)
