"""vtouch: a multimodal virtual-touch input pipeline and evaluation
workbench (cursor sources, selection switches, target-expansion adaptation,
pointing and lane-change harnesses, and a synthetic participant)."""

from .core import (
    CursorSample,
    DEFAULT_SCREEN,
    ScreenSpec,
    Source,
    validate_screen_spec,
    visual_angle_to_pixels,
)
from .config import SessionConfig, session_config_from_json, session_config_to_json

__all__ = [
    "CursorSample",
    "DEFAULT_SCREEN",
    "ScreenSpec",
    "SessionConfig",
    "Source",
    "session_config_from_json",
    "session_config_to_json",
    "validate_screen_spec",
    "visual_angle_to_pixels",
]

__version__ = "0.1.0"
