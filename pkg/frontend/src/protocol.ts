// Wire format of the vtouch session service: one JSON object per message,
// exactly {kind, session_id, t_ms, payload}.

export type CursorSource = "laser" | "imu" | "ir" | "gaze" | "pointer_proxy";

export type SwitchName =
  | "mechanical_left"
  | "mechanical_right"
  | "mechanical_double"
  | "thumb_tap"
  | "gaze"
  | "dwell"
  | "wheel_touch";

export interface WireMessage {
  kind: string;
  session_id: string;
  t_ms: number;
  payload: Record<string, unknown>;
}

export interface TargetState {
  id: number;
  x_px: number;
  y_px: number;
  base_width_px: number;
  current_width_px: number;
  role: "target" | "distracter";
}

export interface TargetStatePayload {
  targets: TargetState[];
  cue_target_id: number;
  condition: { D_px: number; W_px: number };
  trial_index: number;
  cue_t_ms: number;
}

export interface TrialResultPayload {
  D_px: number;
  W_px: number;
  cue_t_ms: number;
  select_t_ms: number | null;
  correct: boolean;
  selected_target_id: number | null;
  adaptive: boolean;
  wrong_hits: number;
  source: CursorSource;
  switch: string;
  trial_index: number;
}

export interface SelectionPayload {
  t_ms: number;
  x_px: number;
  y_px: number;
  switch: string;
}

export function sampleMessage(
  sessionId: string,
  tMs: number,
  xPx: number,
  yPx: number,
  source: CursorSource = "pointer_proxy",
): WireMessage {
  return {
    kind: "sample",
    session_id: sessionId,
    t_ms: tMs,
    payload: { x_px: xPx, y_px: yPx, source },
  };
}

export function switchMessage(
  sessionId: string,
  tMs: number,
  name: SwitchName,
  pressed = true,
): WireMessage {
  return {
    kind: "switch",
    session_id: sessionId,
    t_ms: tMs,
    payload: { switch: name, pressed },
  };
}

export function encodeMessage(msg: WireMessage): string {
  return JSON.stringify(msg);
}

export function decodeMessage(raw: string): WireMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch (err) {
    throw new Error(`not JSON: ${String(err)}`);
  }
  if (typeof obj !== "object" || obj === null) {
    throw new Error("wire message must be a JSON object");
  }
  const rec = obj as Record<string, unknown>;
  if (typeof rec.kind !== "string") throw new Error("missing kind");
  if (typeof rec.session_id !== "string") throw new Error("missing session_id");
  if (typeof rec.t_ms !== "number") throw new Error("missing t_ms");
  const payload = rec.payload ?? {};
  if (typeof payload !== "object" || payload === null) {
    throw new Error("payload must be an object");
  }
  return {
    kind: rec.kind,
    session_id: rec.session_id,
    t_ms: rec.t_ms,
    payload: payload as Record<string, unknown>,
  };
}
