// Browser entry point: create a session over HTTP, stream pointer motion
// over the WebSocket (one coalesced sample per frame), render the adaptive
// target state, and keep the dashboard live.
//
// Selection timing is entirely the service's: the client only stamps its
// session-relative clock onto outgoing messages, and every displayed
// number comes back out of service messages. Dwell selection is computed
// server-side from the streamed samples; a mouse click is the mechanical
// switch.

import { dashboardModel, paint } from "./dashboard.js";
import { switchMessage, sampleMessage, TargetStatePayload, WireMessage } from "./protocol.js";
import { RunnerSession } from "./session.js";
import { ConnectionState, WebSocketTransport } from "./transport.js";

interface AppConfig {
  serviceUrl: string;
  mode: "pointing" | "incar_grid";
  adaptive: boolean;
}

function readConfig(): AppConfig {
  const params = new URLSearchParams(window.location.search);
  return {
    serviceUrl: params.get("service") ?? "http://127.0.0.1:8977",
    mode: params.get("mode") === "incar_grid" ? "incar_grid" : "pointing",
    adaptive: params.get("adaptive") === "1",
  };
}

async function createSession(cfg: AppConfig): Promise<{
  sessionId: string;
  firstState: WireMessage;
  screen: { width: number; height: number };
}> {
  const screen = { width: 1024, height: 768 };
  const body = {
    config: {
      screen: {
        width_px: screen.width,
        height_px: screen.height,
        pixel_pitch_mm: 0.42,
        viewing_distance_mm: 650.0,
      },
      rng_seed: Date.now() % 2 ** 31,
    },
    mode: cfg.mode,
    adaptive: cfg.adaptive,
  };
  const resp = await fetch(`${cfg.serviceUrl}/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!resp.ok) throw new Error(`session create failed: ${resp.status}`);
  const doc = await resp.json();
  return {
    sessionId: doc.session_id,
    firstState: doc.target_state as WireMessage,
    screen,
  };
}

function drawTask(
  session: RunnerSession,
  canvas: HTMLCanvasElement,
  cursor: { x: number; y: number },
  connection: ConnectionState,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#101016";
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  for (const t of session.targets) {
    const w = t.current_width_px;
    const cued = t.id === session.cueTargetId;
    ctx.fillStyle = cued ? "#ffd400" : "#2f6fb3";
    ctx.fillRect(t.x_px - w / 2, t.y_px - w / 2, w, w);
    if (t.current_width_px !== t.base_width_px) {
      ctx.strokeStyle = "#ff8c66";
      ctx.strokeRect(t.x_px - w / 2, t.y_px - w / 2, w, w);
    }
  }

  ctx.strokeStyle = "#ff5050";
  ctx.beginPath();
  ctx.arc(cursor.x, cursor.y, 4, 0, 2 * Math.PI);
  ctx.stroke();

  if (connection !== "connected") {
    ctx.fillStyle = "rgba(0, 0, 0, 0.6)";
    ctx.fillRect(0, 0, canvas.width, 40);
    ctx.fillStyle = "#ff9966";
    ctx.font = "16px monospace";
    ctx.fillText(`connection: ${connection}`, 12, 26);
  }
}

export async function startApp(): Promise<void> {
  const cfg = readConfig();
  const { sessionId, firstState, screen } = await createSession(cfg);

  const taskCanvas = document.getElementById("task") as HTMLCanvasElement;
  const dashCanvas = document.getElementById("dashboard") as HTMLCanvasElement;
  const lockToggle = document.getElementById("pointerlock") as HTMLInputElement | null;
  taskCanvas.width = screen.width;
  taskCanvas.height = screen.height;

  const session = new RunnerSession(sessionId);
  session.onMessage(firstState);

  const wsUrl = cfg.serviceUrl.replace(/^http/, "ws")
    + `/sessions/${sessionId}/stream`;
  const transport = new WebSocketTransport(wsUrl, (url) => new WebSocket(url));
  transport.onMessage((msg) => session.onMessage(msg));
  let connection: ConnectionState = "connecting";
  transport.onState((state) => {
    connection = state;
  });

  const t0 = performance.now();
  const now = () => performance.now() - t0;
  const cursor = { x: screen.width / 2, y: screen.height / 2 };
  let pendingSample: { x: number; y: number } | null = null;

  taskCanvas.addEventListener("pointermove", (ev) => {
    if (document.pointerLockElement === taskCanvas) {
      cursor.x = Math.max(0, Math.min(screen.width, cursor.x + ev.movementX));
      cursor.y = Math.max(0, Math.min(screen.height, cursor.y + ev.movementY));
    } else {
      const rect = taskCanvas.getBoundingClientRect();
      cursor.x = ((ev.clientX - rect.left) / rect.width) * screen.width;
      cursor.y = ((ev.clientY - rect.top) / rect.height) * screen.height;
    }
    pendingSample = { ...cursor };
  });
  taskCanvas.addEventListener("pointerdown", () => {
    if (lockToggle?.checked && document.pointerLockElement !== taskCanvas) {
      taskCanvas.requestPointerLock();
    }
    transport.send(switchMessage(sessionId, now(), "mechanical_left"));
  });

  const frame = () => {
    if (pendingSample) {
      transport.send(sampleMessage(sessionId, now(), pendingSample.x, pendingSample.y));
      pendingSample = null;
    }
    drawTask(session, taskCanvas, cursor, connection);
    paint(dashboardModel(session), dashCanvas);
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

declare global {
  interface Window {
    vtouchStart?: () => Promise<void>;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.vtouchStart = startApp;
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", () => void startApp());
  } else {
    void startApp();
  }
}

export type { TargetStatePayload };
