// Live metrics dashboard: ID-vs-time scatter plus a running fit readout.
// The view-model is pure; only paint() touches the canvas.

import { RunnerSession, ScatterPoint } from "./session.js";

export interface DashboardModel {
  points: ScatterPoint[];
  line: { aMs: number; bMsPerBit: number } | null;
  readout: string;
  wrongSelections: number;
}

export function dashboardModel(session: RunnerSession): DashboardModel {
  const metrics = session.metrics();
  const fit = metrics.fit;
  let readout: string;
  if (metrics.trialCount === 0) {
    readout = "no trials yet";
  } else if (!fit) {
    readout = `${metrics.trialCount} trial(s); fit needs two difficulty levels`;
  } else {
    const ip = fit.ipBitsPerS === null ? "n/a" : fit.ipBitsPerS.toFixed(3);
    readout =
      `T = ${fit.aMs.toFixed(1)} + ${fit.bMsPerBit.toFixed(1)}*ID ms | ` +
      `IP ${ip} bits/s | r2 ${fit.r2.toFixed(4)} | ` +
      `mean ${metrics.meanTimeMs?.toFixed(1)} ms | n ${fit.nTrials}`;
  }
  return {
    points: session.scatterPoints(),
    line: fit ? { aMs: fit.aMs, bMsPerBit: fit.bMsPerBit } : null,
    readout,
    wrongSelections: metrics.wrongSelections,
  };
}

const MARGIN = 36;

export function paint(model: DashboardModel, canvas: HTMLCanvasElement): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#1b1b22";
  ctx.fillRect(0, 0, width, height);

  ctx.fillStyle = "#d8d8e0";
  ctx.font = "12px monospace";
  ctx.fillText(model.readout, 8, 16);
  ctx.fillText(`wrong selections: ${model.wrongSelections}`, 8, 30);
  if (model.points.length === 0) return;

  const ids = model.points.map((p) => p.idBits);
  const times = model.points.map((p) => p.timeMs);
  const x0 = Math.min(...ids) - 0.25;
  const x1 = Math.max(...ids) + 0.25;
  const y0 = 0;
  const y1 = Math.max(...times) * 1.1;
  const sx = (v: number) => MARGIN + ((v - x0) / (x1 - x0)) * (width - 2 * MARGIN);
  const sy = (v: number) =>
    height - MARGIN - ((v - y0) / (y1 - y0)) * (height - 2 * MARGIN);

  ctx.strokeStyle = "#55556a";
  ctx.strokeRect(MARGIN, MARGIN, width - 2 * MARGIN, height - 2 * MARGIN);

  if (model.line) {
    ctx.strokeStyle = "#76c7ff";
    ctx.beginPath();
    ctx.moveTo(sx(x0), sy(model.line.aMs + model.line.bMsPerBit * x0));
    ctx.lineTo(sx(x1), sy(model.line.aMs + model.line.bMsPerBit * x1));
    ctx.stroke();
  }

  ctx.fillStyle = "#ffd166";
  for (const p of model.points) {
    ctx.beginPath();
    ctx.arc(sx(p.idBits), sy(p.timeMs), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}
