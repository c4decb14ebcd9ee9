// Runner-side session state: a pure reducer over received wire messages.
// The UI holds no authoritative state; everything rendered here is replayed
// from the service's messages, so a refresh plus an export replay rebuilds
// the identical dashboard.

import {
  CompletedTrial,
  FittsFit,
  fitFitts,
  fittsId,
  meanTimeMs,
} from "./fitts.js";
import {
  SelectionPayload,
  TargetState,
  TargetStatePayload,
  TrialResultPayload,
  WireMessage,
} from "./protocol.js";

export interface LiveMetrics {
  trialCount: number;
  meanTimeMs: number | null;
  fit: FittsFit | null;
  wrongSelections: number;
}

export interface ScatterPoint {
  idBits: number;
  timeMs: number;
}

export class RunnerSession {
  readonly sessionId: string;
  targets: TargetState[] = [];
  cueTargetId: number | null = null;
  trialIndex = 0;
  cueTMs = 0;
  results: TrialResultPayload[] = [];
  selections: SelectionPayload[] = [];
  lastError: string | null = null;

  constructor(sessionId: string) {
    this.sessionId = sessionId;
  }

  /** Rendered widths always equal the last target_state received. */
  onMessage(msg: WireMessage): void {
    switch (msg.kind) {
      case "target_state": {
        const p = msg.payload as unknown as TargetStatePayload;
        this.targets = p.targets;
        this.cueTargetId = p.cue_target_id;
        this.trialIndex = p.trial_index;
        this.cueTMs = p.cue_t_ms;
        break;
      }
      case "trial_result": {
        this.results.push(msg.payload as unknown as TrialResultPayload);
        break;
      }
      case "selection": {
        this.selections.push(msg.payload as unknown as SelectionPayload);
        break;
      }
      case "error": {
        this.lastError = String(msg.payload.error ?? "unknown");
        break;
      }
      default:
        break;
    }
  }

  cueTarget(): TargetState | null {
    return this.targets.find((t) => t.id === this.cueTargetId) ?? null;
  }

  completedTrials(): CompletedTrial[] {
    return this.results
      .filter((r) => r.correct && r.select_t_ms !== null)
      .map((r) => ({
        dPx: r.D_px,
        wPx: r.W_px,
        selectionTimeMs: (r.select_t_ms as number) - r.cue_t_ms,
      }));
  }

  scatterPoints(): ScatterPoint[] {
    return this.completedTrials().map((t) => ({
      idBits: fittsId(t.dPx, t.wPx),
      timeMs: t.selectionTimeMs,
    }));
  }

  metrics(): LiveMetrics {
    const done = this.completedTrials();
    return {
      trialCount: this.results.length,
      meanTimeMs: meanTimeMs(done),
      fit: fitFitts(done),
      wrongSelections: this.results.reduce((s, r) => s + r.wrong_hits, 0),
    };
  }
}
