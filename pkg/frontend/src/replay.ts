// Scripted pointer replay: drives a session the way a human would, one
// coalesced sample per frame, aiming at each cued target and clicking.
// Deterministic, so replaying against the same session config reproduces
// the identical trial_result sequence.

import { RunnerSession } from "./session.js";
import { Transport } from "./transport.js";
import { sampleMessage, switchMessage } from "./protocol.js";

export interface ReplayOptions {
  trials: number;
  frameMs?: number;       // display refresh cadence
  moveMs?: number;        // per-reach movement time
  clickDelayMs?: number;  // settle time before the click
  startX?: number;
  startY?: number;
}

function minJerk(x0: number, x1: number, tau: number): number {
  const s = 10 * tau ** 3 - 15 * tau ** 4 + 6 * tau ** 5;
  return x0 + (x1 - x0) * s;
}

/** Play `trials` pointing trials through the live pipeline; resolves when
 *  the last trial_result has arrived. */
export async function replayPointer(
  transport: Transport,
  session: RunnerSession,
  opts: ReplayOptions,
): Promise<void> {
  const frameMs = opts.frameMs ?? 1000 / 60;
  const moveMs = opts.moveMs ?? 600;
  const clickDelayMs = opts.clickDelayMs ?? 50;

  let clock = 0;
  let x = opts.startX ?? 512;
  let y = opts.startY ?? 384;

  // the session must be wired to the transport before the replay starts;
  // this hook only wakes the waiter after the session has seen the message
  const trialAdvanced = makeWaiter(transport, session);

  for (let i = 0; i < opts.trials; i++) {
    const goal = session.cueTarget();
    if (!goal) throw new Error(`trial ${i}: no cued target in session state`);
    const fromX = x;
    const fromY = y;
    const frames = Math.ceil(moveMs / frameMs);
    for (let k = 1; k <= frames; k++) {
      const tau = Math.min((k * frameMs) / moveMs, 1);
      clock += frameMs;
      x = minJerk(fromX, goal.x_px, tau);
      y = minJerk(fromY, goal.y_px, tau);
      transport.send(sampleMessage(session.sessionId, clock, x, y));
    }
    clock += clickDelayMs;
    transport.send(switchMessage(session.sessionId, clock, "mechanical_left"));
    // the service answers selection, trial_result, then the next trial's
    // target_state; wait for the last so the next reach aims fresh
    await trialAdvanced(i + 1);
  }
}

function makeWaiter(transport: Transport, session: RunnerSession) {
  let notify: (() => void) | null = null;
  transport.onMessage(() => {
    notify?.();
  });
  return (trialIndex: number) =>
    new Promise<void>((resolve, reject) => {
      const deadline = setTimeout(
        () => reject(new Error(`timed out waiting for trial ${trialIndex}`)),
        10_000,
      );
      const check = () => {
        if (session.trialIndex >= trialIndex
            && session.results.length >= trialIndex) {
          clearTimeout(deadline);
          notify = null;
          resolve();
        }
      };
      notify = check;
      check();
    });
}
