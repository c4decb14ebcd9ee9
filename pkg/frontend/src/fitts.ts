// Fitts'-law analytics mirroring the service's own analyzer: the dashboard
// must reproduce what `vtouch analyze` reports for the exported log.

export interface CompletedTrial {
  dPx: number;
  wPx: number;
  selectionTimeMs: number;
}

export interface FittsFit {
  aMs: number;
  bMsPerBit: number;
  r2: number;
  ipBitsPerS: number | null;
  nTrials: number;
}

export function fittsId(dPx: number, wPx: number): number {
  return Math.log2((2 * dPx) / wPx);
}

/** Ordinary least squares of per-difficulty mean time against difficulty.
 *  Returns null while fewer than two distinct difficulty values exist. */
export function fitFitts(trials: CompletedTrial[]): FittsFit | null {
  const byId = new Map<number, number[]>();
  for (const t of trials) {
    const id = fittsId(t.dPx, t.wPx);
    const bucket = byId.get(id);
    if (bucket) bucket.push(t.selectionTimeMs);
    else byId.set(id, [t.selectionTimeMs]);
  }
  if (byId.size < 2) return null;

  const xs = [...byId.keys()].sort((a, b) => a - b);
  const ys = xs.map((x) => {
    const bucket = byId.get(x)!;
    return bucket.reduce((s, v) => s + v, 0) / bucket.length;
  });
  const n = xs.length;
  const mx = xs.reduce((s, v) => s + v, 0) / n;
  const my = ys.reduce((s, v) => s + v, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (xs[i]! - mx) ** 2;
    sxy += (xs[i]! - mx) * (ys[i]! - my);
  }
  const b = sxy / sxx;
  const a = my - b * mx;
  let ssRes = 0;
  let ssTot = 0;
  for (let i = 0; i < n; i++) {
    ssRes += (ys[i]! - (a + b * xs[i]!)) ** 2;
    ssTot += (ys[i]! - my) ** 2;
  }
  const r2 = ssTot === 0 ? 1 : 1 - ssRes / ssTot;
  return {
    aMs: a,
    bMsPerBit: b,
    r2,
    ipBitsPerS: b > 0 ? 1000 / b : null,
    nTrials: trials.length,
  };
}

export function meanTimeMs(trials: CompletedTrial[]): number | null {
  if (trials.length === 0) return null;
  return trials.reduce((s, t) => s + t.selectionTimeMs, 0) / trials.length;
}
