/**
 * Honest spreadsheet tables: a uniform mixture over the 16 deterministic
 * strategies, one uniform per row, inverse CDF over left-to-right
 * cumulative weights.  The emitted CSV is byte-identical to the referee's
 * native table challenger for the same seed, so the referee cannot tell
 * this program from a library call.
 */

import { Rng } from "./rng";

export type SignRow = [number, number, number, number];

/** Strategy i of 16: (a0, a1, b0, b1) as a big-endian 4-bit counter,
 *  bit 0 mapping to -1 and bit 1 to +1. */
export function strategyRow(i: number): SignRow {
  if (!Number.isInteger(i) || i < 0 || i > 15) {
    throw new RangeError("strategy index must be in 0..15");
  }
  const bit = (k: number): number => ((i >> k) & 1) === 1 ? 1 : -1;
  return [bit(3), bit(2), bit(1), bit(0)];
}

/** Left-to-right partial sums; reimplementations must accumulate in the
 *  same order or the inverse CDF can disagree in the last ulp. */
export function cumulativeWeights(weights: number[]): number[] {
  const cum: number[] = [];
  let acc = 0;
  for (const w of weights) {
    acc += w;
    cum.push(acc);
  }
  return cum;
}

export const UNIFORM_CUM: readonly number[] =
  cumulativeWeights(new Array<number>(16).fill(1 / 16));

/** First index whose partial sum exceeds u, clamped to the last. */
export function drawIndex(cum: readonly number[], u: number): number {
  for (let k = 0; k < cum.length; k++) {
    if (u < cum[k]) return k;
  }
  return cum.length - 1;
}

export function tableRows(seed: bigint, n: number): SignRow[] {
  if (!Number.isInteger(n) || n < 1) throw new RangeError("n must be >= 1");
  const rng = new Rng(seed);
  const rows: SignRow[] = [];
  for (let i = 0; i < n; i++) {
    rows.push(strategyRow(drawIndex(UNIFORM_CUM, rng.nextFloat())));
  }
  return rows;
}

export function tableCsv(seed: bigint, n: number): string {
  const lines = ["A,Ap,B,Bp"];
  for (const row of tableRows(seed, n)) {
    lines.push(row.join(","));
  }
  return lines.join("\n") + "\n";
}

/** Single-run replay extension: observe row 0 under settings (x, y). */
export function singleRun(seed: bigint, x: number, y: number): [number, number] {
  const row = tableRows(seed, 1)[0];
  return [row[x === 0 ? 0 : 1], row[y === 0 ? 2 : 3]];
}
