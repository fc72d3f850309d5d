/**
 * Interactive clients for the commit/row/reveal dialogue.
 *
 * Both clients audit every reveal: the SHA-256 digest of the ASCII
 * "x,y,nonce" string must equal the hash committed before the row went
 * out.  A referee caught rigging its settings is a failed experiment,
 * not a loss, so the audit aborts the session loudly.
 */

import { createHash } from "node:crypto";
import { AuditFailure, LineChannel, Message, RefereeError } from "./channel";
import { Rng } from "./rng";
import { UNIFORM_CUM, drawIndex, strategyRow } from "./table";

export const CLIENT_TIMEOUT_MS = 120_000;

export function settingsCommitment(x: number, y: number, nonce: string): string {
  return createHash("sha256").update(`${x},${y},${nonce}`, "ascii").digest("hex");
}

function expect(message: Message, kind: string, fields: string[] = []): Message {
  if (message.type !== kind) {
    throw new RefereeError(
      `referee sent type '${message.type}' where '${kind}' was expected`);
  }
  for (const field of fields) {
    if (!(field in message)) {
      throw new RefereeError(`referee ${kind} message is missing field '${field}'`);
    }
  }
  return message;
}

function auditReveal(reveal: Message, committedHash: string, round: number): void {
  const x = reveal.x;
  const y = reveal.y;
  const nonce = reveal.nonce;
  if ((x !== 0 && x !== 1) || (y !== 0 && y !== 1) || typeof nonce !== "string") {
    throw new RefereeError(`round ${round}: malformed reveal message`);
  }
  if (settingsCommitment(x, y, nonce) !== committedHash) {
    throw new AuditFailure(
      `round ${round}: revealed settings do not match the commitment`);
  }
}

/**
 * Honest client: one uniform per round selects a deterministic strategy
 * by inverse CDF, the same stream the spreadsheet table generator uses,
 * so rounds and table rows are interchangeable.  Returns the referee's
 * result message.
 */
export async function honestInteractive(
  channel: LineChannel, seed: bigint,
): Promise<Message> {
  const rng = new Rng(seed);
  const hello = expect(await channel.recv(CLIENT_TIMEOUT_MS), "hello", ["n"]);
  const n = Number(hello.n);
  for (let i = 0; i < n; i++) {
    const commit = expect(await channel.recv(CLIENT_TIMEOUT_MS), "commit", ["hash"]);
    const row = strategyRow(drawIndex(UNIFORM_CUM, rng.nextFloat()));
    channel.send({ type: "row", a: row[0], ap: row[1], b: row[2], bp: row[3] });
    const reveal = expect(
      await channel.recv(CLIENT_TIMEOUT_MS), "reveal", ["x", "y", "nonce"]);
    auditReveal(reveal, String(commit.hash), i);
  }
  return expect(await channel.recv(CLIENT_TIMEOUT_MS), "result", ["s", "win"]);
}

/**
 * Cumulative probabilities of the outcome pairs (+,+), (+,-), (-,+) for
 * each settings cell of the canonical singlet behavior, frozen at full
 * precision from the reference implementation so the drawn distribution
 * matches it bit for bit.  Cell order is (0,0), (0,1), (1,0), (1,1).
 */
export const CANONICAL_CELL_CUM: ReadonlyArray<readonly [number, number, number]> = [
  [0.4267766952966369, 0.5, 0.573223304703363],
  [0.42677669529663687, 0.5, 0.5732233047033631],
  [0.42677669529663687, 0.5, 0.5732233047033631],
  [0.0732233047033631, 0.5, 0.9267766952966369],
];

/**
 * Detection-loophole cheat.  Each round draws a desired settings pair
 * (one word, bits 63 and 62) plus an outcome pair from the canonical
 * cell (one uniform), then reports signs only in the desired columns and
 * the no-detection symbol 0 elsewhere.  A strict referee rejects the
 * first 0; in loophole mode the coincidence statistic reproduces the
 * canonical value near 2*sqrt(2) at conditional efficiency near 1/2.
 */
export async function cheatInteractive(
  channel: LineChannel, seed: bigint,
): Promise<Message> {
  const rng = new Rng(seed);
  const hello = expect(await channel.recv(CLIENT_TIMEOUT_MS), "hello", ["n"]);
  const n = Number(hello.n);
  for (let i = 0; i < n; i++) {
    const commit = expect(await channel.recv(CLIENT_TIMEOUT_MS), "commit", ["hash"]);
    const word = rng.nextU64();
    const dx = Number(word >> 63n);
    const dy = Number((word >> 62n) & 1n);
    const u = rng.nextFloat();
    const [c1, c2, c3] = CANONICAL_CELL_CUM[2 * dx + dy];
    const code = (u >= c1 ? 1 : 0) + (u >= c2 ? 1 : 0) + (u >= c3 ? 1 : 0);
    const aStar = code < 2 ? 1 : -1;
    const bStar = code === 0 || code === 2 ? 1 : -1;
    channel.send({
      type: "row",
      a: dx === 0 ? aStar : 0,
      ap: dx === 1 ? aStar : 0,
      b: dy === 0 ? bStar : 0,
      bp: dy === 1 ? bStar : 0,
    });
    const reveal = expect(
      await channel.recv(CLIENT_TIMEOUT_MS), "reveal", ["x", "y", "nonce"]);
    auditReveal(reveal, String(commit.hash), i);
  }
  return expect(await channel.recv(CLIENT_TIMEOUT_MS), "result", ["s", "win"]);
}
