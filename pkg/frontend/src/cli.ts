#!/usr/bin/env node
/**
 * Challenger programs for the CHSH referee, speaking exactly its wire
 * formats.
 *
 *   spreadsheet --seed <u64> --n <int> [--x 0|1 --y 0|1]
 *       print a sign-table CSV on stdout; with --x/--y (requires --n 1)
 *       print the single observed "a,b" pair instead
 *   interactive --seed <u64> [--connect host:port]
 *       play the honest commit/row/reveal dialogue over stdio or TCP
 *   cheat --seed <u64> [--connect host:port]
 *       the detection-loophole cheat, for loophole-mode referees
 *
 * Exit codes: 0 completed, 2 usage error, 3 client-side failure (broken
 * channel, malformed referee message, audit mismatch).
 */

import { AuditFailure, LineChannel, RefereeError, connectTcp, stdioChannel } from "./channel";
import { cheatInteractive, honestInteractive } from "./client";
import { singleRun, tableCsv } from "./table";

const USAGE = `usage: cli.js spreadsheet --seed <u64> --n <int> [--x 0|1 --y 0|1]
       cli.js interactive --seed <u64> [--connect host:port]
       cli.js cheat --seed <u64> [--connect host:port]`;

function usageError(message: string): never {
  process.stderr.write(`error: ${message}\n${USAGE}\n`);
  process.exit(2);
}

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--")) usageError(`unexpected argument '${key}'`);
    if (i + 1 >= argv.length) usageError(`flag '${key}' needs a value`);
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function parseU64(flags: Map<string, string>, name: string): bigint {
  const raw = flags.get(name);
  if (raw === undefined) usageError(`--${name} is required`);
  if (!/^\d+$/.test(raw)) usageError(`--${name} must be a nonnegative integer`);
  const value = BigInt(raw);
  if (value >= 1n << 64n) usageError(`--${name} must fit in 64 bits`);
  return value;
}

function parseInt32(flags: Map<string, string>, name: string): number {
  const raw = flags.get(name);
  if (raw === undefined) usageError(`--${name} is required`);
  const value = Number(raw);
  if (!Number.isInteger(value)) usageError(`--${name} must be an integer`);
  return value;
}

function runSpreadsheet(flags: Map<string, string>): number {
  const seed = parseU64(flags, "seed");
  const n = parseInt32(flags, "n");
  if (n < 1) usageError("--n must be >= 1");
  if (flags.has("x") || flags.has("y")) {
    const x = parseInt32(flags, "x");
    const y = parseInt32(flags, "y");
    if ((x !== 0 && x !== 1) || (y !== 0 && y !== 1)) {
      usageError("--x and --y must be 0 or 1");
    }
    if (n !== 1) usageError("single-run replay requires --n 1");
    const [a, b] = singleRun(seed, x, y);
    process.stdout.write(`${a},${b}\n`);
    return 0;
  }
  process.stdout.write(tableCsv(seed, n));
  return 0;
}

async function openChannel(flags: Map<string, string>): Promise<LineChannel> {
  const connect = flags.get("connect");
  if (connect === undefined) return stdioChannel();
  const colon = connect.lastIndexOf(":");
  const port = Number(connect.slice(colon + 1));
  if (colon <= 0 || !Number.isInteger(port) || port < 1 || port > 65535) {
    usageError("--connect expects host:port");
  }
  return connectTcp(connect.slice(0, colon), port);
}

async function runInteractive(
  flags: Map<string, string>, cheat: boolean,
): Promise<number> {
  const seed = parseU64(flags, "seed");
  const channel = await openChannel(flags);
  try {
    const result = cheat
      ? await cheatInteractive(channel, seed)
      : await honestInteractive(channel, seed);
    process.stderr.write(
      `session complete: s = ${result.s}, win = ${result.win}\n`);
    return 0;
  } finally {
    channel.close();
  }
}

async function main(): Promise<number> {
  const argv = process.argv.slice(2);
  if (argv.length === 0) usageError("a subcommand is required");
  const [command, ...rest] = argv;
  const flags = parseFlags(rest);
  switch (command) {
    case "spreadsheet":
      return runSpreadsheet(flags);
    case "interactive":
      return runInteractive(flags, false);
    case "cheat":
      return runInteractive(flags, true);
    default:
      usageError(`unknown subcommand '${command}'`);
  }
}

main().then(
  (code) => {
    process.exitCode = code;
  },
  (err) => {
    if (err instanceof AuditFailure) {
      process.stderr.write(`audit failure: ${err.message}\n`);
    } else if (err instanceof RefereeError) {
      process.stderr.write(`referee failure: ${err.message}\n`);
    } else {
      process.stderr.write(`unexpected failure: ${String(err)}\n`);
    }
    process.exitCode = 3;
  },
);
