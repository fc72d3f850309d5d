/**
 * Line-delimited JSON over a pair of streams (stdio) or one TCP socket.
 *
 * The client's failure taxonomy mirrors the referee's from the other
 * side: anything wrong with the referee's messages is a RefereeError,
 * a reveal contradicting its commitment is an AuditFailure, and both
 * end the process with exit code 3.
 */

import { createInterface, Interface } from "node:readline";
import net from "node:net";
import type { Readable, Writable } from "node:stream";

export class RefereeError extends Error {}

export class AuditFailure extends Error {}

export interface Message {
  type: string;
  [key: string]: unknown;
}

type Slot = { message: Message } | { error: Error } | null;

export class LineChannel {
  private queue: Slot[] = [];
  private waiter: (() => void) | null = null;
  private sawEof = false;
  private rl: Interface;

  constructor(
    private input: Readable,
    private output: Writable,
    private socket?: net.Socket,
  ) {
    this.rl = createInterface({ input });
    this.rl.on("line", (line) => this.push(this.decode(line)));
    this.rl.on("close", () => this.push(null));
    if (socket) {
      // a reset mid-session must surface in recv, not crash the process
      socket.on("error", (err) =>
        this.push({ error: new RefereeError(`connection failed: ${err.message}`) }));
    }
  }

  private decode(line: string): Slot {
    if (line.trim() === "") {
      return { error: new RefereeError("referee sent an empty line") };
    }
    let value: unknown;
    try {
      value = JSON.parse(line);
    } catch {
      return { error: new RefereeError("referee sent a line that is not valid JSON") };
    }
    if (typeof value !== "object" || value === null || Array.isArray(value)
        || typeof (value as { type?: unknown }).type !== "string") {
      return {
        error: new RefereeError(
          "referee message must be a JSON object with a 'type' field"),
      };
    }
    return { message: value as Message };
  }

  private push(slot: Slot): void {
    this.queue.push(slot);
    if (this.waiter) {
      const wake = this.waiter;
      this.waiter = null;
      wake();
    }
  }

  send(message: Message): void {
    try {
      this.output.write(JSON.stringify(message) + "\n");
    } catch (err) {
      throw new RefereeError(`channel closed while sending: ${String(err)}`);
    }
  }

  async recv(timeoutMs: number): Promise<Message> {
    while (this.queue.length === 0) {
      if (this.sawEof) throw new RefereeError("referee closed the channel");
      await new Promise<void>((resolve, reject) => {
        const timer = setTimeout(() => {
          this.waiter = null;
          reject(new RefereeError(
            `no message from the referee within ${timeoutMs / 1000} s`));
        }, timeoutMs);
        this.waiter = () => {
          clearTimeout(timer);
          resolve();
        };
      });
    }
    const slot = this.queue.shift()!;
    if (slot === null) {
      this.sawEof = true;
      throw new RefereeError("referee closed the channel");
    }
    if ("error" in slot) throw slot.error;
    return slot.message;
  }

  close(): void {
    this.rl.close();
    if (this.socket) {
      this.socket.end();
      this.socket.destroySoon();
    } else if (typeof (this.input as Readable & { pause?: () => void }).pause
               === "function") {
      // releasing stdin is what lets the process exit naturally
      this.input.pause();
    }
  }
}

export function stdioChannel(): LineChannel {
  return new LineChannel(process.stdin, process.stdout);
}

export function connectTcp(host: string, port: number): Promise<LineChannel> {
  return new Promise((resolve, reject) => {
    const socket = net.connect({ host, port }, () => {
      socket.removeListener("error", reject);
      resolve(new LineChannel(socket, socket, socket));
    });
    socket.once("error", reject);
  });
}
