/** Server-sent-events subscriber with gapless reconnect-and-resume.
 *
 * The service streams a session's event log as SSE frames whose `id:` field
 * is the event sequence number, then closes. Following a session live is
 * therefore: read a replay, remember the last sequence seen, re-subscribe
 * with `?after=<last>`. Because sequences are gapless on the server, a
 * client that always resumes from `lastSeen` can neither miss nor duplicate
 * an event, no matter where the connection dropped.
 */

import type { PipelineEvent } from "./types.js";

export interface StreamOptions {
  /** Resume point: only events with sequence > after are delivered. */
  after?: number;
  fetchImpl?: typeof fetch;
  /** Pause between re-subscriptions when following live. */
  pollDelayMs?: number;
  /** Pause before retrying after a dropped connection. */
  retryDelayMs?: number;
}

interface SseFrame {
  id?: string;
  event?: string;
  data: string;
}

/** Parse complete `\n\n`-terminated frames off the front of a buffer. */
export function drainFrames(buffer: string): {
  frames: SseFrame[];
  rest: string;
} {
  const normalized = buffer.replace(/\r\n/g, "\n");
  const parts = normalized.split("\n\n");
  const rest = parts.pop() ?? "";
  const frames: SseFrame[] = [];
  for (const part of parts) {
    if (!part.trim()) continue;
    const frame: SseFrame = { data: "" };
    const dataLines: string[] = [];
    for (const line of part.split("\n")) {
      if (line.startsWith("id:")) frame.id = line.slice(3).trim();
      else if (line.startsWith("event:")) frame.event = line.slice(6).trim();
      else if (line.startsWith("data:")) dataLines.push(line.slice(5).trim());
    }
    frame.data = dataLines.join("\n");
    frames.push(frame);
  }
  return { frames, rest };
}

export class EventStream {
  lastSeen: number;
  private stopped = false;
  private controller: AbortController | null = null;
  private readonly fetchImpl: typeof fetch;
  private readonly pollDelayMs: number;
  private readonly retryDelayMs: number;

  constructor(
    readonly baseUrl: string,
    readonly sessionId: string,
    readonly onEvent: (event: PipelineEvent) => void,
    options: StreamOptions = {},
  ) {
    this.lastSeen = options.after ?? 0;
    this.fetchImpl = options.fetchImpl ?? fetch;
    this.pollDelayMs = options.pollDelayMs ?? 400;
    this.retryDelayMs = options.retryDelayMs ?? 250;
  }

  /** Read one replay starting after `lastSeen`; returns events delivered.
   *
   * Frames at or below `lastSeen` are dropped (duplicates), and delivery is
   * strictly sequential: a frame that would skip ahead aborts the read so
   * the next subscription can fill the hole. Server sequences are gapless,
   * so in practice this only fires on a malformed proxy.
   */
  async readOnce(): Promise<number> {
    this.controller = new AbortController();
    const url = `${this.baseUrl}/sessions/${this.sessionId}/events/stream?after=${this.lastSeen}`;
    const response = await this.fetchImpl(url, {
      signal: this.controller.signal,
      headers: { accept: "text/event-stream" },
    });
    if (!response.ok || !response.body) {
      throw new Error(`stream request failed: ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    let delivered = 0;
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        const { frames, rest } = drainFrames(buffer);
        buffer = rest;
        for (const frame of frames) {
          const sequence = Number(frame.id);
          if (!Number.isFinite(sequence) || sequence <= this.lastSeen) {
            continue; // duplicate or keep-alive
          }
          if (sequence !== this.lastSeen + 1) {
            await reader.cancel();
            return delivered; // out of order: resume will refetch the gap
          }
          this.onEvent(JSON.parse(frame.data) as PipelineEvent);
          this.lastSeen = sequence;
          delivered += 1;
          if (this.stopped) {
            await reader.cancel();
            return delivered;
          }
        }
      }
    } finally {
      this.controller = null;
    }
    return delivered;
  }

  /** Follow the session until stop(): replay, pause, re-subscribe. */
  async run(): Promise<void> {
    while (!this.stopped) {
      try {
        await this.readOnce();
        if (this.stopped) return;
        await sleep(this.pollDelayMs);
      } catch (err) {
        if (this.stopped || isAbort(err)) return;
        await sleep(this.retryDelayMs); // connection loss: resume from lastSeen
      }
    }
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}
