/** Conversation state: an ordered transcript derived from pipeline events.
 *
 * Events are applied strictly in sequence order — an event arriving early is
 * buffered until its predecessors land, and one arriving twice is dropped —
 * so the transcript is identical no matter how delivery was chunked. The
 * pending indicator mirrors the server's session.pending: set by an
 * `awaiting` event, cleared by `resumed` or any terminal event.
 */

import { renderEvent, stageTitle } from "./render.js";
import type { PipelineEvent } from "./types.js";

export interface Message {
  role: "user" | "system";
  html: string;
  sequence?: number;
  stage?: string;
  title?: string;
  terminal?: boolean;
}

export interface ArtifactRecord {
  artifactId: string;
  kind: string;
  body: unknown;
}

export class ConversationView {
  readonly messages: Message[] = [];
  readonly artifacts = new Map<string, ArtifactRecord>();
  pendingQuestion: string | null = null;
  lastSequence = 0;
  private readonly buffered = new Map<number, PipelineEvent>();

  /** Optimistic echo of the human turn, before the server answers. */
  addUserTurn(text: string): void {
    this.messages.push({ role: "user", html: escapeText(text) });
  }

  addNotice(html: string): void {
    this.messages.push({ role: "system", html, stage: "notice" });
  }

  /** Apply an event, honouring sequence order; returns how many events were
   * actually appended (the given one plus any unblocked buffered ones). */
  applyEvent(event: PipelineEvent): number {
    if (event.sequence <= this.lastSequence) return 0; // duplicate
    if (event.sequence > this.lastSequence + 1) {
      this.buffered.set(event.sequence, event); // early: hold until contiguous
      return 0;
    }
    let applied = 0;
    let current: PipelineEvent | undefined = event;
    while (current) {
      this.append(current);
      applied += 1;
      this.buffered.delete(this.lastSequence);
      current = this.buffered.get(this.lastSequence + 1);
    }
    return applied;
  }

  private append(event: PipelineEvent): void {
    if (event.stage === "awaiting") {
      this.pendingQuestion = String(event.payload.question ?? "");
    } else if (event.stage === "resumed" || event.terminal) {
      this.pendingQuestion = null;
    }
    if (event.stage === "artifact") {
      const id = String(event.payload.artifact_id);
      this.artifacts.set(id, {
        artifactId: id,
        kind: String(event.payload.kind),
        body: event.payload.body,
      });
    }
    this.messages.push({
      role: "system",
      html: renderEvent(event),
      sequence: event.sequence,
      stage: event.stage,
      title: stageTitle(event),
      terminal: event.terminal,
    });
    this.lastSequence = event.sequence;
  }

  /** The most recent artifact of a kind (e.g. the active report card). */
  latestArtifact(kind: string): ArtifactRecord | null {
    let found: ArtifactRecord | null = null;
    for (const artifact of this.artifacts.values()) {
      if (artifact.kind === kind) found = artifact;
    }
    return found;
  }

  get awaitingReply(): boolean {
    return this.pendingQuestion !== null;
  }
}

function escapeText(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}
