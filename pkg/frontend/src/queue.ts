/**
 * Review-queue state machine. Cards mirror GET /candidates; submissions are
 * deduplicated client-side (one in-flight POST per request_id) on top of the
 * service's exactly-once contract, so double-clicks and retries never store
 * a second annotation.
 */

import { ApiClient, ConflictError } from "./api.js";
import type { CandidateCard } from "./types.js";

export type SubmitOutcome =
  | { kind: "accepted"; remaining: number }
  | { kind: "conflict"; detail: string }
  | { kind: "duplicate" }; // a submit for this card is already in flight

export class ReviewQueue {
  private cards: CandidateCard[] = [];
  private inFlight = new Map<string, Promise<SubmitOutcome>>();
  private answered = new Set<string>();

  constructor(private readonly api: ApiClient) {}

  pending(): CandidateCard[] {
    return this.cards.filter((c) => !this.answered.has(c.request_id));
  }

  current(): CandidateCard | undefined {
    return this.pending()[0];
  }

  async refresh(): Promise<CandidateCard[]> {
    this.cards = await this.api.candidates();
    // the service no longer lists answered ids; drop stale local marks
    const listed = new Set(this.cards.map((c) => c.request_id));
    for (const id of this.answered) {
      if (!listed.has(id)) this.answered.delete(id);
    }
    return this.pending();
  }

  /**
   * Label a card. Repeated calls for the same request_id while the first
   * POST is outstanding share that POST; a 409 marks the card answered
   * (someone else got there first) and is reported as a benign conflict.
   */
  submit(requestId: string, label: boolean): Promise<SubmitOutcome> {
    const existing = this.inFlight.get(requestId);
    if (existing) return Promise.resolve({ kind: "duplicate" });
    if (this.answered.has(requestId)) {
      return Promise.resolve({ kind: "duplicate" });
    }
    const attempt: Promise<SubmitOutcome> = (async () => {
      try {
        const result = await this.api.submit(requestId, label);
        this.answered.add(requestId);
        return { kind: "accepted", remaining: result.remaining } as const;
      } catch (err) {
        if (err instanceof ConflictError) {
          this.answered.add(requestId);
          return { kind: "conflict", detail: err.message } as const;
        }
        throw err; // network/service failure: card stays, caller may retry
      } finally {
        this.inFlight.delete(requestId);
      }
    })();
    this.inFlight.set(requestId, attempt);
    return attempt;
  }

  /** Label the card at the head of the queue (keyboard-shortcut path). */
  submitCurrent(label: boolean): Promise<SubmitOutcome> {
    const card = this.current();
    if (!card) return Promise.resolve({ kind: "duplicate" });
    return this.submit(card.request_id, label);
  }
}

/** Keyboard mapping for the queue view. */
export function shortcutAction(
  key: string,
): { label: boolean } | { skip: true } | null {
  switch (key) {
    case "y":
    case "1":
      return { label: true };
    case "n":
    case "0":
      return { label: false };
    case "j":
    case "ArrowDown":
      return { skip: true };
    default:
      return null;
  }
}
