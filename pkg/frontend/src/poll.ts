/**
 * Status poller: drives auto-refresh. Emits a phase-change event whenever the
 * service reports a new phase (the queue view re-fetches on that edge, so new
 * batches appear without a manual reload) and an unreachable/reachable pair
 * for the connectivity banner.
 */

import { ApiClient } from "./api.js";
import type { RunStatus } from "./types.js";

export interface PollEvents {
  onStatus?: (status: RunStatus) => void;
  onPhaseChange?: (status: RunStatus, previous: RunStatus | null) => void;
  onUnreachable?: (error: Error) => void;
  onReachable?: () => void;
}

export class StatusPoller {
  private last: RunStatus | null = null;
  private down = false;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly events: PollEvents,
    private readonly intervalMs = 750,
  ) {}

  lastStatus(): RunStatus | null {
    return this.last;
  }

  async tick(): Promise<void> {
    let status: RunStatus;
    try {
      status = await this.api.status();
    } catch (err) {
      // keep retrying on the same cadence; the banner stays up until a
      // request succeeds again
      this.down = true;
      this.events.onUnreachable?.(err instanceof Error ? err : new Error(String(err)));
      return;
    }
    if (this.down) {
      this.down = false;
      this.events.onReachable?.();
    }
    const previous = this.last;
    this.last = status;
    this.events.onStatus?.(status);
    if (!previous || previous.phase !== status.phase) {
      this.events.onPhaseChange?.(status, previous);
    }
  }

  start(): void {
    if (this.timer) return;
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
