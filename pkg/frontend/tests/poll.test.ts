import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { StatusPoller } from "../src/poll.js";
import type { Phase, RunStatus } from "../src/types.js";

function statusOf(phase: Phase): RunStatus {
  return {
    run_id: "r1",
    phase,
    iteration: 0,
    max_iterations: 1,
    annotations_used: 0,
    budget: 8,
    model_version: 0,
    error: null,
  };
}

function scriptedFetch(script: Array<Phase | "down">): typeof fetch {
  let i = 0;
  return (async () => {
    const step = script[Math.min(i, script.length - 1)];
    i += 1;
    if (step === "down") throw new TypeError("fetch failed");
    return new Response(JSON.stringify(statusOf(step as Phase)), { status: 200 });
  }) as typeof fetch;
}

describe("StatusPoller", () => {
  it("emits a phase change on every edge, including the first status", async () => {
    const edges: Array<[Phase, Phase | null]> = [];
    const api = new ApiClient(
      "http://svc",
      scriptedFetch(["awaiting_annotations", "awaiting_annotations", "training", "done"]),
    );
    const poller = new StatusPoller(api, {
      onPhaseChange: (now, prev) => edges.push([now.phase, prev?.phase ?? null]),
    });
    for (let i = 0; i < 4; i++) await poller.tick();
    expect(edges).toEqual([
      ["awaiting_annotations", null],
      ["training", "awaiting_annotations"],
      ["done", "training"],
    ]);
  });

  it("raises the banner while unreachable and clears it on recovery", async () => {
    const events: string[] = [];
    const api = new ApiClient(
      "http://svc",
      scriptedFetch(["training", "down", "down", "training"]),
    );
    const poller = new StatusPoller(api, {
      onUnreachable: () => events.push("down"),
      onReachable: () => events.push("up"),
    });
    for (let i = 0; i < 4; i++) await poller.tick();
    expect(events).toEqual(["down", "down", "up"]);
    expect(poller.lastStatus()?.phase).toBe("training");
  });

  it("keeps the last good status across an outage", async () => {
    const api = new ApiClient("http://svc", scriptedFetch(["selecting", "down"]));
    const poller = new StatusPoller(api, {});
    await poller.tick();
    await poller.tick();
    expect(poller.lastStatus()?.phase).toBe("selecting");
  });
});
