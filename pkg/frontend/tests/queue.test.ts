import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ReviewQueue, shortcutAction } from "../src/queue.js";
import type { CandidateCard } from "../src/types.js";

function card(id: string, position: number): CandidateCard {
  return {
    request_id: id,
    text: `text ${id}`,
    category: "coffee",
    purpose: "coldstart",
    position,
  };
}

/** Service stand-in with exactly-once submission semantics. */
function fakeService(initial: CandidateCard[]) {
  let pending = [...initial];
  const answered = new Map<string, boolean>();
  const posts: string[] = [];

  const impl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    if (url.endsWith("/candidates")) {
      return new Response(JSON.stringify({ candidates: pending }), { status: 200 });
    }
    if (url.endsWith("/annotations")) {
      const body = JSON.parse(String(init?.body)) as { request_id: string; label: boolean };
      posts.push(body.request_id);
      if (answered.has(body.request_id)) {
        return new Response(
          JSON.stringify({ detail: `request '${body.request_id}' was already answered` }),
          { status: 409 },
        );
      }
      if (!pending.some((c) => c.request_id === body.request_id)) {
        return new Response(JSON.stringify({ detail: "unknown request" }), { status: 409 });
      }
      answered.set(body.request_id, body.label);
      pending = pending.filter((c) => c.request_id !== body.request_id);
      return new Response(
        JSON.stringify({ accepted: true, remaining: pending.length }),
        { status: 200 },
      );
    }
    throw new Error(`unexpected url ${url}`);
  }) as typeof fetch;

  return { fetch: impl, posts, answered };
}

describe("ReviewQueue", () => {
  it("mirrors the candidates endpoint in order", async () => {
    const service = fakeService([card("a", 0), card("b", 1)]);
    const queue = new ReviewQueue(new ApiClient("http://svc", service.fetch));
    const cards = await queue.refresh();
    expect(cards.map((c) => c.request_id)).toEqual(["a", "b"]);
    expect(queue.current()?.request_id).toBe("a");
  });

  it("accepted submission removes the card locally", async () => {
    const service = fakeService([card("a", 0), card("b", 1)]);
    const queue = new ReviewQueue(new ApiClient("http://svc", service.fetch));
    await queue.refresh();
    const outcome = await queue.submit("a", true);
    expect(outcome).toEqual({ kind: "accepted", remaining: 1 });
    expect(queue.pending().map((c) => c.request_id)).toEqual(["b"]);
  });

  it("double-click shares one POST and stores one annotation", async () => {
    const service = fakeService([card("a", 0)]);
    const queue = new ReviewQueue(new ApiClient("http://svc", service.fetch));
    await queue.refresh();
    const [first, second] = await Promise.all([
      queue.submit("a", true),
      queue.submit("a", true),
    ]);
    const kinds = [first.kind, second.kind].sort();
    expect(kinds).toEqual(["accepted", "duplicate"]);
    expect(service.posts).toEqual(["a"]);
    expect(service.answered.get("a")).toBe(true);
  });

  it("re-submitting an already answered card is a local no-op", async () => {
    const service = fakeService([card("a", 0)]);
    const queue = new ReviewQueue(new ApiClient("http://svc", service.fetch));
    await queue.refresh();
    await queue.submit("a", false);
    const again = await queue.submit("a", true);
    expect(again.kind).toBe("duplicate");
    expect(service.posts).toEqual(["a"]);
    expect(service.answered.get("a")).toBe(false); // first answer won
  });

  it("a 409 from another session is reported as a benign conflict", async () => {
    const service = fakeService([card("a", 0), card("b", 1)]);
    const queue = new ReviewQueue(new ApiClient("http://svc", service.fetch));
    await queue.refresh();
    service.answered.set("a", false); // someone else answered first
    const outcome = await queue.submit("a", true);
    expect(outcome.kind).toBe("conflict");
    // the card is treated as answered and leaves the visible queue
    expect(queue.pending().map((c) => c.request_id)).toEqual(["b"]);
  });

  it("network failure keeps the card and a retry goes through", async () => {
    let fail = true;
    const service = fakeService([card("a", 0)]);
    const flaky = (async (input: RequestInfo | URL, init?: RequestInit) => {
      if (fail && String(input).endsWith("/annotations")) {
        fail = false;
        throw new TypeError("fetch failed");
      }
      return service.fetch(input, init);
    }) as typeof fetch;
    const queue = new ReviewQueue(new ApiClient("http://svc", flaky));
    await queue.refresh();
    await expect(queue.submit("a", true)).rejects.toThrow("fetch failed");
    expect(queue.pending().map((c) => c.request_id)).toEqual(["a"]);
    const retry = await queue.submit("a", true);
    expect(retry.kind).toBe("accepted");
    expect(service.answered.get("a")).toBe(true);
  });

  it("submitCurrent labels the head card", async () => {
    const service = fakeService([card("b", 0), card("a", 1)]);
    const queue = new ReviewQueue(new ApiClient("http://svc", service.fetch));
    await queue.refresh();
    await queue.submitCurrent(true);
    expect(service.posts).toEqual(["b"]); // queue order, not id order
  });

  it("submitCurrent on an empty queue is a no-op", async () => {
    const service = fakeService([]);
    const queue = new ReviewQueue(new ApiClient("http://svc", service.fetch));
    await queue.refresh();
    const outcome = await queue.submitCurrent(true);
    expect(outcome.kind).toBe("duplicate");
    expect(service.posts).toEqual([]);
  });
});

describe("shortcutAction", () => {
  it("maps keys to labels", () => {
    expect(shortcutAction("y")).toEqual({ label: true });
    expect(shortcutAction("1")).toEqual({ label: true });
    expect(shortcutAction("n")).toEqual({ label: false });
    expect(shortcutAction("0")).toEqual({ label: false });
  });

  it("maps skip keys and ignores the rest", () => {
    expect(shortcutAction("j")).toEqual({ skip: true });
    expect(shortcutAction("ArrowDown")).toEqual({ skip: true });
    expect(shortcutAction("x")).toBeNull();
    expect(shortcutAction("Enter")).toBeNull();
  });
});
