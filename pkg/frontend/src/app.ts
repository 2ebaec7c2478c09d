/**
 * DOM wiring for the console. One annotation run per service process: the
 * page shows a dashboard panel, the review queue, and a connectivity banner.
 *
 * Candidate text goes into the DOM via textContent only: no markup, no
 * normalization (commodity names may be Chinese and must render verbatim).
 */

import { ApiClient } from "./api.js";
import { summaryLines } from "./dashboard.js";
import { ReviewQueue, shortcutAction } from "./queue.js";
import { StatusPoller } from "./poll.js";
import type { CandidateCard, RunStatus } from "./types.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function renderCard(card: CandidateCard, queue: ReviewQueue, notice: HTMLElement): HTMLElement {
  const li = document.createElement("li");
  li.className = `card purpose-${card.purpose}`;

  const badge = document.createElement("span");
  badge.className = "badge";
  badge.textContent = card.purpose;
  li.appendChild(badge);

  const text = document.createElement("span");
  text.className = "text";
  text.textContent = card.text;
  li.appendChild(text);

  for (const [caption, label] of [["yes (y)", true], ["no (n)", false]] as const) {
    const button = document.createElement("button");
    button.textContent = caption;
    button.addEventListener("click", () => {
      void queue.submit(card.request_id, label).then((outcome) => {
        if (outcome.kind === "conflict") {
          notice.textContent = `already answered elsewhere: ${card.text}`;
        }
        renderQueue(queue, notice);
      });
    });
    li.appendChild(button);
  }
  return li;
}

function renderQueue(queue: ReviewQueue, notice: HTMLElement): void {
  const list = el("queue");
  list.replaceChildren(
    ...queue.pending().map((card) => renderCard(card, queue, notice)),
  );
}

export function mount(baseUrl: string): void {
  const api = new ApiClient(baseUrl);
  const queue = new ReviewQueue(api);
  const banner = el("banner");
  const notice = el("notice");
  const dashboard = el("dashboard");

  async function redrawDashboard(status: RunStatus): Promise<void> {
    const [evaluation, iterations] = await Promise.all([
      api.evaluation(),
      api.iterations(),
    ]);
    dashboard.replaceChildren(
      ...summaryLines(status, evaluation, iterations).map((line) => {
        const row = document.createElement("div");
        row.textContent = line;
        return row;
      }),
    );
  }

  const poller = new StatusPoller(api, {
    onStatus: (status) => void redrawDashboard(status),
    onPhaseChange: () => {
      void queue.refresh().then(() => renderQueue(queue, notice));
    },
    onUnreachable: () => {
      banner.textContent = `service unreachable at ${baseUrl}, retrying...`;
      banner.hidden = false;
    },
    onReachable: () => {
      banner.hidden = true;
    },
  });

  document.addEventListener("keydown", (event) => {
    const action = shortcutAction(event.key);
    if (!action) return;
    if ("label" in action) {
      void queue.submitCurrent(action.label).then(() => renderQueue(queue, notice));
    }
    // skip just moves focus visually; the head card is always the target
  });

  poller.start();
}
