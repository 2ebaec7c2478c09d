import { describe, expect, it } from "vitest";

import {
  budgetLine,
  iterationLine,
  lossRows,
  phaseLine,
  precisionLine,
  summaryLines,
} from "../src/dashboard.js";
import type { EvaluationResponse, RunStatus } from "../src/types.js";

function status(overrides: Partial<RunStatus> = {}): RunStatus {
  return {
    run_id: "r1",
    phase: "training",
    iteration: 4,
    max_iterations: 9,
    annotations_used: 80,
    budget: 160,
    model_version: 4,
    error: null,
    ...overrides,
  };
}

const noReport: EvaluationResponse = { report: null, status: "not yet estimated" };

describe("dashboard lines", () => {
  it("budget arithmetic mid-run", () => {
    expect(budgetLine(status())).toBe("80/160 annotations");
    expect(iterationLine(status())).toBe("iteration 4 of 9");
  });

  it("full-run budget", () => {
    const s = status({ phase: "done", iteration: 9, annotations_used: 160 });
    expect(budgetLine(s)).toBe("160/160 annotations");
    expect(phaseLine(s)).toBe("done");
  });

  it("empty queue during training reads as training", () => {
    expect(phaseLine(status({ phase: "training" }))).toBe("loop is training");
    expect(phaseLine(status({ phase: "awaiting_annotations" }))).toBe(
      "waiting for your labels",
    );
  });

  it("pending evaluation is never rendered as zero", () => {
    expect(precisionLine(noReport)).toBe("precision: not yet estimated");
    // no positives inferred: the service stores a null estimate
    const undefinedPrecision: EvaluationResponse = {
      report: {
        n_sampled: 0,
        n_true_positive_in_sample: 0,
        estimated_precision: null,
        inferred_positive_count: 0,
        decision_threshold: 0.5,
      },
      status: "done",
    };
    expect(precisionLine(undefinedPrecision)).toBe("precision: not yet estimated");
    expect(precisionLine(undefinedPrecision)).not.toContain("0.0%");
  });

  it("completed evaluation renders the audit fraction", () => {
    const done: EvaluationResponse = {
      report: {
        n_sampled: 200,
        n_true_positive_in_sample: 196,
        estimated_precision: 0.98,
        inferred_positive_count: 930,
        decision_threshold: 0.5,
      },
      status: "done",
    };
    expect(precisionLine(done)).toBe(
      "precision: 98.0% (196/200 audited, 930 inferred positive)",
    );
  });

  it("loss rows keep iteration order", () => {
    const rows = lossRows([
      { iteration: 1, selected_ids: [], annotations_added: 4, model_version: 1, train_loss_final: 0.61234 },
      { iteration: 2, selected_ids: [], annotations_added: 4, model_version: 2, train_loss_final: 0.40001 },
    ]);
    expect(rows).toEqual([
      "iteration 1: train loss 0.6123",
      "iteration 2: train loss 0.4000",
    ]);
  });

  it("summary surfaces service errors last", () => {
    const lines = summaryLines(status({ error: "pool is missing annotated points: x" }), noReport, []);
    expect(lines[0]).toBe("run r1: loop is training");
    expect(lines[lines.length - 1]).toBe("error: pool is missing annotated points: x");
  });
});
