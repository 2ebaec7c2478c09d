/**
 * Pure presentation helpers for the run dashboard. Anything shown here is
 * derived from service payloads alone.
 */

import type { EvaluationResponse, IterationRow, RunStatus } from "./types.js";

export function budgetLine(status: RunStatus): string {
  return `${status.annotations_used}/${status.budget} annotations`;
}

export function iterationLine(status: RunStatus): string {
  return `iteration ${status.iteration} of ${status.max_iterations}`;
}

export function phaseLine(status: RunStatus): string {
  switch (status.phase) {
    case "initializing":
      return "seeding the first batch";
    case "awaiting_annotations":
      return "waiting for your labels";
    case "training":
      return "loop is training";
    case "selecting":
      return "selecting the next batch";
    case "evaluating":
      return "estimating precision";
    case "done":
      return "done";
  }
}

/**
 * Precision is undefined until the audit runs (and stays undefined when no
 * positives were inferred): render "not yet estimated", never 0.
 */
export function precisionLine(evaluation: EvaluationResponse): string {
  const report = evaluation.report;
  if (!report || report.estimated_precision === null || report.estimated_precision === undefined) {
    return "precision: not yet estimated";
  }
  const pct = (report.estimated_precision * 100).toFixed(1);
  return (
    `precision: ${pct}% ` +
    `(${report.n_true_positive_in_sample}/${report.n_sampled} audited, ` +
    `${report.inferred_positive_count} inferred positive)`
  );
}

export function lossRows(iterations: IterationRow[]): string[] {
  return iterations.map(
    (row) => `iteration ${row.iteration}: train loss ${row.train_loss_final.toFixed(4)}`,
  );
}

export function summaryLines(
  status: RunStatus,
  evaluation: EvaluationResponse,
  iterations: IterationRow[],
): string[] {
  const lines = [
    `run ${status.run_id}: ${phaseLine(status)}`,
    iterationLine(status),
    budgetLine(status),
    ...lossRows(iterations),
    precisionLine(evaluation),
  ];
  if (status.error) lines.push(`error: ${status.error}`);
  return lines;
}
