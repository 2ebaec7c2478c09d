/**
 * Wire types mirroring the annotation service's JSON payloads.
 * Card fields are rendered exactly as received; the client never
 * transforms candidate text (names may be Chinese).
 */

export type Purpose = "coldstart" | "loop" | "evaluation";

export type Phase =
  | "initializing"
  | "awaiting_annotations"
  | "training"
  | "selecting"
  | "evaluating"
  | "done";

export interface CandidateCard {
  request_id: string;
  text: string;
  category: string;
  purpose: Purpose;
  position: number;
}

export interface RunStatus {
  run_id: string;
  phase: Phase;
  iteration: number;
  max_iterations: number;
  annotations_used: number;
  budget: number;
  model_version: number;
  error: string | null;
}

export interface EvaluationReport {
  n_sampled: number;
  n_true_positive_in_sample: number;
  estimated_precision: number | null;
  inferred_positive_count: number;
  decision_threshold: number;
}

export interface EvaluationResponse {
  report: EvaluationReport | null;
  status: "done" | "not yet estimated";
}

export interface SubmitResult {
  accepted: boolean;
  remaining: number;
}

export interface IterationRow {
  iteration: number;
  selected_ids: string[];
  annotations_added: number;
  model_version: number;
  train_loss_final: number;
}
