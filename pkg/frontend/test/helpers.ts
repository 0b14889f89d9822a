/** Builders for wire-format review payloads used across server tests. */

import type { Mode } from "../src/schema.js";

export interface VerdictChoice {
  verdict: "pass" | "fail";
  explanation?: string;
}

export interface ReviewOptions {
  checklistOverrides?: Record<string, [VerdictChoice, VerdictChoice]>;
  tiers?: [string, string];
  fidelity?: [number, number];
  alignment?: [number, number];
}

const DIMS: Record<Mode, string[]> = {
  single_pass: ["processing_artifacts", "hazard_accuracy", "scene_realism", "visual_coherence"],
  temporal: [
    "processing_artifacts",
    "hazard_accuracy",
    "scene_realism",
    "visual_coherence",
    "temporal_consistency",
    "hazard_alert_accuracy",
  ],
};

export function wireReview(
  reviewerId: string,
  recordId: string,
  mode: Mode,
  options: ReviewOptions = {},
): Record<string, unknown> {
  const checklist: Record<string, VerdictChoice[]> = {};
  for (const dim of DIMS[mode]) {
    checklist[dim] = options.checklistOverrides?.[dim] ?? [{ verdict: "pass" }, { verdict: "pass" }];
  }
  return {
    schema_version: 1,
    review_id: `rv-asg-${reviewerId}-${recordId}-${mode}`,
    reviewer_id: reviewerId,
    record_id: recordId,
    mode,
    checklist,
    educational_tier: options.tiers ?? ["fully_acceptable", "minor_issues"],
    fidelity: options.fidelity ?? [4, 4],
    alignment: options.alignment ?? [4, 4],
  };
}

export async function postReview(
  base: string,
  assignmentId: string,
  body: unknown,
): Promise<Response> {
  return fetch(`${base}/api/assignments/${assignmentId}/review`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
}
