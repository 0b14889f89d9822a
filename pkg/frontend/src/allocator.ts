/** Assignment allocation from a generation run manifest.
 *
 * Reads the run's manifest.json plus the ingested records store and expands
 * them into per-reviewer assignments. Every enrolled reviewer rates every
 * (record, mode) image set, which guarantees the minimum of two independent
 * reviews per set as long as two reviewers are enrolled; `validateCoverage`
 * enforces that minimum on whatever assignment list is finally used.
 */

import type { Mode } from "./schema.js";

export class AllocationError extends Error {}

export interface ManifestImageJson {
  image_id: string;
  stage: string;
  bytes_path: string;
}

export interface ManifestEntryJson {
  record_id: string;
  mode: string;
  iteration: number;
  images: ManifestImageJson[];
}

export interface ManifestJson {
  run_id: string;
  entries: ManifestEntryJson[];
}

export interface RecordLine {
  record_id: string;
  abstract_text: string;
  event_keyword: string;
}

export interface AssignmentImage {
  image_id: string;
  stage: string;
  url: string;
}

export interface AssignmentIteration {
  iteration: number;
  images: AssignmentImage[];
}

export type AssignmentStatus = "pending" | "submitted";

export interface Assignment {
  assignment_id: string;
  reviewer_id: string;
  record_id: string;
  mode: Mode;
  event_keyword: string;
  narrative: string;
  iterations: AssignmentIteration[];
  status: AssignmentStatus;
}

const STAGE_ORDER: Record<string, number> = { SP: 0, T1: 1, T2: 2, T3: 3, T4: 4 };

export function assignmentId(reviewerId: string, recordId: string, mode: Mode): string {
  return `asg-${reviewerId}-${recordId}-${mode}`;
}

/** The one review a submitted assignment stores, named after the assignment. */
export function reviewIdFor(assignmentIdValue: string): string {
  return `rv-${assignmentIdValue}`;
}

function imagesByStage(entry: ManifestEntryJson): AssignmentImage[] {
  return [...entry.images]
    .sort((a, b) => (STAGE_ORDER[a.stage] ?? 99) - (STAGE_ORDER[b.stage] ?? 99))
    .map((image) => ({
      image_id: image.image_id,
      stage: image.stage,
      url: `/assets/${image.bytes_path}`,
    }));
}

export function buildAssignments(
  manifest: ManifestJson,
  records: RecordLine[],
  reviewers: string[],
): Assignment[] {
  if (reviewers.length === 0) {
    throw new AllocationError("no reviewers enrolled");
  }
  const narratives = new Map(records.map((r) => [r.record_id, r]));

  // (record, mode) -> iterations, preserving first-appearance order.
  const sets = new Map<string, { record_id: string; mode: Mode; entries: ManifestEntryJson[] }>();
  for (const entry of manifest.entries) {
    if (entry.mode !== "single_pass" && entry.mode !== "temporal") {
      throw new AllocationError(`manifest entry has unknown mode ${JSON.stringify(entry.mode)}`);
    }
    const key = `${entry.record_id}${entry.mode}`;
    if (!sets.has(key)) {
      sets.set(key, { record_id: entry.record_id, mode: entry.mode, entries: [] });
    }
    sets.get(key)!.entries.push(entry);
  }

  const assignments: Assignment[] = [];
  for (const reviewer of reviewers) {
    for (const set of sets.values()) {
      const record = narratives.get(set.record_id);
      if (!record) {
        throw new AllocationError(
          `manifest references record ${set.record_id} missing from the records store`,
        );
      }
      const iterations = [...set.entries]
        .sort((a, b) => a.iteration - b.iteration)
        .map((entry) => ({ iteration: entry.iteration, images: imagesByStage(entry) }));
      assignments.push({
        assignment_id: assignmentId(reviewer, set.record_id, set.mode),
        reviewer_id: reviewer,
        record_id: set.record_id,
        mode: set.mode,
        event_keyword: record.event_keyword,
        narrative: record.abstract_text,
        iterations,
        status: "pending",
      });
    }
  }
  return assignments;
}

/** Every (record, mode) image set must be assigned to at least two reviewers. */
export function validateCoverage(assignments: Assignment[]): void {
  const coverage = new Map<string, Set<string>>();
  for (const assignment of assignments) {
    const key = `${assignment.record_id} (${assignment.mode})`;
    if (!coverage.has(key)) coverage.set(key, new Set());
    coverage.get(key)!.add(assignment.reviewer_id);
  }
  const uncovered = [...coverage.entries()]
    .filter(([, reviewers]) => reviewers.size < 2)
    .map(([key]) => key);
  if (uncovered.length > 0) {
    throw new AllocationError(
      `image sets need at least two reviewers, short: ${uncovered.join(", ")}`,
    );
  }
}
