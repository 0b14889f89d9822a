import { describe, expect, it } from "vitest";

import {
  AllocationError,
  buildAssignments,
  validateCoverage,
  type ManifestJson,
  type RecordLine,
} from "../src/allocator.js";

function syntheticManifest(recordIds: string[]): ManifestJson {
  const entries = [];
  for (const recordId of recordIds) {
    for (const mode of ["single_pass", "temporal"] as const) {
      for (const iteration of [1, 2]) {
        const stages = mode === "single_pass" ? ["SP"] : ["T3", "T1", "T4", "T2"];
        entries.push({
          record_id: recordId,
          mode,
          iteration,
          images: stages.map((stage) => ({
            image_id: `${recordId}_${mode}_${iteration}_${stage}`,
            stage,
            bytes_path: `images/${recordId}_${mode}_${iteration}_${stage}.png`,
          })),
        });
      }
    }
  }
  return { run_id: "run-test", entries };
}

function syntheticRecords(recordIds: string[]): RecordLine[] {
  return recordIds.map((recordId) => ({
    record_id: recordId,
    abstract_text: `narrative for ${recordId}`,
    event_keyword: "STRUCK-BY",
  }));
}

const RECORD_IDS = ["sir-000001", "sir-000002", "sir-000003"];

describe("assignment allocation", () => {
  it("expands 3 records x 2 modes into 6 assignments per enrolled reviewer", () => {
    const assignments = buildAssignments(
      syntheticManifest(RECORD_IDS),
      syntheticRecords(RECORD_IDS),
      ["rev-1", "rev-2"],
    );
    expect(assignments).toHaveLength(12);
    const mine = assignments.filter((a) => a.reviewer_id === "rev-1");
    expect(mine).toHaveLength(6);
    expect(new Set(mine.map((a) => `${a.record_id}/${a.mode}`)).size).toBe(6);
    expect(assignments.every((a) => a.status === "pending")).toBe(true);
  });

  it("bundles both iterations with frames in stage order and asset urls", () => {
    const [assignment] = buildAssignments(
      syntheticManifest(["sir-000001"]),
      syntheticRecords(["sir-000001"]),
      ["rev-1", "rev-2"],
    ).filter((a) => a.mode === "temporal");
    expect(assignment.iterations.map((i) => i.iteration)).toEqual([1, 2]);
    for (const iteration of assignment.iterations) {
      expect(iteration.images.map((i) => i.stage)).toEqual(["T1", "T2", "T3", "T4"]);
      for (const image of iteration.images) {
        expect(image.url).toBe(`/assets/images/${image.image_id}.png`);
      }
    }
    const single = buildAssignments(
      syntheticManifest(["sir-000001"]),
      syntheticRecords(["sir-000001"]),
      ["rev-1", "rev-2"],
    ).find((a) => a.mode === "single_pass");
    expect(single?.iterations.map((i) => i.images.length)).toEqual([1, 1]);
  });

  it("carries the narrative text for the rater", () => {
    const assignments = buildAssignments(
      syntheticManifest(["sir-000002"]),
      syntheticRecords(["sir-000002"]),
      ["rev-1", "rev-2"],
    );
    expect(assignments[0].narrative).toBe("narrative for sir-000002");
    expect(assignments[0].event_keyword).toBe("STRUCK-BY");
  });

  it("rejects manifests that reference records missing from the store", () => {
    expect(() =>
      buildAssignments(syntheticManifest(["sir-000009"]), syntheticRecords(RECORD_IDS), [
        "rev-1",
        "rev-2",
      ]),
    ).toThrow(AllocationError);
  });

  it("needs at least one reviewer", () => {
    expect(() =>
      buildAssignments(syntheticManifest(RECORD_IDS), syntheticRecords(RECORD_IDS), []),
    ).toThrow(AllocationError);
  });
});

describe("coverage validation", () => {
  it("accepts full dual coverage", () => {
    const assignments = buildAssignments(
      syntheticManifest(RECORD_IDS),
      syntheticRecords(RECORD_IDS),
      ["rev-1", "rev-2", "rev-3"],
    );
    expect(() => validateCoverage(assignments)).not.toThrow();
  });

  it("rejects image sets covered by a single reviewer", () => {
    const assignments = buildAssignments(
      syntheticManifest(RECORD_IDS),
      syntheticRecords(RECORD_IDS),
      ["rev-1"],
    );
    expect(() => validateCoverage(assignments)).toThrow(/at least two reviewers/);
  });

  it("names the uncovered sets", () => {
    const assignments = buildAssignments(
      syntheticManifest(["sir-000001"]),
      syntheticRecords(["sir-000001"]),
      ["rev-1", "rev-2"],
    ).filter((a) => !(a.reviewer_id === "rev-2" && a.mode === "temporal"));
    expect(() => validateCoverage(assignments)).toThrow(/sir-000001 \(temporal\)/);
  });
});
