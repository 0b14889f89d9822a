import fs from "node:fs";
import type { Server } from "node:http";
import type { AddressInfo } from "node:net";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { createServer } from "../src/server.js";
import { buildRunFixture, cleanupFixture, type RunFixture } from "./fixture.js";
import { postReview, wireReview } from "./helpers.js";

let fixture: RunFixture;
let server: Server;
let base: string;

beforeAll(async () => {
  fixture = buildRunFixture();
  const { app } = createServer({
    manifestPath: fixture.manifestPath,
    recordsPath: fixture.recordsPath,
    ratingsPath: fixture.ratingsPath,
    reviewers: ["rev-1", "rev-2"],
  });
  server = app.listen(0);
  await new Promise((resolve) => server.once("listening", resolve));
  base = `http://127.0.0.1:${(server.address() as AddressInfo).port}`;
});

afterAll(async () => {
  await new Promise((resolve) => server.close(resolve));
  cleanupFixture(fixture);
});

function storedLines(): string[] {
  if (!fs.existsSync(fixture.ratingsPath)) return [];
  return fs.readFileSync(fixture.ratingsPath, "utf-8").split("\n").filter((l) => l.trim());
}

describe("assignment listing", () => {
  it("gives each enrolled reviewer six assignments for the three-record run", async () => {
    const body = await (await fetch(`${base}/api/reviewers/rev-1/assignments`)).json();
    expect(body.assignments).toHaveLength(6);
    expect(body.assignments.every((a: { status: string }) => a.status === "pending")).toBe(true);
    expect(body.notice).toBeUndefined();
  });

  it("answers an unknown reviewer with an empty list and a notice", async () => {
    const body = await (await fetch(`${base}/api/reviewers/nobody/assignments`)).json();
    expect(body.assignments).toEqual([]);
    expect(body.notice).toContain("unknown reviewer");
  });
});

describe("assignment detail", () => {
  it("returns one frame per iteration for single-pass sets", async () => {
    const response = await fetch(
      `${base}/api/assignments/asg-rev-1-sir-000001-single_pass`,
    );
    expect(response.status).toBe(200);
    const body = await response.json();
    expect(body.mode).toBe("single_pass");
    expect(body.iterations).toHaveLength(2);
    expect(body.iterations.map((i: { images: unknown[] }) => i.images.length)).toEqual([1, 1]);
    expect(body.narrative.length).toBeGreaterThan(0);
  });

  it("returns four ordered frames per iteration for temporal sets", async () => {
    const body = await (
      await fetch(`${base}/api/assignments/asg-rev-1-sir-000001-temporal`)
    ).json();
    expect(body.iterations).toHaveLength(2);
    for (const iteration of body.iterations) {
      expect(iteration.images.map((i: { stage: string }) => i.stage)).toEqual([
        "T1",
        "T2",
        "T3",
        "T4",
      ]);
    }
  });

  it("404s unknown assignments", async () => {
    const response = await fetch(`${base}/api/assignments/asg-nope`);
    expect(response.status).toBe(404);
  });

  it("serves the mode's form schema", async () => {
    const schema = await (
      await fetch(`${base}/api/assignments/asg-rev-1-sir-000001-temporal/schema`)
    ).json();
    expect(schema.dimensions).toHaveLength(6);
  });
});

describe("image assets", () => {
  it("serves the run's PNG frames", async () => {
    const detail = await (
      await fetch(`${base}/api/assignments/asg-rev-1-sir-000001-temporal`)
    ).json();
    const url = detail.iterations[0].images[0].url;
    const response = await fetch(`${base}${url}`);
    expect(response.status).toBe(200);
    const bytes = new Uint8Array(await response.arrayBuffer());
    expect([...bytes.slice(0, 4)]).toEqual([0x89, 0x50, 0x4e, 0x47]);
  });

  it("404s missing frames and traversal attempts", async () => {
    expect((await fetch(`${base}/assets/images/missing.png`)).status).toBe(404);
    expect((await fetch(`${base}/assets/..%2Fmanifest.json`)).status).toBe(404);
    expect((await fetch(`${base}/assets/../manifest.json`)).status).toBe(404);
  });
});

describe("review form page", () => {
  it("renders narrative, anchors, and a disabled submit with the embedded validator", async () => {
    const response = await fetch(`${base}/review/asg-rev-2-sir-000001-temporal`);
    expect(response.status).toBe(200);
    const html = await response.text();
    expect(html).toContain("Temporal Consistency");
    expect(html).toContain("Looks like an AI-generated photo");
    expect(html).toContain("Matches exactly");
    expect(html).toContain("No Issues -- Fully Acceptable");
    expect(html).toContain('<button id="submit" type="submit" disabled>');
    expect(html).toContain("const validateReview = function");
  });

  it("404s review pages for unknown assignments", async () => {
    expect((await fetch(`${base}/review/asg-nope`)).status).toBe(404);
  });
});

describe("submission", () => {
  it("stores a valid review once and flips the listing order and status", async () => {
    const before = storedLines().length;
    const response = await postReview(
      base,
      "asg-rev-1-sir-000003-single_pass",
      wireReview("rev-1", "sir-000003", "single_pass"),
    );
    expect(response.status).toBe(201);
    expect(storedLines().length).toBe(before + 1);

    const listing = await (await fetch(`${base}/api/reviewers/rev-1/assignments`)).json();
    const last = listing.assignments[listing.assignments.length - 1];
    expect(last.assignment_id).toBe("asg-rev-1-sir-000003-single_pass");
    expect(last.status).toBe("submitted");
    expect(
      listing.assignments.slice(0, -1).every((a: { status: string }) => a.status === "pending"),
    ).toBe(true);

    const page = await fetch(`${base}/review/asg-rev-1-sir-000003-single_pass`);
    expect(page.status).toBe(409);
  });

  it("rejects a duplicate submission with a conflict and leaves the store unchanged", async () => {
    await postReview(
      base,
      "asg-rev-2-sir-000003-single_pass",
      wireReview("rev-2", "sir-000003", "single_pass"),
    );
    const before = storedLines();
    const response = await postReview(
      base,
      "asg-rev-2-sir-000003-single_pass",
      wireReview("rev-2", "sir-000003", "single_pass", { fidelity: [1, 1] }),
    );
    expect(response.status).toBe(409);
    expect(storedLines()).toEqual(before);
  });

  it("rejects a fail verdict without explanation server-side, storing nothing", async () => {
    const before = storedLines().length;
    const body = wireReview("rev-2", "sir-000002", "single_pass", {
      checklistOverrides: {
        scene_realism: [{ verdict: "fail" }, { verdict: "pass" }],
      },
    });
    const response = await postReview(base, "asg-rev-2-sir-000002-single_pass", body);
    expect(response.status).toBe(400);
    const payload = await response.json();
    expect(
      payload.errors.some(
        (e: { field: string }) => e.field === "checklist.scene_realism[0].explanation",
      ),
    ).toBe(true);
    expect(storedLines().length).toBe(before);
  });

  it("rejects out-of-range Likert values", async () => {
    const response = await postReview(
      base,
      "asg-rev-2-sir-000002-single_pass",
      wireReview("rev-2", "sir-000002", "single_pass", { fidelity: [0, 4] }),
    );
    expect(response.status).toBe(400);
  });

  it("rejects payloads bound to a different assignment", async () => {
    const body = wireReview("rev-1", "sir-000002", "single_pass");
    const response = await postReview(base, "asg-rev-2-sir-000002-single_pass", body);
    expect(response.status).toBe(400);
    const payload = await response.json();
    expect(payload.errors.some((e: { field: string }) => e.field === "reviewer_id")).toBe(true);
  });

  it("404s submissions to unknown assignments", async () => {
    const response = await postReview(base, "asg-nope", wireReview("rev-1", "x", "single_pass"));
    expect(response.status).toBe(404);
  });
});
