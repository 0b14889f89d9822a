/** HTTP server: assignment listing, review form, image assets, submissions.
 *
 * Endpoints:
 *   GET  /api/reviewers/:reviewerId/assignments   pending-first listing
 *   GET  /api/assignments/:assignmentId           full assignment JSON
 *   GET  /api/assignments/:assignmentId/schema    the mode's form schema
 *   GET  /review/:assignmentId                    interactive review form
 *   GET  /assets/*                                images from the run directory
 *   POST /api/assignments/:assignmentId/review    store one wire-format review
 */

import fs from "node:fs";
import path from "node:path";

import express, { type Express } from "express";

import {
  Assignment,
  buildAssignments,
  reviewIdFor,
  validateCoverage,
  type ManifestJson,
  type RecordLine,
} from "./allocator.js";
import { renderReviewForm, renderSubmittedPage } from "./page.js";
import { formSchema } from "./schema.js";
import { RatingsStore, type WireReview } from "./store.js";
import { validateReview, type FieldError } from "./validate.js";

export interface ServerConfig {
  manifestPath: string;
  recordsPath: string;
  ratingsPath: string;
  reviewers: string[];
}

export interface ReviewServer {
  app: Express;
  assignments: Assignment[];
  store: RatingsStore;
}

function readRecords(recordsPath: string): RecordLine[] {
  return fs
    .readFileSync(recordsPath, "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as RecordLine);
}

function statusOf(assignment: Assignment, store: RatingsStore): "pending" | "submitted" {
  return store.has(reviewIdFor(assignment.assignment_id)) ? "submitted" : "pending";
}

/** Consistency errors between the payload and the assignment being submitted. */
function bindingErrors(assignment: Assignment, payload: Record<string, unknown>): FieldError[] {
  const errors: FieldError[] = [];
  const expect = (field: string, value: string) => {
    if (field in payload && payload[field] !== value) {
      errors.push({
        field,
        message: `must match the assignment (expected ${JSON.stringify(value)})`,
      });
    }
  };
  expect("review_id", reviewIdFor(assignment.assignment_id));
  expect("reviewer_id", assignment.reviewer_id);
  expect("record_id", assignment.record_id);
  expect("mode", assignment.mode);
  return errors;
}

export function createServer(config: ServerConfig): ReviewServer {
  const manifest = JSON.parse(fs.readFileSync(config.manifestPath, "utf-8")) as ManifestJson;
  const records = readRecords(config.recordsPath);
  const assignments = buildAssignments(manifest, records, config.reviewers);
  validateCoverage(assignments);
  const store = new RatingsStore(config.ratingsPath);
  const byId = new Map(assignments.map((a) => [a.assignment_id, a]));
  const runDir = path.resolve(path.dirname(config.manifestPath));

  const app = express();
  app.use(express.json({ limit: "1mb" }));

  app.get("/api/reviewers/:reviewerId/assignments", (req, res) => {
    const reviewerId = req.params.reviewerId;
    if (!config.reviewers.includes(reviewerId)) {
      res.json({
        reviewer_id: reviewerId,
        assignments: [],
        notice: `unknown reviewer ${JSON.stringify(reviewerId)}`,
      });
      return;
    }
    const mine = assignments
      .filter((a) => a.reviewer_id === reviewerId)
      .map((a) => ({
        assignment_id: a.assignment_id,
        record_id: a.record_id,
        mode: a.mode,
        event_keyword: a.event_keyword,
        status: statusOf(a, store),
      }));
    // Pending before submitted; allocation order within each group.
    const ordered = [
      ...mine.filter((a) => a.status === "pending"),
      ...mine.filter((a) => a.status === "submitted"),
    ];
    res.json({ reviewer_id: reviewerId, assignments: ordered });
  });

  app.get("/api/assignments/:assignmentId", (req, res) => {
    const assignment = byId.get(req.params.assignmentId);
    if (!assignment) {
      res.status(404).json({ error: `unknown assignment ${req.params.assignmentId}` });
      return;
    }
    res.json({ ...assignment, status: statusOf(assignment, store) });
  });

  app.get("/api/assignments/:assignmentId/schema", (req, res) => {
    const assignment = byId.get(req.params.assignmentId);
    if (!assignment) {
      res.status(404).json({ error: `unknown assignment ${req.params.assignmentId}` });
      return;
    }
    res.json(formSchema(assignment.mode));
  });

  app.get("/review/:assignmentId", (req, res) => {
    const assignment = byId.get(req.params.assignmentId);
    if (!assignment) {
      res.status(404).send("unknown assignment");
      return;
    }
    if (statusOf(assignment, store) === "submitted") {
      res.status(409).send(renderSubmittedPage(assignment));
      return;
    }
    res.type("html").send(renderReviewForm(assignment));
  });

  app.get(/^\/assets\/(.+)$/, (req, res) => {
    const relative = req.params[0];
    const resolved = path.resolve(runDir, relative);
    if (!resolved.startsWith(runDir + path.sep) || !resolved.endsWith(".png")) {
      res.status(404).send("not found");
      return;
    }
    if (!fs.existsSync(resolved)) {
      res.status(404).send("not found");
      return;
    }
    res.type("png").send(fs.readFileSync(resolved));
  });

  app.post("/api/assignments/:assignmentId/review", (req, res) => {
    const assignment = byId.get(req.params.assignmentId);
    if (!assignment) {
      res.status(404).json({ error: `unknown assignment ${req.params.assignmentId}` });
      return;
    }
    const reviewId = reviewIdFor(assignment.assignment_id);
    if (store.has(reviewId)) {
      res.status(409).json({ error: "assignment already submitted" });
      return;
    }
    const payload =
      typeof req.body === "object" && req.body !== null
        ? (req.body as Record<string, unknown>)
        : {};
    const binding = bindingErrors(assignment, payload);
    if (binding.length > 0) {
      res.status(400).json({ errors: binding });
      return;
    }
    const review = {
      ...payload,
      schema_version: 1,
      review_id: reviewId,
      reviewer_id: assignment.reviewer_id,
      record_id: assignment.record_id,
      mode: assignment.mode,
    };
    const errors = validateReview(review);
    if (errors.length > 0) {
      res.status(400).json({ errors });
      return;
    }
    store.append(review as unknown as WireReview);
    res.status(201).json({ stored: true, review_id: reviewId });
  });

  return { app, assignments, store };
}
