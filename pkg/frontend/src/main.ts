/** CLI entry point: start the review server against a generation run. */

import { parseArgs } from "node:util";

import { createServer } from "./server.js";

function usage(): never {
  console.error(
    "usage: node dist/main.js --manifest run/manifest.json --records records.jsonl " +
      "--ratings ratings.jsonl --reviewers rev-1,rev-2 [--port 8787]",
  );
  process.exit(2);
}

const { values } = parseArgs({
  options: {
    manifest: { type: "string" },
    records: { type: "string" },
    ratings: { type: "string" },
    reviewers: { type: "string" },
    port: { type: "string", default: "8787" },
  },
});

if (!values.manifest || !values.records || !values.ratings || !values.reviewers) {
  usage();
}

const reviewers = values.reviewers
  .split(",")
  .map((reviewer) => reviewer.trim())
  .filter((reviewer) => reviewer.length > 0);

const { app, assignments } = createServer({
  manifestPath: values.manifest,
  recordsPath: values.records,
  ratingsPath: values.ratings,
  reviewers,
});

const port = Number.parseInt(values.port ?? "8787", 10);
app.listen(port, () => {
  console.log(
    `review ui: ${assignments.length} assignments for ${reviewers.length} reviewers ` +
      `on http://localhost:${port}`,
  );
});
