/** Shared test fixture: a real generation run produced through the Python CLI.
 *
 * The UI consumes the pipeline only through its external interfaces — the
 * records store, the run manifest, and the ratings wire format — so the
 * fixture is built by shelling out to the actual `hazviz` commands.
 */

import { execFileSync } from "node:child_process";
import fs from "node:fs";
import os from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";

const HERE = path.dirname(fileURLToPath(import.meta.url));
export const REPO_ROOT = path.resolve(HERE, "..", "..");
export const PYTHON_ENV = {
  ...process.env,
  PYTHONPATH: path.join(REPO_ROOT, "src"),
};

export function runPython(args: string[]): string {
  return execFileSync("python3", args, { env: PYTHON_ENV, encoding: "utf-8" });
}

export interface RunFixture {
  dir: string;
  recordsPath: string;
  manifestPath: string;
  ratingsPath: string;
}

export function buildRunFixture(): RunFixture {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "review-ui-"));
  const recordsPath = path.join(dir, "records.jsonl");
  const runDir = path.join(dir, "run");
  runPython([
    "-m",
    "hazviz.cli",
    "ingest",
    "--csv",
    path.join(REPO_ROOT, "tests", "fixtures", "sir_fixture.csv"),
    "--out",
    recordsPath,
  ]);
  runPython([
    "-m",
    "hazviz.cli",
    "generate",
    "--records",
    recordsPath,
    "--out-dir",
    runDir,
    "--iterations",
    "2",
  ]);
  return {
    dir,
    recordsPath,
    manifestPath: path.join(runDir, "manifest.json"),
    ratingsPath: path.join(dir, "ratings.jsonl"),
  };
}

export function cleanupFixture(fixture: RunFixture): void {
  fs.rmSync(fixture.dir, { recursive: true, force: true });
}
