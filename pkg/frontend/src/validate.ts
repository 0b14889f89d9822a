/** Wire-format review validation, shared verbatim between server and browser.
 *
 * `validateReview` is deliberately self-contained (every constant lives in
 * the function body, no imports captured) so the review page can embed
 * `validateReview.toString()` and run the exact same rules client-side.
 * The rules mirror the Python engine's ratings ingestion: anything this
 * function accepts, `hazviz eval-expert` ingests without error.
 */

export interface FieldError {
  field: string;
  message: string;
}

export function validateReview(obj: unknown): FieldError[] {
  const ITERATIONS = 2;
  const SCHEMA_VERSION = 1;
  const LIKERT_MIN = 1;
  const LIKERT_MAX = 5;
  const TIERS = ["fully_acceptable", "minor_issues", "major_issues"];
  const BASE_DIMS = [
    "processing_artifacts",
    "hazard_accuracy",
    "scene_realism",
    "visual_coherence",
  ];
  const DIMS_BY_MODE: Record<string, string[]> = {
    single_pass: BASE_DIMS,
    temporal: BASE_DIMS.concat(["temporal_consistency", "hazard_alert_accuracy"]),
  };

  const errors: FieldError[] = [];
  const push = (field: string, message: string) => {
    errors.push({ field, message });
  };

  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    return [{ field: "review", message: "review must be a JSON object" }];
  }
  const review = obj as Record<string, unknown>;

  const nonEmptyString = (value: unknown): value is string =>
    typeof value === "string" && value.length > 0;

  if (!nonEmptyString(review.review_id)) {
    push("review_id", "review has no review_id");
  }
  if (review.schema_version !== SCHEMA_VERSION) {
    push("schema_version", `schema_version must be ${SCHEMA_VERSION}`);
  }
  if (!nonEmptyString(review.reviewer_id)) {
    push("reviewer_id", "reviewer_id is missing or empty");
  }
  if (!nonEmptyString(review.record_id)) {
    push("record_id", "record_id is missing or empty");
  }

  const mode = review.mode;
  if (mode !== "single_pass" && mode !== "temporal") {
    push("mode", `mode must be single_pass or temporal, got ${JSON.stringify(mode)}`);
    return errors; // the remaining rules are mode-dependent
  }
  const expectedDims = DIMS_BY_MODE[mode];

  const checklist = review.checklist;
  if (typeof checklist !== "object" || checklist === null || Array.isArray(checklist)) {
    push("checklist", "checklist must be an object");
  } else {
    const checklistObj = checklist as Record<string, unknown>;
    const missing = expectedDims.filter((d) => !(d in checklistObj));
    const extra = Object.keys(checklistObj).filter((d) => !expectedDims.includes(d));
    if (missing.length > 0) {
      push("checklist", `checklist is missing dimension(s): ${missing.join(", ")}`);
    }
    if (extra.length > 0) {
      push(
        "checklist",
        `checklist has unknown dimension(s) for ${mode}: ${extra.sort().join(", ")}`,
      );
    }
    for (const dimension of expectedDims) {
      if (!(dimension in checklistObj)) continue;
      const entries = checklistObj[dimension];
      if (!Array.isArray(entries) || entries.length !== ITERATIONS) {
        push(`checklist.${dimension}`, `expected ${ITERATIONS} iteration verdicts`);
        continue;
      }
      entries.forEach((entry, index) => {
        const verdict =
          typeof entry === "object" && entry !== null
            ? (entry as Record<string, unknown>).verdict
            : undefined;
        if (verdict !== "pass" && verdict !== "fail") {
          push(`checklist.${dimension}[${index}].verdict`, "verdict must be pass or fail");
          return;
        }
        if (verdict === "fail") {
          const explanation = (entry as Record<string, unknown>).explanation;
          if (typeof explanation !== "string" || explanation.trim().length === 0) {
            push(
              `checklist.${dimension}[${index}].explanation`,
              "fail verdicts need a non-empty explanation",
            );
          }
        }
      });
    }
  }

  const tiers = review.educational_tier;
  if (!Array.isArray(tiers) || tiers.length !== ITERATIONS) {
    push("educational_tier", `educational_tier must list ${ITERATIONS} tiers`);
  } else {
    tiers.forEach((tier, index) => {
      if (!TIERS.includes(tier as string)) {
        push(`educational_tier[${index}]`, `unknown educational tier ${JSON.stringify(tier)}`);
      }
    });
  }

  for (const scale of ["fidelity", "alignment"] as const) {
    const values = review[scale];
    if (!Array.isArray(values) || values.length !== ITERATIONS) {
      push(scale, `${scale} must list ${ITERATIONS} ratings`);
      continue;
    }
    values.forEach((value, index) => {
      if (
        typeof value !== "number" ||
        !Number.isInteger(value) ||
        value < LIKERT_MIN ||
        value > LIKERT_MAX
      ) {
        push(
          `${scale}[${index}]`,
          `${scale} ratings must be integers in ${LIKERT_MIN}..${LIKERT_MAX}`,
        );
      }
    });
  }

  return errors;
}

/** Source text of the validator, for embedding in the review page. */
export function validatorSource(): string {
  return validateReview.toString();
}
