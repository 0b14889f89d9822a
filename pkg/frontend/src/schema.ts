/** Review-form content: checklist dimensions, tier options, Likert anchors. */

export type Mode = "single_pass" | "temporal";

export const MODES: readonly Mode[] = ["single_pass", "temporal"] as const;

export interface ChecklistDimension {
  /** Wire key used in ratings lines. */
  key: string;
  /** Heading shown to the rater. */
  label: string;
  /** What the rater is checking the image set for. */
  prompt: string;
}

const BASE_DIMENSIONS: ChecklistDimension[] = [
  {
    key: "processing_artifacts",
    label: "Processing Artifacts",
    prompt: "watermarks, overlaid text, unwanted photographer elements.",
  },
  {
    key: "hazard_accuracy",
    label: "Hazard Accuracy",
    prompt: "depicted hazard matches the SIR record (Steps 2-4 for sequences).",
  },
  {
    key: "scene_realism",
    label: "Scene Realism",
    prompt:
      "logically arranged elements consistent with a real highway work zone job site.",
  },
  {
    key: "visual_coherence",
    label: "Visual Coherence",
    prompt: "physically plausible renderings.",
  },
];

const SEQUENCE_DIMENSIONS: ChecklistDimension[] = [
  {
    key: "temporal_consistency",
    label: "Temporal Consistency",
    prompt: "stable people/equipment across Steps 2-4.",
  },
  {
    key: "hazard_alert_accuracy",
    label: "Hazard Alert Accuracy",
    prompt: "Step 3 overlay correctly identifies and describes the at-risk worker.",
  },
];

export interface TierOption {
  value: string;
  label: string;
}

export const TIER_OPTIONS: readonly TierOption[] = [
  { value: "fully_acceptable", label: "No Issues -- Fully Acceptable" },
  { value: "minor_issues", label: "Minor Issues -- Still Acceptable" },
  { value: "major_issues", label: "Major Issues -- Not Acceptable" },
] as const;

export interface LikertScale {
  key: "fidelity" | "alignment";
  label: string;
  /** Anchor phrase at 1. */
  low: string;
  /** Anchor phrase at 5. */
  high: string;
}

export const LIKERT_SCALES: readonly LikertScale[] = [
  {
    key: "fidelity",
    label: "Fidelity",
    low: "Looks like an AI-generated photo",
    high: "Looks like a real photo",
  },
  {
    key: "alignment",
    label: "Alignment",
    low: "Does not match at all",
    high: "Matches exactly",
  },
] as const;

export interface FormSchema {
  mode: Mode;
  dimensions: ChecklistDimension[];
  tiers: TierOption[];
  likert: LikertScale[];
  iterations: number;
}

/** Per-mode form layout: four checklist dimensions, six for sequences. */
export function formSchema(mode: Mode): FormSchema {
  const dimensions =
    mode === "temporal" ? [...BASE_DIMENSIONS, ...SEQUENCE_DIMENSIONS] : [...BASE_DIMENSIONS];
  return {
    mode,
    dimensions,
    tiers: [...TIER_OPTIONS],
    likert: [...LIKERT_SCALES],
    iterations: 2,
  };
}
