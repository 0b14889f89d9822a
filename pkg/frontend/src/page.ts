/** Server-rendered review form.
 *
 * The page embeds the exact server-side validator (via
 * `validateReview.toString()`), rebuilds the wire payload on every input
 * event, and keeps the submit button disabled until the payload validates —
 * so a fail verdict without an explanation can never be submitted from the
 * form. The server re-runs the same validator on every POST regardless.
 */

import type { Assignment } from "./allocator.js";
import { reviewIdFor } from "./allocator.js";
import { formSchema } from "./schema.js";
import { validatorSource } from "./validate.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function escapeScriptJson(value: unknown): string {
  return JSON.stringify(value).replace(/</g, "\\u003c");
}

const PAGE_STYLE = `
  body { font-family: system-ui, sans-serif; margin: 2rem auto; max-width: 72rem; padding: 0 1rem; color: #1a1a1a; }
  h1 { font-size: 1.4rem; } h2 { font-size: 1.1rem; margin-top: 2rem; }
  .narrative { background: #f6f6f4; border-left: 4px solid #888; padding: 0.8rem 1rem; white-space: pre-wrap; }
  .iterations { display: grid; grid-template-columns: 1fr 1fr; gap: 1.5rem; }
  .frames { display: flex; gap: 0.5rem; flex-wrap: wrap; }
  .frames figure { margin: 0; }
  .frames img { max-width: 11rem; border: 1px solid #ccc; display: block; }
  .frames figcaption { font-size: 0.75rem; text-align: center; color: #555; }
  .placeholder { width: 11rem; height: 6rem; border: 1px dashed #b00; display: flex; align-items: center; justify-content: center; font-size: 0.75rem; color: #b00; }
  .dimension { border: 1px solid #ddd; border-radius: 6px; padding: 0.8rem 1rem; margin: 0.8rem 0; }
  .dimension .prompt { color: #555; font-size: 0.9rem; margin: 0.2rem 0 0.6rem; }
  .per-iteration { display: grid; grid-template-columns: 1fr 1fr; gap: 1rem; }
  textarea { width: 100%; min-height: 3rem; margin-top: 0.3rem; }
  .hidden { display: none; }
  .likert-row { display: flex; align-items: center; gap: 0.6rem; margin: 0.4rem 0; flex-wrap: wrap; }
  .anchor { font-size: 0.8rem; color: #555; max-width: 10rem; }
  .errors { color: #b00; }
  .defects li { color: #b00; font-size: 0.85rem; }
  button[type=submit] { font-size: 1rem; padding: 0.5rem 1.5rem; margin-top: 1rem; }
  button[type=submit]:disabled { opacity: 0.5; }
  .submitted-note { background: #e8f4e8; border: 1px solid #4a4; padding: 1rem; }
`;

const CLIENT_SCRIPT = `
  const state = { defects: [] };

  function payloadFromForm() {
    const review = {
      schema_version: 1,
      review_id: REVIEW_ID,
      reviewer_id: ASSIGNMENT.reviewer_id,
      record_id: ASSIGNMENT.record_id,
      mode: ASSIGNMENT.mode,
      checklist: {},
      educational_tier: [],
      fidelity: [],
      alignment: [],
    };
    for (const dim of SCHEMA.dimensions) {
      review.checklist[dim.key] = [];
      for (let i = 0; i < SCHEMA.iterations; i++) {
        const chosen = document.querySelector(
          'input[name="chk-' + dim.key + '-' + i + '"]:checked');
        const verdict = chosen ? chosen.value : null;
        const entry = { verdict: verdict };
        if (verdict === "fail") {
          const box = document.querySelector('[name="exp-' + dim.key + '-' + i + '"]');
          entry.explanation = box ? box.value : null;
        }
        review.checklist[dim.key].push(entry);
      }
    }
    for (let i = 0; i < SCHEMA.iterations; i++) {
      const tier = document.querySelector('[name="tier-' + i + '"]');
      review.educational_tier.push(tier && tier.value ? tier.value : null);
      for (const scale of ["fidelity", "alignment"]) {
        const chosen = document.querySelector(
          'input[name="' + scale + '-' + i + '"]:checked');
        review[scale].push(chosen ? parseInt(chosen.value, 10) : null);
      }
    }
    return review;
  }

  function refresh() {
    for (const dim of SCHEMA.dimensions) {
      for (let i = 0; i < SCHEMA.iterations; i++) {
        const chosen = document.querySelector(
          'input[name="chk-' + dim.key + '-' + i + '"]:checked');
        const wrap = document.getElementById('exp-wrap-' + dim.key + '-' + i);
        if (wrap) wrap.classList.toggle('hidden', !chosen || chosen.value !== 'fail');
      }
    }
    const errors = validateReview(payloadFromForm());
    document.getElementById('submit').disabled = errors.length > 0;
    return errors;
  }

  async function submitReview(event) {
    event.preventDefault();
    const errorsBox = document.getElementById('errors');
    errorsBox.textContent = '';
    const response = await fetch(SUBMIT_URL, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payloadFromForm()),
    });
    if (response.status === 201) {
      document.getElementById('form').classList.add('hidden');
      document.getElementById('done').classList.remove('hidden');
      return;
    }
    const body = await response.json().catch(() => ({}));
    if (response.status === 409) {
      errorsBox.textContent = 'This assignment was already submitted.';
      return;
    }
    const items = (body.errors || []).map((e) => e.field + ': ' + e.message);
    errorsBox.innerHTML = '<ul><li>' + items.join('</li><li>') + '</li></ul>';
  }

  function reportDefect(imageId) {
    state.defects.push(imageId);
    const list = document.getElementById('defects');
    const item = document.createElement('li');
    item.textContent = 'Image defect reported: ' + imageId;
    list.appendChild(item);
  }

  document.addEventListener('DOMContentLoaded', () => {
    for (const img of document.querySelectorAll('img[data-image-id]')) {
      img.addEventListener('error', () => {
        const holder = document.createElement('div');
        holder.className = 'placeholder';
        holder.textContent = 'image unavailable';
        const report = document.createElement('button');
        report.type = 'button';
        report.textContent = 'Report missing image';
        report.addEventListener('click', () => reportDefect(img.dataset.imageId));
        img.replaceWith(holder);
        holder.insertAdjacentElement('afterend', report);
      });
    }
    document.getElementById('form').addEventListener('input', refresh);
    document.getElementById('form').addEventListener('change', refresh);
    document.getElementById('form').addEventListener('submit', submitReview);
    refresh();
  });
`;

function iterationPanel(assignment: Assignment, index: number): string {
  const iteration = assignment.iterations[index];
  if (!iteration) {
    return `<section><h2>Iteration ${index + 1}</h2><p class="placeholder">no images recorded</p></section>`;
  }
  const frames = iteration.images
    .map(
      (image) => `
        <figure>
          <img src="${escapeHtml(image.url)}" alt="${escapeHtml(image.stage)} frame"
               data-image-id="${escapeHtml(image.image_id)}">
          <figcaption>${escapeHtml(image.stage)}</figcaption>
        </figure>`,
    )
    .join("");
  return `
    <section>
      <h2>Iteration ${iteration.iteration}</h2>
      <div class="frames">${frames}</div>
    </section>`;
}

export function renderReviewForm(assignment: Assignment): string {
  const schema = formSchema(assignment.mode);
  const reviewId = reviewIdFor(assignment.assignment_id);

  const checklist = schema.dimensions
    .map(
      (dim) => `
      <div class="dimension">
        <strong>${escapeHtml(dim.label)}</strong>
        <p class="prompt">Free of: ${escapeHtml(dim.prompt)}</p>
        <div class="per-iteration">
          ${[0, 1]
            .map(
              (i) => `
            <div>
              <em>Iteration ${i + 1}</em><br>
              <label><input type="radio" name="chk-${dim.key}-${i}" value="pass"> Yes — issue not present</label><br>
              <label><input type="radio" name="chk-${dim.key}-${i}" value="fail"> No — issue present</label>
              <div id="exp-wrap-${dim.key}-${i}" class="hidden">
                <label>Describe the issue (required):
                  <textarea name="exp-${dim.key}-${i}"></textarea>
                </label>
              </div>
            </div>`,
            )
            .join("")}
        </div>
      </div>`,
    )
    .join("");

  const tiers = [0, 1]
    .map(
      (i) => `
      <label>Iteration ${i + 1}:
        <select name="tier-${i}">
          <option value="">choose…</option>
          ${schema.tiers
            .map((tier) => `<option value="${tier.value}">${escapeHtml(tier.label)}</option>`)
            .join("")}
        </select>
      </label>`,
    )
    .join("<br>");

  const likert = schema.likert
    .map(
      (scale) => `
      <div class="dimension">
        <strong>${escapeHtml(scale.label)}</strong>
        ${[0, 1]
          .map(
            (i) => `
          <div class="likert-row">
            <span>Iteration ${i + 1}</span>
            <span class="anchor">1 = ${escapeHtml(scale.low)}</span>
            ${[1, 2, 3, 4, 5]
              .map(
                (value) =>
                  `<label><input type="radio" name="${scale.key}-${i}" value="${value}"> ${value}</label>`,
              )
              .join("")}
            <span class="anchor">5 = ${escapeHtml(scale.high)}</span>
          </div>`,
          )
          .join("")}
      </div>`,
    )
    .join("");

  const modeLabel = assignment.mode === "temporal" ? "temporal sequence" : "single-pass image";
  return `<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Review ${escapeHtml(assignment.assignment_id)}</title>
<style>${PAGE_STYLE}</style>
</head>
<body>
<h1>Hazard image review — ${escapeHtml(modeLabel)}</h1>
<p>Reviewer <strong>${escapeHtml(assignment.reviewer_id)}</strong> ·
   record <strong>${escapeHtml(assignment.record_id)}</strong> ·
   event keyword <strong>${escapeHtml(assignment.event_keyword)}</strong></p>

<h2>Incident narrative</h2>
<div class="narrative">${escapeHtml(assignment.narrative)}</div>

<div class="iterations">
  ${iterationPanel(assignment, 0)}
  ${iterationPanel(assignment, 1)}
</div>
<ul id="defects" class="defects"></ul>

<form id="form">
  <h2>1. Issue checklist</h2>
  ${checklist}

  <h2>2. Educational utility</h2>
  <div class="dimension">${tiers}</div>

  <h2>3. Scalar ratings</h2>
  ${likert}

  <div id="errors" class="errors"></div>
  <button id="submit" type="submit" disabled>Submit review</button>
</form>
<div id="done" class="submitted-note hidden">Review stored. You can close this tab.</div>

<script>
const ASSIGNMENT = ${escapeScriptJson({
    assignment_id: assignment.assignment_id,
    reviewer_id: assignment.reviewer_id,
    record_id: assignment.record_id,
    mode: assignment.mode,
  })};
const SCHEMA = ${escapeScriptJson(schema)};
const REVIEW_ID = ${escapeScriptJson(reviewId)};
const SUBMIT_URL = ${escapeScriptJson(`/api/assignments/${assignment.assignment_id}/review`)};
const validateReview = ${validatorSource()};
${CLIENT_SCRIPT}
</script>
</body>
</html>`;
}

export function renderSubmittedPage(assignment: Assignment): string {
  return `<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>Already submitted</title><style>${PAGE_STYLE}</style></head>
<body>
<h1>Already submitted</h1>
<p class="submitted-note">Assignment ${escapeHtml(assignment.assignment_id)} already has a stored
review; each assignment is submittable exactly once.</p>
</body>
</html>`;
}
