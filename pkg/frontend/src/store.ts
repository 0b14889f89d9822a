/** Append-only ratings store in the wire format the evaluation engine ingests.
 *
 * One JSON object per line. Appends run synchronously on the single server
 * thread, so concurrent submissions serialize and the first write for a
 * review id wins; later attempts raise DuplicateReviewError and leave the
 * file untouched.
 */

import fs from "node:fs";
import path from "node:path";

export class DuplicateReviewError extends Error {}

export interface WireReview {
  schema_version: number;
  review_id: string;
  reviewer_id: string;
  record_id: string;
  mode: string;
  checklist: Record<string, { verdict: string; explanation?: string | null }[]>;
  educational_tier: string[];
  fidelity: number[];
  alignment: number[];
}

export class RatingsStore {
  private readonly storedIds = new Set<string>();

  constructor(readonly filePath: string) {
    fs.mkdirSync(path.dirname(filePath), { recursive: true });
    if (fs.existsSync(filePath)) {
      for (const line of fs.readFileSync(filePath, "utf-8").split("\n")) {
        if (!line.trim()) continue;
        const reviewId = (JSON.parse(line) as WireReview).review_id;
        if (this.storedIds.has(reviewId)) {
          throw new Error(`${filePath}: duplicate review_id ${reviewId} already on disk`);
        }
        this.storedIds.add(reviewId);
      }
    }
  }

  has(reviewId: string): boolean {
    return this.storedIds.has(reviewId);
  }

  count(): number {
    return this.storedIds.size;
  }

  append(review: WireReview): void {
    if (this.storedIds.has(review.review_id)) {
      throw new DuplicateReviewError(`review ${review.review_id} already stored`);
    }
    fs.appendFileSync(this.filePath, JSON.stringify(review) + "\n", "utf-8");
    this.storedIds.add(review.review_id);
  }
}
