"""Embedding-based retrieval evaluation.

Query texts are cleaned incident narratives; gallery entries are generated
images embedded in the same space (CLIP-style, 768-d, unit length, cosine
similarity = dot product). Temporal sequences contribute only their final
hazard frame to the gallery. The statistics here are deliberately
self-contained: the Mann-Whitney exact mode, effect size, and retrieval
metrics each have closed contracts that tests check against independent
brute-force oracles.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BoundsError,
    CorrespondenceError,
    NormalizationError,
    SchemaError,
    StatisticsError,
)
from .ingest import IncidentRecord

EMBED_DIM = 768
NORM_TOLERANCE = 1e-6
TOKEN_BUDGET = 77
# Words-to-tokens fallback when no backend tokenizer is available: tokens is
# roughly 1.3x the whitespace word count, rounded up.
TOKENS_PER_WORD = 1.3

STORE_SCHEMA_NOTE = "one JSON object per line: owner_id, kind, values[768]"


# ---------------------------------------------------------------------------
# Query text preprocessing


@dataclass(frozen=True)
class CleanupPattern:
    name: str
    pattern: str
    replacement: str


def load_cleanup_patterns(path: str | Path | None = None) -> list[CleanupPattern]:
    """Load abstract-cleanup regexes; defaults ship as a package asset."""
    if path is None:
        raw = (
            resources.files(__package__)
            .joinpath("assets/query_cleanup_patterns.json")
            .read_text(encoding="utf-8")
        )
    else:
        raw = Path(path).read_text(encoding="utf-8")
    entries = json.loads(raw)
    return [
        CleanupPattern(entry["name"], entry["pattern"], entry["replacement"])
        for entry in entries
    ]


def clean_abstract(text: str, patterns: Sequence[CleanupPattern] | None = None) -> str:
    """Strip report boilerplate: date/time preambles, employee identifiers,
    and company names with legal suffixes; then normalize whitespace."""
    if patterns is None:
        patterns = load_cleanup_patterns()
    cleaned = text
    for entry in patterns:
        cleaned = re.sub(entry.pattern, entry.replacement, cleaned)
    cleaned = re.sub(r"\s+", " ", cleaned)
    cleaned = re.sub(r"\s+([,.;:])", r"\1", cleaned)
    return cleaned.strip()


@dataclass(frozen=True)
class QueryText:
    record_id: str
    text: str
    token_estimate: int
    used_fallback: bool = False


def estimate_tokens(text: str) -> int:
    """Fallback token count: ceil(whitespace words x 1.3)."""
    words = len(text.split())
    return math.ceil(words * TOKENS_PER_WORD)


def preprocess_query_text(
    record: IncidentRecord,
    *,
    patterns: Sequence[CleanupPattern] | None = None,
    token_counter: Callable[[str], int] | None = None,
    budget: int = TOKEN_BUDGET,
) -> QueryText:
    """Build the retrieval query for a record.

    The query is event_description + ". " + cleaned abstract, truncated at
    whole-word boundaries to the encoder's token budget. Token counting is
    delegated to the backend when one is supplied; otherwise the word-based
    heuristic applies. If cleaning empties the abstract, the query falls
    back to the event description alone and is flagged.
    """
    counter = token_counter or estimate_tokens
    cleaned = clean_abstract(record.abstract_text, patterns)
    description = record.event_description.strip()
    used_fallback = False
    if cleaned:
        separator = " " if description.endswith(".") else ". "
        text = description + separator + cleaned if description else cleaned
    else:
        text = description
        used_fallback = True
    words = text.split()
    while words and counter(" ".join(words)) > budget:
        words.pop()
    text = " ".join(words)
    return QueryText(
        record_id=record.record_id,
        text=text,
        token_estimate=counter(text) if text else 0,
        used_fallback=used_fallback,
    )


# ---------------------------------------------------------------------------
# Vectors and similarity


@dataclass(frozen=True)
class EmbeddingVector:
    """A unit-length 768-d embedding tied to its owning query or image."""

    owner_id: str
    kind: str  # "text" | "image"
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.shape != (EMBED_DIM,):
            raise NormalizationError(
                f"{self.owner_id}: expected {EMBED_DIM} components, got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise NormalizationError(f"{self.owner_id}: vector has non-finite components")
        norm = float(np.linalg.norm(values))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise NormalizationError(
                f"{self.owner_id}: vector norm {norm:.8f} is not 1 within {NORM_TOLERANCE}"
            )


def normalize(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Scale a vector to unit L2 norm; zero or non-finite input is an error."""
    array = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(array)):
        raise NormalizationError("cannot normalize a vector with non-finite components")
    norm = float(np.linalg.norm(array))
    if norm == 0.0:
        raise NormalizationError("cannot normalize the zero vector")
    return array / norm


def similarity_matrix(
    text_vectors: Sequence[EmbeddingVector],
    image_vectors: Sequence[EmbeddingVector],
) -> np.ndarray:
    """Queries x gallery cosine similarities (dot products of unit vectors)."""
    if not text_vectors or not image_vectors:
        raise BoundsError("similarity_matrix needs at least one query and one gallery vector")
    queries = np.stack([vector.values for vector in text_vectors])
    gallery = np.stack([vector.values for vector in image_vectors])
    return queries @ gallery.T


def _resolve_correspondence(
    correspondence: Mapping[str, Iterable[str]],
    query_ids: Sequence[str],
    gallery_ids: Sequence[str],
) -> dict[int, set[int]]:
    gallery_index = {gallery_id: i for i, gallery_id in enumerate(gallery_ids)}
    resolved: dict[int, set[int]] = {}
    for q, query_id in enumerate(query_ids):
        targets = set(correspondence.get(query_id, ()))
        if not targets:
            raise CorrespondenceError(f"query {query_id!r} has no correct gallery targets")
        unknown = [t for t in targets if t not in gallery_index]
        if unknown:
            raise CorrespondenceError(
                f"query {query_id!r} references unknown gallery id(s): {', '.join(sorted(unknown))}"
            )
        resolved[q] = {gallery_index[t] for t in targets}
    return resolved


def partition_pairs(
    matrix: np.ndarray,
    correspondence: Mapping[str, Iterable[str]],
    query_ids: Sequence[str] | None = None,
    gallery_ids: Sequence[str] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Split Q x G similarities into matched and mismatched samples.

    matched holds the similarity at every (query, correct target) cell;
    mismatched holds all remaining cells, so the two sizes always sum to
    Q x G. Ids default to stringified row/column indices.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    n_queries, n_gallery = matrix.shape
    if query_ids is None:
        query_ids = [str(i) for i in range(n_queries)]
    if gallery_ids is None:
        gallery_ids = [str(j) for j in range(n_gallery)]
    resolved = _resolve_correspondence(correspondence, query_ids, gallery_ids)
    matched: list[float] = []
    mismatched: list[float] = []
    for q in range(n_queries):
        targets = resolved[q]
        for g in range(n_gallery):
            (matched if g in targets else mismatched).append(float(matrix[q, g]))
    return np.asarray(matched), np.asarray(mismatched)


# ---------------------------------------------------------------------------
# Distribution statistics


@dataclass(frozen=True)
class DistributionSummary:
    n: int
    mean: float
    sd: float
    percentiles: dict[int, float]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "sd": self.sd,
            "percentiles": {str(k): v for k, v in self.percentiles.items()},
        }


PERCENTILE_POINTS: tuple[int, ...] = (5, 25, 50, 75, 95)


def distribution_summary(sample: Sequence[float] | np.ndarray) -> DistributionSummary:
    """n, mean, sample sd (n-1 denominator), and linearly interpolated
    percentiles for one similarity sample."""
    values = np.asarray(sample, dtype=np.float64)
    if values.size < 2:
        raise StatisticsError("distribution summary needs at least two values")
    levels = np.percentile(values, PERCENTILE_POINTS)
    return DistributionSummary(
        n=int(values.size),
        mean=float(values.mean()),
        sd=float(values.std(ddof=1)),
        percentiles={point: float(level) for point, level in zip(PERCENTILE_POINTS, levels)},
    )


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Fractional ranking: tied values share the average of their ranks."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p_one_tailed: float
    method: str  # "exact" | "normal"


# Above this product of sample sizes the exact null is replaced by the
# tie- and continuity-corrected normal approximation.
EXACT_PAIR_LIMIT = 200


def _exact_greater_p(n1: int, n2: int, u_observed: float) -> float:
    """P(U >= u_observed) under the exact rank-permutation null.

    The null enumerates all C(n1+n2, n1) assignments of the untied ranks
    1..N to the first sample (the classical exact-table distribution); the
    observed U itself is computed with average ranks, so minor ties are
    evaluated against the tie-free null. Counting uses a subset-sum dynamic
    program, equivalent to full enumeration.
    """
    n_total = n1 + n2
    max_sum = (n_total + (n_total - n1 + 1)) * n1 // 2
    dp = np.zeros((n1 + 1, max_sum + 1), dtype=np.float64)
    dp[0, 0] = 1.0
    for rank in range(1, n_total + 1):
        for k in range(min(n1, rank), 0, -1):
            dp[k, rank:] += dp[k - 1, : max_sum + 1 - rank]
    total = float(dp[n1].sum())
    r_observed = u_observed + n1 * (n1 + 1) / 2.0
    threshold = math.ceil(r_observed)
    if threshold > max_sum:
        return 0.0
    return float(dp[n1, threshold:].sum()) / total


def mann_whitney_u(
    greater_sample: Sequence[float] | np.ndarray,
    lesser_sample: Sequence[float] | np.ndarray,
) -> MannWhitneyResult:
    """One-tailed Mann-Whitney U test, alternative: first sample is greater.

    U is the first sample's statistic from rank sums with average ranks for
    ties (U1 = R1 - n1(n1+1)/2, so U(a,b) + U(b,a) = n1*n2). When
    n1*n2 <= 200 the p-value comes from the exact rank-permutation null;
    otherwise from the normal approximation with tie correction
    sigma^2 = n1*n2/12 * ((N+1) - sum(t^3 - t)/(N(N-1))) and a 0.5
    continuity correction.
    """
    a = np.asarray(greater_sample, dtype=np.float64)
    b = np.asarray(lesser_sample, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise StatisticsError("mann_whitney_u needs non-empty samples")
    n1, n2 = int(a.size), int(b.size)
    pooled = np.concatenate([a, b])
    ranks = _average_ranks(pooled)
    r1 = float(ranks[:n1].sum())
    u1 = r1 - n1 * (n1 + 1) / 2.0

    if n1 * n2 <= EXACT_PAIR_LIMIT:
        return MannWhitneyResult(u=u1, p_one_tailed=_exact_greater_p(n1, n2, u1), method="exact")

    n_total = n1 + n2
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(tie_counts.astype(np.float64) ** 3 - tie_counts))
    sigma_sq = n1 * n2 / 12.0 * ((n_total + 1) - tie_term / (n_total * (n_total - 1)))
    mean_u = n1 * n2 / 2.0
    if sigma_sq <= 0:
        # All pooled values identical: U sits exactly at its mean.
        return MannWhitneyResult(u=u1, p_one_tailed=1.0 if u1 <= mean_u else 0.0, method="normal")
    z = (u1 - mean_u - 0.5) / math.sqrt(sigma_sq)
    p = 0.5 * math.erfc(z / math.sqrt(2.0))
    return MannWhitneyResult(u=u1, p_one_tailed=p, method="normal")


def cohens_d_from_moments(mean_a: float, sd_a: float, mean_b: float, sd_b: float) -> float:
    """d = (mean_a - mean_b) / sqrt((sd_a^2 + sd_b^2) / 2)."""
    pooled = math.sqrt((sd_a**2 + sd_b**2) / 2.0)
    if pooled == 0.0:
        raise StatisticsError("Cohen's d is undefined when both samples have zero variance")
    return (mean_a - mean_b) / pooled


def cohens_d(
    sample_a: Sequence[float] | np.ndarray,
    sample_b: Sequence[float] | np.ndarray,
) -> float:
    """Cohen's d with the balanced pooled SD; sample sds use n-1."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise StatisticsError("cohens_d needs at least two values per sample")
    return cohens_d_from_moments(
        float(a.mean()), float(a.std(ddof=1)), float(b.mean()), float(b.std(ddof=1))
    )


# ---------------------------------------------------------------------------
# Retrieval metrics


@dataclass(frozen=True)
class RetrievalReport:
    n_queries: int
    mrr: float
    recall_at: dict[int, float]
    first_hit_ranks: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "n_queries": self.n_queries,
            "mrr": self.mrr,
            "recall_at": {str(k): v for k, v in self.recall_at.items()},
            "first_hit_ranks": list(self.first_hit_ranks),
        }


def retrieval_metrics(
    matrix: np.ndarray,
    correspondence: Mapping[str, Iterable[str]],
    ks: Sequence[int] = (1, 5, 10),
    query_ids: Sequence[str] | None = None,
    gallery_ids: Sequence[str] | None = None,
) -> RetrievalReport:
    """MRR and recall@k over a similarity matrix.

    Each query ranks the whole gallery by descending similarity, ties broken
    by ascending gallery index; the reciprocal rank uses the best-ranked
    correct target. recall@k is the fraction of queries whose first hit
    lands within the top k, so it is non-decreasing in k.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if any(k < 1 for k in ks):
        raise BoundsError("recall cutoffs must be positive")
    n_queries, n_gallery = matrix.shape
    if query_ids is None:
        query_ids = [str(i) for i in range(n_queries)]
    if gallery_ids is None:
        gallery_ids = [str(j) for j in range(n_gallery)]
    resolved = _resolve_correspondence(correspondence, query_ids, gallery_ids)
    first_hits: list[int] = []
    for q in range(n_queries):
        # Stable sort on negated scores keeps ascending gallery index within
        # tied scores.
        order = np.argsort(-matrix[q], kind="stable")
        targets = resolved[q]
        rank = next(pos + 1 for pos, g in enumerate(order) if int(g) in targets)
        first_hits.append(rank)
    ranks = np.asarray(first_hits, dtype=np.float64)
    return RetrievalReport(
        n_queries=n_queries,
        mrr=float((1.0 / ranks).mean()),
        recall_at={int(k): float((ranks <= k).mean()) for k in ks},
        first_hit_ranks=tuple(first_hits),
    )


# ---------------------------------------------------------------------------
# Full study


@dataclass(frozen=True)
class SimilarityStudy:
    """Matched-vs-mismatched separation statistics for one gallery group."""

    group: str
    matched: DistributionSummary
    mismatched: DistributionSummary
    u: float
    p_one_tailed: float
    method: str
    effect_size: float
    separation_sigmas: float

    def to_json_dict(self) -> dict:
        return {
            "group": self.group,
            "matched": self.matched.to_json_dict(),
            "mismatched": self.mismatched.to_json_dict(),
            "u": self.u,
            "p_one_tailed": self.p_one_tailed,
            "method": self.method,
            "effect_size": self.effect_size,
            "separation_sigmas": self.separation_sigmas,
        }


def run_similarity_study(
    matrix: np.ndarray,
    correspondence: Mapping[str, Iterable[str]],
    *,
    group: str = "overall",
    ks: Sequence[int] = (1, 5, 10),
    query_ids: Sequence[str] | None = None,
    gallery_ids: Sequence[str] | None = None,
) -> tuple[SimilarityStudy, RetrievalReport]:
    """Partition pairs, summarize both samples, test separation, and rank."""
    matched, mismatched = partition_pairs(matrix, correspondence, query_ids, gallery_ids)
    matched_summary = distribution_summary(matched)
    mismatched_summary = distribution_summary(mismatched)
    test = mann_whitney_u(matched, mismatched)
    study = SimilarityStudy(
        group=group,
        matched=matched_summary,
        mismatched=mismatched_summary,
        u=test.u,
        p_one_tailed=test.p_one_tailed,
        method=test.method,
        effect_size=cohens_d(matched, mismatched),
        separation_sigmas=(matched_summary.mean - mismatched_summary.mean)
        / mismatched_summary.sd,
    )
    report = retrieval_metrics(matrix, correspondence, ks, query_ids, gallery_ids)
    return study, report


# ---------------------------------------------------------------------------
# Embedding store and mock backend


def write_embedding_store(vectors: Iterable[EmbeddingVector], path: str | Path) -> int:
    """Write vectors as line-delimited JSON: owner_id, kind, values[768]."""
    path = Path(path)
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        for vector in vectors:
            handle.write(
                json.dumps(
                    {
                        "owner_id": vector.owner_id,
                        "kind": vector.kind,
                        "values": [float(v) for v in vector.values],
                    }
                )
                + "\n"
            )
            count += 1
    return count


def read_embedding_store(path: str | Path) -> list[EmbeddingVector]:
    path = Path(path)
    vectors: list[EmbeddingVector] = []
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            try:
                vectors.append(
                    EmbeddingVector(obj["owner_id"], obj["kind"], np.asarray(obj["values"]))
                )
            except KeyError as exc:
                raise SchemaError(f"{path}:{line_no}: store line is missing {exc}")
    return vectors


class MockEmbeddingBackend:
    """Deterministic text/image embeddings for desk-scale demo runs.

    Text vectors are hashed bag-of-words features. Image vectors are built
    from the owning record's query text plus seeded noise, so matched pairs
    genuinely score higher than mismatched ones and downstream studies show
    realistic separation without a hosted encoder.
    """

    backend_id = "mock"

    def __init__(self, noise_scale: float = 0.9) -> None:
        self.noise_scale = noise_scale

    @staticmethod
    def count_tokens(text: str) -> int:
        return estimate_tokens(text)

    @staticmethod
    def _hash_features(text: str) -> np.ndarray:
        features = np.zeros(EMBED_DIM, dtype=np.float64)
        for token in text.lower().split():
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            index = int.from_bytes(digest[:4], "big") % EMBED_DIM
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            features[index] += sign
        if not np.any(features):
            features[0] = 1.0
        return features

    def embed_text(self, owner_id: str, text: str) -> EmbeddingVector:
        return EmbeddingVector(owner_id, "text", normalize(self._hash_features(text)))

    def embed_image(self, owner_id: str, source_text: str) -> EmbeddingVector:
        base = self._hash_features(source_text)
        seed = int.from_bytes(hashlib.sha256(owner_id.encode("utf-8")).digest()[:8], "big")
        noise = np.random.default_rng(seed).normal(0.0, self.noise_scale, EMBED_DIM)
        return EmbeddingVector(owner_id, "image", normalize(normalize(base) + noise / math.sqrt(EMBED_DIM)))


# ---------------------------------------------------------------------------
# Report formatting


def _pct(value: float) -> str:
    return str(Decimal(repr(value * 100)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def format_retrieval_table(rows: Sequence[tuple[str, RetrievalReport]]) -> str:
    """Plain-text group/n/MRR/recall table for one or more gallery groups."""
    ks = sorted(rows[0][1].recall_at) if rows else []
    header = ["Group", "n", "MRR"] + [f"R@{k}" for k in ks]
    lines = ["  ".join(f"{cell:<12}" for cell in header).rstrip()]
    for name, report in rows:
        cells = [name, str(report.n_queries), f"{report.mrr:.3f}"]
        cells += [f"{_pct(report.recall_at[k])}%" for k in ks]
        lines.append("  ".join(f"{cell:<12}" for cell in cells).rstrip())
    return "\n".join(lines)


def format_study_table(studies: Sequence[SimilarityStudy]) -> str:
    """Plain-text matched-vs-mismatched separation table."""
    header = [
        "Group", "n_mis", "mis_mean", "mis_sd", "n_match", "match_mean",
        "match_sd", "sep_sigma", "cohens_d", "p_value",
    ]
    lines = ["  ".join(f"{cell:<10}" for cell in header).rstrip()]
    for study in studies:
        cells = [
            study.group,
            str(study.mismatched.n),
            f"{study.mismatched.mean:.3f}",
            f"{study.mismatched.sd:.3f}",
            str(study.matched.n),
            f"{study.matched.mean:.3f}",
            f"{study.matched.sd:.3f}",
            f"{study.separation_sigmas:.2f}",
            f"{study.effect_size:.3f}",
            f"{study.p_one_tailed:.3g}",
        ]
        lines.append("  ".join(f"{cell:<10}" for cell in cells).rstrip())
    return "\n".join(lines)
