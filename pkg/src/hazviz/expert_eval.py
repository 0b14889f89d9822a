"""Expert review ingest and reliability statistics.

Reviews arrive as line-delimited JSON, one review per line. A review covers
one (record, mode) image set and carries two iteration-level assessments:
per-dimension pass/fail verdicts (four checklist dimensions for single-pass
sets, six for temporal), an educational-utility tier, and 1-5 ratings for
photographic fidelity and narrative alignment. Every fail verdict must carry
a non-empty explanation.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InsufficientOverlapError, StatisticsError, ValidationError

RATINGS_SCHEMA_VERSION = 1
ITERATIONS_PER_REVIEW = 2

SINGLE_PASS_DIMENSIONS: tuple[str, ...] = (
    "processing_artifacts",
    "hazard_accuracy",
    "scene_realism",
    "visual_coherence",
)
TEMPORAL_DIMENSIONS: tuple[str, ...] = SINGLE_PASS_DIMENSIONS + (
    "temporal_consistency",
    "hazard_alert_accuracy",
)

TIERS: tuple[str, ...] = ("fully_acceptable", "minor_issues", "major_issues")
ACCEPTABLE_TIERS: frozenset[str] = frozenset({"fully_acceptable", "minor_issues"})

LIKERT_MIN, LIKERT_MAX = 1, 5


def dimensions_for_mode(mode: str) -> tuple[str, ...]:
    if mode == "single_pass":
        return SINGLE_PASS_DIMENSIONS
    if mode == "temporal":
        return TEMPORAL_DIMENSIONS
    raise ValidationError(f"unknown mode: {mode!r}")


@dataclass(frozen=True)
class ChecklistVerdict:
    verdict: str  # "pass" | "fail"
    explanation: str | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


@dataclass(frozen=True)
class ReviewRecord:
    """One reviewer's assessment of one record's image set in one mode."""

    review_id: str
    reviewer_id: str
    record_id: str
    mode: str
    checklist: Mapping[str, tuple[ChecklistVerdict, ...]]
    educational_tier: tuple[str, ...]
    fidelity: tuple[int, ...]
    alignment: tuple[int, ...]


def _validate_review_obj(obj: Mapping, source: str) -> ReviewRecord:
    review_id = obj.get("review_id")
    if not review_id or not isinstance(review_id, str):
        raise ValidationError(f"{source}: review has no review_id")

    def fail(message: str) -> ValidationError:
        return ValidationError(f"{source}: review {review_id!r}: {message}")

    if obj.get("schema_version") != RATINGS_SCHEMA_VERSION:
        raise fail(f"schema_version must be {RATINGS_SCHEMA_VERSION}")
    reviewer_id = obj.get("reviewer_id")
    record_id = obj.get("record_id")
    if not reviewer_id or not isinstance(reviewer_id, str):
        raise fail("reviewer_id is missing or empty")
    if not record_id or not isinstance(record_id, str):
        raise fail("record_id is missing or empty")
    mode = obj.get("mode")
    if mode not in ("single_pass", "temporal"):
        raise fail(f"mode must be single_pass or temporal, got {mode!r}")
    expected_dims = dimensions_for_mode(mode)

    checklist_obj = obj.get("checklist")
    if not isinstance(checklist_obj, Mapping):
        raise fail("checklist must be an object")
    missing = [d for d in expected_dims if d not in checklist_obj]
    extra = [d for d in checklist_obj if d not in expected_dims]
    if missing:
        raise fail(f"checklist is missing dimension(s): {', '.join(missing)}")
    if extra:
        raise fail(f"checklist has unknown dimension(s) for {mode}: {', '.join(sorted(extra))}")
    checklist: dict[str, tuple[ChecklistVerdict, ...]] = {}
    for dimension in expected_dims:
        entries = checklist_obj[dimension]
        if not isinstance(entries, Sequence) or len(entries) != ITERATIONS_PER_REVIEW:
            raise fail(f"{dimension}: expected {ITERATIONS_PER_REVIEW} iteration verdicts")
        verdicts = []
        for index, entry in enumerate(entries):
            verdict = entry.get("verdict") if isinstance(entry, Mapping) else None
            if verdict not in ("pass", "fail"):
                raise fail(f"{dimension}[{index}]: verdict must be pass or fail")
            explanation = entry.get("explanation")
            if verdict == "fail" and not (isinstance(explanation, str) and explanation.strip()):
                raise fail(f"{dimension}[{index}]: fail verdicts need a non-empty explanation")
            verdicts.append(ChecklistVerdict(verdict, explanation))
        checklist[dimension] = tuple(verdicts)

    tiers = obj.get("educational_tier")
    if not isinstance(tiers, Sequence) or len(tiers) != ITERATIONS_PER_REVIEW:
        raise fail(f"educational_tier must list {ITERATIONS_PER_REVIEW} tiers")
    for tier in tiers:
        if tier not in TIERS:
            raise fail(f"unknown educational tier {tier!r}")

    scales: dict[str, tuple[int, ...]] = {}
    for scale in ("fidelity", "alignment"):
        values = obj.get(scale)
        if not isinstance(values, Sequence) or len(values) != ITERATIONS_PER_REVIEW:
            raise fail(f"{scale} must list {ITERATIONS_PER_REVIEW} ratings")
        for value in values:
            if not isinstance(value, int) or isinstance(value, bool) or not (
                LIKERT_MIN <= value <= LIKERT_MAX
            ):
                raise fail(f"{scale} ratings must be integers in {LIKERT_MIN}..{LIKERT_MAX}")
        scales[scale] = tuple(values)

    return ReviewRecord(
        review_id=review_id,
        reviewer_id=reviewer_id,
        record_id=record_id,
        mode=mode,
        checklist=checklist,
        educational_tier=tuple(tiers),
        fidelity=scales["fidelity"],
        alignment=scales["alignment"],
    )


def ingest_ratings(path: str | Path) -> list[ReviewRecord]:
    """Load and validate a ratings file; errors name the offending review."""
    path = Path(path)
    reviews: list[ReviewRecord] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{line_no}: invalid JSON: {exc}") from None
            review = _validate_review_obj(obj, f"{path}:{line_no}")
            if review.review_id in seen:
                raise ValidationError(
                    f"{path}:{line_no}: duplicate review_id {review.review_id!r}"
                )
            seen.add(review.review_id)
            reviews.append(review)
    return reviews


def _reviews_for_mode(reviews: Iterable[ReviewRecord], mode: str | None) -> list[ReviewRecord]:
    if mode is None:
        return list(reviews)
    dimensions_for_mode(mode)  # validates the mode name
    return [review for review in reviews if review.mode == mode]


def pass_rates(reviews: Iterable[ReviewRecord], mode: str | None = None) -> dict[str, float]:
    """Percent of iteration-level verdicts that pass, per dimension.

    Pooled over reviewers and iterations; mode=None pools both modes, in
    which case each dimension's rate is the rating-count-weighted mean of
    its per-mode rates.
    """
    selected = _reviews_for_mode(reviews, mode)
    totals: dict[str, int] = {}
    passes: dict[str, int] = {}
    for review in selected:
        for dimension, verdicts in review.checklist.items():
            for verdict in verdicts:
                totals[dimension] = totals.get(dimension, 0) + 1
                if verdict.passed:
                    passes[dimension] = passes.get(dimension, 0) + 1
    return {
        dimension: passes.get(dimension, 0) / total * 100.0
        for dimension, total in totals.items()
    }


def cohens_kappa(labels_a: Sequence, labels_b: Sequence) -> float:
    """Cohen's kappa: (p_o - p_e) / (1 - p_e).

    p_o is the observed agreement share; p_e the chance agreement from the
    marginal label distributions. Degenerate marginals (p_e = 1, both raters
    constant on the same label) return 1.0 when agreement is perfect and 0.0
    otherwise, keeping the statistic defined on uniform fixtures.
    """
    if len(labels_a) != len(labels_b):
        raise StatisticsError("cohens_kappa needs label lists of equal length")
    n = len(labels_a)
    if n == 0:
        raise StatisticsError("cohens_kappa needs at least one rated item")
    categories = sorted(set(labels_a) | set(labels_b), key=repr)
    # Exact rational arithmetic: agreement shares are ratios of integer
    # counts, so the returned float is the correctly rounded true value.
    p_o = Fraction(sum(1 for a, b in zip(labels_a, labels_b) if a == b), n)
    p_e = sum(
        Fraction(sum(1 for a in labels_a if a == cat), n)
        * Fraction(sum(1 for b in labels_b if b == cat), n)
        for cat in categories
    )
    if p_e == 1:
        return 1.0 if p_o == 1 else 0.0
    return float((p_o - p_e) / (1 - p_e))


def landis_koch_label(kappa: float) -> str:
    """Verbal agreement strength for a kappa value.

    Bands: at or below 0.20 slight, through 0.40 fair, through 0.60
    moderate, through 0.80 substantial, above that almost perfect.
    """
    if kappa <= 0.20:
        return "slight"
    if kappa <= 0.40:
        return "fair"
    if kappa <= 0.60:
        return "moderate"
    if kappa <= 0.80:
        return "substantial"
    return "almost_perfect"


@dataclass(frozen=True)
class DimensionStats:
    dimension: str
    mode: str
    pass_rate: float
    kappa: float
    agreement_label: str
    n_pairs: int

    def to_json_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "mode": self.mode,
            "pass_rate": self.pass_rate,
            "kappa": self.kappa,
            "agreement_label": self.agreement_label,
            "n_pairs": self.n_pairs,
        }


def _reviews_by_reviewer_and_record(
    reviews: Sequence[ReviewRecord],
) -> dict[str, dict[str, ReviewRecord]]:
    by_reviewer: dict[str, dict[str, ReviewRecord]] = {}
    for review in reviews:
        by_reviewer.setdefault(review.reviewer_id, {})[review.record_id] = review
    return by_reviewer


def lights_kappa(
    reviews: Sequence[ReviewRecord], dimension: str, mode: str
) -> DimensionStats:
    """Light's kappa: the unweighted mean of pairwise Cohen's kappas.

    Each reviewer pair is scored over the items both rated, where an item is
    one (record, iteration) and the two iterations of a review count as
    separate items. Pairs with no shared items contribute nothing; if no
    pair overlaps at all the statistic is undefined and raises.
    """
    selected = [r for r in _reviews_for_mode(reviews, mode) if dimension in r.checklist]
    by_reviewer = _reviews_by_reviewer_and_record(selected)
    kappas: list[float] = []
    for reviewer_a, reviewer_b in itertools.combinations(sorted(by_reviewer), 2):
        shared = sorted(set(by_reviewer[reviewer_a]) & set(by_reviewer[reviewer_b]))
        if not shared:
            continue
        labels_a: list[str] = []
        labels_b: list[str] = []
        for record_id in shared:
            for iteration in range(ITERATIONS_PER_REVIEW):
                labels_a.append(by_reviewer[reviewer_a][record_id].checklist[dimension][iteration].verdict)
                labels_b.append(by_reviewer[reviewer_b][record_id].checklist[dimension][iteration].verdict)
        kappas.append(cohens_kappa(labels_a, labels_b))
    if not kappas:
        raise InsufficientOverlapError(
            f"no reviewer pair shares co-rated items for {dimension} ({mode})"
        )
    kappa = sum(kappas) / len(kappas)
    return DimensionStats(
        dimension=dimension,
        mode=mode,
        pass_rate=pass_rates(selected, mode).get(dimension, 0.0),
        kappa=kappa,
        agreement_label=landis_koch_label(kappa),
        n_pairs=len(kappas),
    )


@dataclass(frozen=True)
class TierShares:
    """Iteration-level educational tier distribution, in percent."""

    n_ratings: int
    fully_acceptable: float
    minor_issues: float
    major_issues: float
    acceptability: float  # fully_acceptable + minor_issues, from raw counts

    def to_json_dict(self) -> dict:
        return {
            "n_ratings": self.n_ratings,
            "fully_acceptable": self.fully_acceptable,
            "minor_issues": self.minor_issues,
            "major_issues": self.major_issues,
            "acceptability": self.acceptability,
        }


def educational_distribution(reviews: Iterable[ReviewRecord], mode: str) -> TierShares:
    """Tier shares over all iteration-level tier ratings for a mode."""
    counts = {tier: 0 for tier in TIERS}
    total = 0
    for review in _reviews_for_mode(reviews, mode):
        for tier in review.educational_tier:
            counts[tier] += 1
            total += 1
    if total == 0:
        raise StatisticsError(f"no {mode} reviews to summarize")
    acceptable = counts["fully_acceptable"] + counts["minor_issues"]
    return TierShares(
        n_ratings=total,
        fully_acceptable=counts["fully_acceptable"] / total * 100.0,
        minor_issues=counts["minor_issues"] / total * 100.0,
        major_issues=counts["major_issues"] / total * 100.0,
        acceptability=acceptable / total * 100.0,
    )


def fail_rate_by_tier(
    reviews: Iterable[ReviewRecord], mode: str
) -> dict[str, dict[str, float]]:
    """Percent of iteration-ratings in each tier that fail each dimension.

    The denominator for a (dimension, tier) cell is the number of
    iteration-ratings assigned that tier; tiers nobody used are omitted.
    """
    selected = _reviews_for_mode(reviews, mode)
    if not selected:
        raise StatisticsError(f"no {mode} reviews to summarize")
    dimensions = dimensions_for_mode(mode)
    tier_totals = {tier: 0 for tier in TIERS}
    fails = {dimension: {tier: 0 for tier in TIERS} for dimension in dimensions}
    for review in selected:
        for iteration in range(ITERATIONS_PER_REVIEW):
            tier = review.educational_tier[iteration]
            tier_totals[tier] += 1
            for dimension in dimensions:
                if not review.checklist[dimension][iteration].passed:
                    fails[dimension][tier] += 1
    return {
        dimension: {
            tier: fails[dimension][tier] / tier_totals[tier] * 100.0
            for tier in TIERS
            if tier_totals[tier] > 0
        }
        for dimension in dimensions
    }


@dataclass(frozen=True)
class LikertSummary:
    """Pooled 1-5 scale moments plus mean absolute inter-rater difference.

    The difference statistic is the mean over co-rated items of the mean
    absolute difference across reviewer pairs on that item (an item is one
    (record, iteration)); None when no item has two reviewers.
    """

    n_ratings: int
    fidelity_mean: float
    fidelity_sd: float
    alignment_mean: float
    alignment_sd: float
    fidelity_delta: float | None
    alignment_delta: float | None

    def to_json_dict(self) -> dict:
        return {
            "n_ratings": self.n_ratings,
            "fidelity_mean": self.fidelity_mean,
            "fidelity_sd": self.fidelity_sd,
            "alignment_mean": self.alignment_mean,
            "alignment_sd": self.alignment_sd,
            "fidelity_delta": self.fidelity_delta,
            "alignment_delta": self.alignment_delta,
        }


def _mean_and_sample_sd(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    variance = sum((value - mean) ** 2 for value in values) / (n - 1)
    return mean, variance**0.5


def _mean_abs_pair_difference(
    reviews: Sequence[ReviewRecord], scale: str
) -> float | None:
    by_item: dict[tuple[str, int], list[int]] = {}
    for review in reviews:
        values = getattr(review, scale)
        for iteration in range(ITERATIONS_PER_REVIEW):
            by_item.setdefault((review.record_id, iteration), []).append(values[iteration])
    item_means: list[float] = []
    for values in by_item.values():
        if len(values) < 2:
            continue
        diffs = [abs(a - b) for a, b in itertools.combinations(values, 2)]
        item_means.append(sum(diffs) / len(diffs))
    if not item_means:
        return None
    return sum(item_means) / len(item_means)


def likert_summary(reviews: Iterable[ReviewRecord], mode: str) -> LikertSummary:
    selected = _reviews_for_mode(reviews, mode)
    if not selected:
        raise StatisticsError(f"no {mode} reviews to summarize")
    fidelity = [value for review in selected for value in review.fidelity]
    alignment = [value for review in selected for value in review.alignment]
    fidelity_mean, fidelity_sd = _mean_and_sample_sd(fidelity)
    alignment_mean, alignment_sd = _mean_and_sample_sd(alignment)
    return LikertSummary(
        n_ratings=len(fidelity),
        fidelity_mean=fidelity_mean,
        fidelity_sd=fidelity_sd,
        alignment_mean=alignment_mean,
        alignment_sd=alignment_sd,
        fidelity_delta=_mean_abs_pair_difference(selected, "fidelity"),
        alignment_delta=_mean_abs_pair_difference(selected, "alignment"),
    )


@dataclass(frozen=True)
class RecoveryShares:
    """Per-review iteration agreement classes and the recovery rate.

    A review's two iteration tiers classify it as both-acceptable, mixed, or
    both-rejected (acceptable = fully_acceptable or minor_issues). Recovery
    is mixed / (mixed + both_rejected) * 100: the share of first-iteration
    rejections a second independent attempt recovers. None when no review
    has a rejected iteration pair to recover from.
    """

    n_reviews: int
    both_acceptable: float
    mixed: float
    both_rejected: float
    recovery_rate: float | None

    def to_json_dict(self) -> dict:
        return {
            "n_reviews": self.n_reviews,
            "both_acceptable": self.both_acceptable,
            "mixed": self.mixed,
            "both_rejected": self.both_rejected,
            "recovery_rate": self.recovery_rate,
        }


def stochastic_recovery(reviews: Iterable[ReviewRecord], mode: str) -> RecoveryShares:
    selected = _reviews_for_mode(reviews, mode)
    if not selected:
        raise StatisticsError(f"no {mode} reviews to summarize")
    both_acceptable = mixed = both_rejected = 0
    for review in selected:
        acceptable = [tier in ACCEPTABLE_TIERS for tier in review.educational_tier]
        if all(acceptable):
            both_acceptable += 1
        elif any(acceptable):
            mixed += 1
        else:
            both_rejected += 1
    n = len(selected)
    denominator = mixed + both_rejected
    return RecoveryShares(
        n_reviews=n,
        both_acceptable=both_acceptable / n * 100.0,
        mixed=mixed / n * 100.0,
        both_rejected=both_rejected / n * 100.0,
        recovery_rate=(mixed / denominator * 100.0) if denominator else None,
    )


@dataclass(frozen=True)
class UtilityReport:
    """Everything the expert evaluation reports for one mode."""

    mode: str
    n_reviews: int
    pass_rates: dict[str, float]
    dimension_stats: tuple[DimensionStats, ...]
    tier_shares: TierShares
    fail_by_tier: dict[str, dict[str, float]]
    likert: LikertSummary
    recovery: RecoveryShares

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_reviews": self.n_reviews,
            "pass_rates": self.pass_rates,
            "dimension_stats": [stats.to_json_dict() for stats in self.dimension_stats],
            "tier_shares": self.tier_shares.to_json_dict(),
            "fail_by_tier": self.fail_by_tier,
            "likert": self.likert.to_json_dict(),
            "recovery": self.recovery.to_json_dict(),
        }


def build_utility_report(reviews: Sequence[ReviewRecord], mode: str) -> UtilityReport:
    selected = _reviews_for_mode(reviews, mode)
    stats = tuple(
        lights_kappa(selected, dimension, mode) for dimension in dimensions_for_mode(mode)
    )
    return UtilityReport(
        mode=mode,
        n_reviews=len(selected),
        pass_rates=pass_rates(selected, mode),
        dimension_stats=stats,
        tier_shares=educational_distribution(selected, mode),
        fail_by_tier=fail_rate_by_tier(selected, mode),
        likert=likert_summary(selected, mode),
        recovery=stochastic_recovery(selected, mode),
    )


# ---------------------------------------------------------------------------
# Plain-text tables


def fmt1(value: float | None) -> str:
    """One decimal place, half-up, matching how percentages are reported."""
    if value is None:
        return "-"
    return str(Decimal(repr(value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def _row(cells: Sequence[str], widths: Sequence[int]) -> str:
    return "  ".join(f"{cell:<{width}}" for cell, width in zip(cells, widths)).rstrip()


def format_panel_table(reports: Sequence[UtilityReport]) -> str:
    """Pass rate and fail-in-major-tier share per dimension and mode."""
    widths = (24, 18, 18)
    lines = []
    for report in reports:
        lines.append(f"mode: {report.mode} (n_reviews={report.n_reviews})")
        lines.append(_row(("Dimension", "Pass Rate %", "Fail in Major %"), widths))
        for dimension in dimensions_for_mode(report.mode):
            fail_major = report.fail_by_tier[dimension].get("major_issues")
            lines.append(
                _row(
                    (
                        dimension,
                        fmt1(report.pass_rates[dimension]),
                        fmt1(fail_major),
                    ),
                    widths,
                )
            )
        lines.append("")
    return "\n".join(lines).rstrip()


def format_agreement_table(reports: Sequence[UtilityReport]) -> str:
    """Light's kappa and agreement label per dimension and mode."""
    widths = (24, 12, 10, 16)
    lines = [_row(("Dimension", "Mode", "Kappa", "Agreement"), widths)]
    for report in reports:
        for stats in report.dimension_stats:
            lines.append(
                _row(
                    (stats.dimension, stats.mode, f"{stats.kappa:.3f}", stats.agreement_label),
                    widths,
                )
            )
    return "\n".join(lines)


def format_tier_table(reports: Sequence[UtilityReport]) -> str:
    """Tier distribution, acceptability, and per-tier fail rates."""
    lines = []
    for report in reports:
        shares = report.tier_shares
        lines.append(
            f"mode: {report.mode}  tiers % "
            f"fully={fmt1(shares.fully_acceptable)} "
            f"minor={fmt1(shares.minor_issues)} "
            f"major={fmt1(shares.major_issues)} "
            f"acceptability={fmt1(shares.acceptability)}"
        )
        widths = (24,) + (14,) * len(TIERS)
        lines.append(_row(("Fail % by tier",) + TIERS, widths))
        for dimension in dimensions_for_mode(report.mode):
            cells = [dimension] + [
                fmt1(report.fail_by_tier[dimension].get(tier)) for tier in TIERS
            ]
            lines.append(_row(cells, widths))
        lines.append("")
    return "\n".join(lines).rstrip()


def format_recovery_table(reports: Sequence[UtilityReport]) -> str:
    widths = (12, 18, 10, 16, 14)
    lines = [
        _row(
            ("Mode", "Both acceptable", "Mixed", "Both rejected", "Recovery %"),
            widths,
        )
    ]
    for report in reports:
        recovery = report.recovery
        lines.append(
            _row(
                (
                    report.mode,
                    fmt1(recovery.both_acceptable),
                    fmt1(recovery.mixed),
                    fmt1(recovery.both_rejected),
                    fmt1(recovery.recovery_rate),
                ),
                widths,
            )
        )
    return "\n".join(lines)


def format_likert_table(reports: Sequence[UtilityReport]) -> str:
    widths = (12, 16, 16, 16, 16)
    lines = [
        _row(
            ("Mode", "Fidelity", "Alignment", "Fidelity |d|", "Alignment |d|"),
            widths,
        )
    ]
    for report in reports:
        likert = report.likert
        lines.append(
            _row(
                (
                    report.mode,
                    f"{likert.fidelity_mean:.2f}+/-{likert.fidelity_sd:.2f}",
                    f"{likert.alignment_mean:.2f}+/-{likert.alignment_sd:.2f}",
                    "-" if likert.fidelity_delta is None else f"{likert.fidelity_delta:.2f}",
                    "-" if likert.alignment_delta is None else f"{likert.alignment_delta:.2f}",
                ),
                widths,
            )
        )
    return "\n".join(lines)
