"""Command-line entry point.

Subcommands cover the full workflow: ingest a severe-injury CSV, sample a
working set, generate scene descriptions and images, embed queries and
gallery frames, score retrieval and reviewer reliability, price a run, and
assemble a combined report.

Exit codes: 0 on success, 1 for any toolkit error (the message is printed
to stderr verbatim), 2 for command-line usage errors.

Credentials for hosted backends are read from the HAZVIZ_API_KEY
environment variable only; there is deliberately no command-line flag for
secrets. The bundled mock backends need no credentials.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .backends import get_image_backend, get_text_backend
from .embedding_eval import (
    EmbeddingVector,
    MockEmbeddingBackend,
    format_retrieval_table,
    format_study_table,
    preprocess_query_text,
    read_embedding_store,
    run_similarity_study,
    similarity_matrix,
    write_embedding_store,
)
from .errors import CorrespondenceError, HazvizError
from .expert_eval import (
    RATINGS_SCHEMA_VERSION,
    build_utility_report,
    format_agreement_table,
    format_likert_table,
    format_panel_table,
    format_recovery_table,
    format_tier_table,
    ingest_ratings,
)
from .generation import (
    MODES,
    BackendConfig,
    GenerationManifest,
    PriceTable,
    estimate_cost,
    run_batch,
)
from .ingest import (
    SamplePlan,
    keyword_histogram,
    parse_sir_csv,
    read_record_store,
    sample_records,
    write_record_store,
)
from .prompts import TEMPLATE_IDS, verify_templates

logger = logging.getLogger("hazviz")

# The retrieval gallery holds one representative frame per generated set:
# the single frame for single-pass sets, the monitoring frame for temporal.
GALLERY_STAGES: dict[str, frozenset[str]] = {
    "single_pass": frozenset({"SP"}),
    "temporal": frozenset({"T4"}),
    "overall": frozenset({"SP", "T4"}),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hazviz",
        description="Turn severe-injury narratives into hazard imagery and score the results.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--verbose", action="store_true", help="log debug detail instead of plain progress"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a severe-injury CSV into a record store")
    p.add_argument("--csv", required=True, help="input CSV path")
    p.add_argument("--out", required=True, help="record store to write (line-delimited JSON)")
    p.add_argument("--naics", default="", help="keep only records with this NAICS code")

    p = sub.add_parser("sample", help="draw a seeded random sample from a record store")
    p.add_argument("--records", required=True, help="record store to sample from")
    p.add_argument("--n", required=True, type=int, help="sample size")
    p.add_argument("--seed", required=True, type=int, help="random seed")
    p.add_argument("--naics", default="", help="restrict to this NAICS code before sampling")
    p.add_argument("--out", required=True, help="record store to write")

    p = sub.add_parser("generate", help="generate scene descriptions and images for a store")
    p.add_argument("--records", required=True, help="record store to generate from")
    p.add_argument("--out-dir", required=True, help="run directory for images and manifest")
    p.add_argument("--modes", nargs="+", choices=MODES, default=list(MODES))
    p.add_argument("--iterations", type=int, default=2, help="independent sets per record/mode")
    p.add_argument("--text-backend", default="mock", help="registered text backend id")
    p.add_argument("--image-backend", default="mock", help="registered image backend id")
    p.add_argument("--parallelism", type=int, default=1, help="concurrent record units")

    p = sub.add_parser("embed", help="embed record queries and gallery frames")
    p.add_argument("--records", required=True, help="record store the run was generated from")
    p.add_argument("--manifest", required=True, help="run manifest (names the gallery frames)")
    p.add_argument("--out", required=True, help="embedding store to write")

    p = sub.add_parser("eval-retrieval", help="score retrieval and similarity separation")
    p.add_argument("--embeddings", required=True, help="embedding store")
    p.add_argument("--manifest", required=True, help="run manifest (maps frames to records)")
    p.add_argument("--out", help="also write the full report as JSON here")

    p = sub.add_parser("eval-expert", help="score expert review reliability and utility")
    p.add_argument("--ratings", required=True, help="ratings file (line-delimited JSON)")
    p.add_argument("--out", help="also write the full report as JSON here")

    p = sub.add_parser("cost", help="price a run from its manifest")
    p.add_argument("--manifest", required=True, help="run manifest")
    p.add_argument("--prices", help="price table JSON (defaults to the bundled table)")

    p = sub.add_parser("report", help="assemble a combined plain-text report")
    p.add_argument("--manifest", required=True, help="run manifest")
    p.add_argument("--records", help="record store, for the keyword histogram")
    p.add_argument("--ratings", help="ratings file, for the expert review sections")
    p.add_argument("--embeddings", help="embedding store, for the retrieval sections")
    p.add_argument("--prices", help="price table JSON (defaults to the bundled table)")
    p.add_argument("--out", help="write the report here instead of stdout")

    sub.add_parser("templates-verify", help="check bundled prompt templates against checksums")
    return parser


# ---------------------------------------------------------------------------
# Subcommand bodies


def _cmd_ingest(args: argparse.Namespace) -> int:
    result = parse_sir_csv(args.csv)
    for row_error in result.row_errors:
        print(f"row error at line {row_error.line}: {row_error.message}", file=sys.stderr)
    records = list(result.records)
    if args.naics:
        from .ingest import filter_records

        records = filter_records(records, args.naics)
    count = write_record_store(records, args.out)
    print(f"ingested {count} records ({len(result.row_errors)} row errors) -> {args.out}")
    for category, n in keyword_histogram(records).items():
        print(f"  {category}: {n}")
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    records = read_record_store(args.records)
    plan = SamplePlan(n=args.n, seed=args.seed, naics_filter=args.naics)
    sampled = sample_records(records, plan)
    write_record_store(sampled, args.out)
    print(f"sampled {len(sampled)} of {len(records)} records (seed {args.seed}) -> {args.out}")
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    records = read_record_store(args.records)
    config = BackendConfig(
        text_backend_id=args.text_backend,
        image_backend_id=args.image_backend,
        parallelism=args.parallelism,
    )
    manifest = run_batch(
        records,
        args.modes,
        args.iterations,
        get_text_backend(args.text_backend),
        get_image_backend(args.image_backend),
        config,
        args.out_dir,
    )
    manifest.validate_dag()
    print(f"run {manifest.run_id}: {manifest.image_count()} images, "
          f"{len(manifest.failures)} failures -> {args.out_dir}")
    for failure in manifest.failures:
        print(
            f"  failure: {failure.record_id} {failure.mode} iteration "
            f"{failure.iteration} stage {failure.stage} ({failure.kind}): {failure.message}",
            file=sys.stderr,
        )
    return 0


def _gallery_frames(manifest: GenerationManifest, stages: frozenset[str]):
    return [image for image in manifest.iter_images() if image.stage in stages]


def _cmd_embed(args: argparse.Namespace) -> int:
    records = {record.record_id: record for record in read_record_store(args.records)}
    manifest = GenerationManifest.load(args.manifest)
    backend = MockEmbeddingBackend()
    queries = {
        record_id: preprocess_query_text(record, token_counter=backend.count_tokens)
        for record_id, record in records.items()
    }
    vectors: list[EmbeddingVector] = [
        backend.embed_text(record_id, query.text) for record_id, query in queries.items()
    ]
    fallbacks = [record_id for record_id, query in queries.items() if query.used_fallback]
    for record_id in fallbacks:
        logger.warning("record %s: cleaned abstract was empty, used event description", record_id)
    for image in _gallery_frames(manifest, GALLERY_STAGES["overall"]):
        query = queries.get(image.record_id)
        if query is None:
            raise CorrespondenceError(
                f"gallery frame {image.image_id} belongs to {image.record_id}, "
                "which is not in the record store"
            )
        vectors.append(backend.embed_image(image.image_id, query.text))
    count = write_embedding_store(vectors, args.out)
    print(f"embedded {len(queries)} queries and {count - len(queries)} gallery frames -> {args.out}")
    return 0


def _retrieval_rows(embeddings_path: str, manifest_path: str):
    """Per-group similarity studies and retrieval reports from stored vectors."""
    vectors = read_embedding_store(embeddings_path)
    manifest = GenerationManifest.load(manifest_path)
    text_vectors = [vector for vector in vectors if vector.kind == "text"]
    image_by_id = {vector.owner_id: vector for vector in vectors if vector.kind == "image"}
    results = []
    for group in ("single_pass", "temporal", "overall"):
        frames = [
            image
            for image in _gallery_frames(manifest, GALLERY_STAGES[group])
            if image.image_id in image_by_id
        ]
        if not frames:
            continue
        gallery_ids = [image.image_id for image in frames]
        correspondence: dict[str, list[str]] = {}
        for image in frames:
            correspondence.setdefault(image.record_id, []).append(image.image_id)
        group_queries = [vector for vector in text_vectors if vector.owner_id in correspondence]
        if not group_queries:
            continue
        matrix = similarity_matrix(group_queries, [image_by_id[g] for g in gallery_ids])
        study, report = run_similarity_study(
            matrix,
            correspondence,
            group=group,
            query_ids=[vector.owner_id for vector in group_queries],
            gallery_ids=gallery_ids,
        )
        results.append((group, study, report))
    if not results:
        raise CorrespondenceError("no gallery frames with stored embeddings to evaluate")
    return results


def _cmd_eval_retrieval(args: argparse.Namespace) -> int:
    results = _retrieval_rows(args.embeddings, args.manifest)
    print(format_retrieval_table([(group, report) for group, _, report in results]))
    print()
    print(format_study_table([study for _, study, _ in results]))
    if args.out:
        payload = {
            group: {"study": study.to_json_dict(), "retrieval": report.to_json_dict()}
            for group, study, report in results
        }
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"\nwrote {args.out}")
    return 0


def _expert_reports(ratings_path: str):
    reviews = ingest_ratings(ratings_path)
    present = [mode for mode in MODES if any(review.mode == mode for review in reviews)]
    return [build_utility_report(reviews, mode) for mode in present]


def _cmd_eval_expert(args: argparse.Namespace) -> int:
    reports = _expert_reports(args.ratings)
    print(format_panel_table(reports))
    print()
    print(format_agreement_table(reports))
    print()
    print(format_tier_table(reports))
    print()
    print(format_recovery_table(reports))
    print()
    print(format_likert_table(reports))
    if args.out:
        payload = {
            "schema_version": RATINGS_SCHEMA_VERSION,
            "reports": {report.mode: report.to_json_dict() for report in reports},
        }
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"\nwrote {args.out}")
    return 0


def _cmd_cost(args: argparse.Namespace) -> int:
    manifest = GenerationManifest.load(args.manifest)
    prices = PriceTable.load(args.prices) if args.prices else PriceTable.default()
    report = estimate_cost(manifest, prices)
    print(f"text tokens up:    {report.text_tokens_up:>12}  ${report.text_up_cost:.4f}")
    print(f"text tokens down:  {report.text_tokens_down:>12}  ${report.text_down_cost:.4f}")
    print(f"image tokens up:   {report.image_tokens_up:>12}  ${report.image_up_cost:.4f}")
    print(f"image tokens down: {report.image_tokens_down:>12}  ${report.image_down_cost:.4f}")
    print(f"images:            {report.image_count:>12}  ${report.image_fee_cost:.4f}")
    print(f"total: ${report.total:.2f}")
    if report.incomplete:
        print("note: some calls reported no token counts; the total is a floor")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    manifest = GenerationManifest.load(args.manifest)
    prices = PriceTable.load(args.prices) if args.prices else PriceTable.default()
    cost = estimate_cost(manifest, prices)
    sections: list[str] = []
    sections.append(
        f"# Run {manifest.run_id}\n\n"
        f"created: {manifest.created_at}\n"
        f"entries: {len(manifest.entries)}  images: {manifest.image_count()}  "
        f"failures: {len(manifest.failures)}\n"
        f"estimated cost: ${cost.total:.2f}"
        + ("  (incomplete token accounting)" if cost.incomplete else "")
    )
    if args.records:
        records = read_record_store(args.records)
        histogram = keyword_histogram(records)
        lines = "\n".join(f"- {category}: {count}" for category, count in histogram.items())
        sections.append(f"## Event keyword categories ({len(records)} records)\n\n{lines}")
    if args.embeddings:
        results = _retrieval_rows(args.embeddings, args.manifest)
        sections.append(
            "## Retrieval\n\n"
            + format_retrieval_table([(group, report) for group, _, report in results])
            + "\n\n"
            + format_study_table([study for _, study, _ in results])
        )
    if args.ratings:
        reports = _expert_reports(args.ratings)
        sections.append(
            "## Expert review\n\n"
            + format_panel_table(reports)
            + "\n\n"
            + format_agreement_table(reports)
            + "\n\n"
            + format_tier_table(reports)
            + "\n\n"
            + format_recovery_table(reports)
            + "\n\n"
            + format_likert_table(reports)
        )
    text = "\n\n".join(sections) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_templates_verify(_: argparse.Namespace) -> int:
    verify_templates()
    print(f"verified {len(TEMPLATE_IDS)} templates against bundled checksums")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "sample": _cmd_sample,
    "generate": _cmd_generate,
    "embed": _cmd_embed,
    "eval-retrieval": _cmd_eval_retrieval,
    "eval-expert": _cmd_eval_expert,
    "cost": _cmd_cost,
    "report": _cmd_report,
    "templates-verify": _cmd_templates_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:  # argparse uses 2 for usage errors, 0 for --help
        return int(exit_.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (HazvizError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
