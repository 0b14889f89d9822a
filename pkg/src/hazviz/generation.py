"""Generation orchestrator: description stages, image stages, manifests, cost.

Two pipelines per record. The single-pass mode makes one text call and one
image call. The temporal mode makes four text calls (T1; T2 from T1; T3 and
T4 each from T2, independent of each other) and four image calls whose
conditioning DAG is T2 on T1, and T3 and T4 each on T2. Failures isolate
along those edges: a failed stage aborts exactly its dependents, never its
siblings, and batch runs always continue past per-record failures.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .backends import (
    BackendCallError,
    CallContext,
    ImageBackend,
    ImageResult,
    TextBackend,
)
from .errors import (
    BoundsError,
    GenerationError,
    HazvizError,
    ModeMismatchError,
    WarningParseError,
)
from .ingest import IncidentRecord
from .prompts import (
    SceneDescriptionSet,
    compose_text_prompt,
    compose_visual_prompt,
    parse_warning_spec,
)

MANIFEST_SCHEMA_VERSION = 1

MODES: tuple[str, ...] = ("single_pass", "temporal")

# Conditioning edges of the temporal image DAG: stage -> the stage whose
# image it modifies. T3 and T4 both branch from T2.
IMAGE_CONDITIONING: Mapping[str, str | None] = {
    "T1": None,
    "T2": "T1",
    "T3": "T2",
    "T4": "T2",
}


@dataclass(frozen=True)
class BackendConfig:
    """Run-level backend settings recorded in every manifest."""

    text_backend_id: str = "mock"
    image_backend_id: str = "mock"
    text_temperature: float = 0.0
    image_temperature: float | None = None
    max_retries: int = 3
    timeout: float = 60.0
    retry_base_delay: float = 0.5
    parallelism: int = 1

    def __post_init__(self) -> None:
        if self.text_temperature < 0:
            raise BoundsError("text_temperature must be non-negative")
        if self.image_temperature is not None and self.image_temperature < 0:
            raise BoundsError("image_temperature must be non-negative")
        if self.max_retries < 0:
            raise BoundsError("max_retries must be non-negative")
        if self.parallelism < 1:
            raise BoundsError("parallelism must be at least 1")

    def to_json_dict(self) -> dict:
        return {
            "text_backend_id": self.text_backend_id,
            "image_backend_id": self.image_backend_id,
            "text_temperature": self.text_temperature,
            "image_temperature": self.image_temperature,
            "max_retries": self.max_retries,
            "timeout": self.timeout,
            "retry_base_delay": self.retry_base_delay,
            "parallelism": self.parallelism,
        }


@dataclass(frozen=True)
class GeneratedImage:
    """One produced frame plus the provenance needed to rebuild the DAG."""

    image_id: str
    record_id: str
    mode: str
    iteration: int
    stage: str
    width: int
    height: int
    bytes_path: str  # relative to the run directory
    prompt_digest: str
    conditioned_on: str | None = None
    created_at: str = ""

    def to_json_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "record_id": self.record_id,
            "mode": self.mode,
            "iteration": self.iteration,
            "stage": self.stage,
            "width": self.width,
            "height": self.height,
            "bytes_path": self.bytes_path,
            "prompt_digest": self.prompt_digest,
            "conditioned_on": self.conditioned_on,
            "created_at": self.created_at,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "GeneratedImage":
        return cls(**{key: obj[key] for key in (
            "image_id", "record_id", "mode", "iteration", "stage", "width",
            "height", "bytes_path", "prompt_digest", "conditioned_on", "created_at",
        )})


@dataclass(frozen=True)
class StageFailure:
    """One failed or aborted stage; kind is 'generation', 'dependency_aborted',
    or 'warning_parse'."""

    record_id: str
    mode: str
    iteration: int
    stage: str
    kind: str
    message: str

    def to_json_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "mode": self.mode,
            "iteration": self.iteration,
            "stage": self.stage,
            "kind": self.kind,
            "message": self.message,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "StageFailure":
        return cls(**{key: obj[key] for key in (
            "record_id", "mode", "iteration", "stage", "kind", "message",
        )})


@dataclass(frozen=True)
class BackendCall:
    """Token accounting for one text or image call."""

    stage: str
    backend_id: str
    tokens_up: int | None
    tokens_down: int | None

    def to_json_dict(self) -> dict:
        return {
            "stage": self.stage,
            "backend_id": self.backend_id,
            "tokens_up": self.tokens_up,
            "tokens_down": self.tokens_down,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "BackendCall":
        return cls(
            stage=obj["stage"],
            backend_id=obj["backend_id"],
            tokens_up=obj["tokens_up"],
            tokens_down=obj["tokens_down"],
        )


@dataclass
class DescriptionOutcome:
    """Result of the description stages for one record/mode/iteration."""

    descriptions: SceneDescriptionSet
    failures: list[StageFailure] = field(default_factory=list)
    text_calls: list[BackendCall] = field(default_factory=list)
    raw_responses: dict[str, str] = field(default_factory=dict)


@dataclass
class TemporalImages:
    images: list[GeneratedImage] = field(default_factory=list)
    image_calls: list[BackendCall] = field(default_factory=list)
    failures: list[StageFailure] = field(default_factory=list)


@dataclass
class ManifestEntry:
    record_id: str
    mode: str
    iteration: int
    descriptions: SceneDescriptionSet
    text_calls: list[BackendCall] = field(default_factory=list)
    image_calls: list[BackendCall] = field(default_factory=list)
    images: list[GeneratedImage] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "mode": self.mode,
            "iteration": self.iteration,
            "descriptions": self.descriptions.to_json_dict(),
            "text_calls": [call.to_json_dict() for call in self.text_calls],
            "image_calls": [call.to_json_dict() for call in self.image_calls],
            "images": [image.to_json_dict() for image in self.images],
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "ManifestEntry":
        return cls(
            record_id=obj["record_id"],
            mode=obj["mode"],
            iteration=obj["iteration"],
            descriptions=SceneDescriptionSet.from_json_dict(obj["descriptions"]),
            text_calls=[BackendCall.from_json_dict(c) for c in obj["text_calls"]],
            image_calls=[BackendCall.from_json_dict(c) for c in obj["image_calls"]],
            images=[GeneratedImage.from_json_dict(i) for i in obj["images"]],
        )


@dataclass
class GenerationManifest:
    """Everything a run produced: config snapshot, entries, failure log."""

    run_id: str
    created_at: str
    config: dict
    entries: list[ManifestEntry] = field(default_factory=list)
    failures: list[StageFailure] = field(default_factory=list)
    schema_version: int = MANIFEST_SCHEMA_VERSION

    def image_count(self) -> int:
        return sum(len(entry.images) for entry in self.entries)

    def iter_images(self) -> Iterable[GeneratedImage]:
        for entry in self.entries:
            yield from entry.images

    def validate_dag(self) -> None:
        """Check that every conditioning edge follows the mandated DAG."""
        for entry in self.entries:
            by_stage = {image.stage: image for image in entry.images}
            for image in entry.images:
                if image.mode == "single_pass":
                    expected_parent = None
                else:
                    expected_parent = IMAGE_CONDITIONING[image.stage]
                if expected_parent is None:
                    if image.conditioned_on is not None:
                        raise HazvizError(
                            f"{image.image_id} must not be conditioned on another image"
                        )
                    continue
                parent = by_stage.get(expected_parent)
                if parent is None or image.conditioned_on != parent.image_id:
                    raise HazvizError(
                        f"{image.image_id} must be conditioned on its {expected_parent} sibling"
                    )

    def to_json_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "run_id": self.run_id,
            "created_at": self.created_at,
            "config": self.config,
            "entries": [entry.to_json_dict() for entry in self.entries],
            "failures": [failure.to_json_dict() for failure in self.failures],
        }

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(
            json.dumps(self.to_json_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
        return path

    @classmethod
    def load(cls, path: str | Path) -> "GenerationManifest":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            run_id=obj["run_id"],
            created_at=obj["created_at"],
            config=obj["config"],
            entries=[ManifestEntry.from_json_dict(e) for e in obj["entries"]],
            failures=[StageFailure.from_json_dict(f) for f in obj["failures"]],
            schema_version=obj["schema_version"],
        )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _with_retries(
    call: Callable[[], object],
    *,
    config: BackendConfig,
    stage: str,
    sleep: Callable[[float], None] = time.sleep,
):
    """Run a backend call with exponential backoff; raise GenerationError
    tagged with the stage once max_retries extra attempts are exhausted."""
    last: Exception | None = None
    for attempt in range(config.max_retries + 1):
        try:
            return call()
        except BackendCallError as exc:
            last = exc
            if attempt < config.max_retries:
                sleep(config.retry_base_delay * (2**attempt))
    raise GenerationError(f"stage {stage} failed after retries: {last}", stage=stage)


def generate_descriptions(
    record: IncidentRecord,
    mode: str,
    text_backend: TextBackend,
    config: BackendConfig,
    *,
    iteration: int = 1,
) -> DescriptionOutcome:
    """Run the description stage(s) for one record in one mode.

    Single-pass makes one call; temporal walks T1 -> T2 -> {T3, T4}. A stage
    failure is recorded and its dependent stages are aborted with a cause
    chain, but independent siblings still run. Raw responses are kept so the
    manifest records exactly what each call returned.
    """
    if mode not in MODES:
        raise ModeMismatchError(f"unknown mode: {mode!r}")
    descriptions = SceneDescriptionSet(mode=mode)
    outcome = DescriptionOutcome(descriptions=descriptions)

    def run_stage(stage: str) -> str | None:
        context = CallContext(record.record_id, mode, iteration, stage)
        prompt = compose_text_prompt(stage, record, priors=descriptions)
        try:
            result = _with_retries(
                lambda: text_backend.generate_text(
                    prompt, temperature=config.text_temperature, context=context
                ),
                config=config,
                stage=stage,
            )
        except GenerationError as exc:
            outcome.failures.append(
                StageFailure(record.record_id, mode, iteration, stage, "generation", str(exc))
            )
            return None
        outcome.text_calls.append(
            BackendCall(stage, text_backend.backend_id, result.tokens_up, result.tokens_down)
        )
        outcome.raw_responses[stage] = result.text
        return result.text

    if mode == "single_pass":
        descriptions.r_sp = run_stage("SP")
        return outcome

    descriptions.r_t1 = run_stage("T1")
    if descriptions.r_t1 is None:
        for stage in ("T2", "T3", "T4"):
            outcome.failures.append(
                StageFailure(
                    record.record_id, mode, iteration, stage,
                    "dependency_aborted", "T1 description unavailable",
                )
            )
        return outcome

    descriptions.r_t2 = run_stage("T2")
    if descriptions.r_t2 is None:
        for stage in ("T3", "T4"):
            outcome.failures.append(
                StageFailure(
                    record.record_id, mode, iteration, stage,
                    "dependency_aborted", "T2 description unavailable",
                )
            )
        return outcome

    # T3 and T4 both hang off T2 and never see each other's output.
    descriptions.r_t3 = run_stage("T3")
    descriptions.r_t4 = run_stage("T4")
    if descriptions.r_t3 is not None:
        try:
            descriptions.warning = parse_warning_spec(descriptions.r_t3)
        except WarningParseError as exc:
            outcome.failures.append(
                StageFailure(
                    record.record_id, mode, iteration, "T3", "warning_parse",
                    f"{exc}; raw text: {exc.raw_text!r}",
                )
            )
    return outcome


def _image_id(record_id: str, mode: str, iteration: int, stage: str) -> str:
    return f"{record_id}_{mode}_{iteration}_{stage}"


def _run_image_stage(
    stage: str,
    descriptions: SceneDescriptionSet,
    image_backend: ImageBackend,
    config: BackendConfig,
    *,
    record_id: str,
    mode: str,
    iteration: int,
    run_dir: Path,
    conditioning: bytes | None,
    conditioned_on: str | None,
) -> tuple[GeneratedImage, BackendCall, bytes]:
    prompt = compose_visual_prompt(stage, descriptions)
    context = CallContext(record_id, mode, iteration, stage)
    result: ImageResult = _with_retries(
        lambda: image_backend.generate_image(
            prompt,
            conditioning=conditioning,
            temperature=config.image_temperature,
            context=context,
        ),
        config=config,
        stage=stage,
    )
    image_id = _image_id(record_id, mode, iteration, stage)
    rel_path = f"images/{image_id}.png"
    target = run_dir / rel_path
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(result.data)
    image = GeneratedImage(
        image_id=image_id,
        record_id=record_id,
        mode=mode,
        iteration=iteration,
        stage=stage,
        width=result.width,
        height=result.height,
        bytes_path=rel_path,
        prompt_digest=hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
        conditioned_on=conditioned_on,
        created_at=_now(),
    )
    call = BackendCall(stage, image_backend.backend_id, result.tokens_up, result.tokens_down)
    return image, call, result.data


def generate_single_pass_image(
    descriptions: SceneDescriptionSet,
    image_backend: ImageBackend,
    config: BackendConfig,
    *,
    record_id: str,
    iteration: int,
    run_dir: str | Path,
) -> tuple[GeneratedImage, BackendCall]:
    """Render the one single-pass frame; no conditioning image is involved."""
    if descriptions.mode != "single_pass":
        raise ModeMismatchError(
            f"single-pass image requested for a {descriptions.mode!r} description set"
        )
    descriptions.validate()
    image, call, _ = _run_image_stage(
        "SP",
        descriptions,
        image_backend,
        config,
        record_id=record_id,
        mode="single_pass",
        iteration=iteration,
        run_dir=Path(run_dir),
        conditioning=None,
        conditioned_on=None,
    )
    return image, call


def _temporal_images(
    descriptions: SceneDescriptionSet,
    image_backend: ImageBackend,
    config: BackendConfig,
    *,
    record_id: str,
    iteration: int,
    run_dir: Path,
) -> TemporalImages:
    """Walk the temporal image DAG, tolerating missing or failed stages."""
    result = TemporalImages()
    produced: dict[str, tuple[GeneratedImage, bytes]] = {}
    # Description prerequisites per visual stage; compose_visual_prompt
    # enforces the same set, this just lets us abort with a clear cause.
    prerequisites: dict[str, list[tuple[str, object]]] = {
        "T1": [("r_t1", descriptions.r_t1)],
        "T2": [("r_t2", descriptions.r_t2), ("r_t4", descriptions.r_t4)],
        "T3": [("r_t3", descriptions.r_t3), ("warning", descriptions.warning)],
        "T4": [("r_t4", descriptions.r_t4)],
    }
    for stage in ("T1", "T2", "T3", "T4"):
        parent_stage = IMAGE_CONDITIONING[stage]
        missing = [name for name, value in prerequisites[stage] if value is None]
        if missing:
            result.failures.append(
                StageFailure(
                    record_id, "temporal", iteration, stage, "dependency_aborted",
                    f"missing description(s): {', '.join(missing)}",
                )
            )
            continue
        if parent_stage is not None and parent_stage not in produced:
            result.failures.append(
                StageFailure(
                    record_id, "temporal", iteration, stage, "dependency_aborted",
                    f"conditioning image {parent_stage} unavailable",
                )
            )
            continue
        if parent_stage is None:
            conditioning, conditioned_on = None, None
        else:
            parent_image, parent_bytes = produced[parent_stage]
            conditioning, conditioned_on = parent_bytes, parent_image.image_id
        try:
            image, call, data = _run_image_stage(
                stage,
                descriptions,
                image_backend,
                config,
                record_id=record_id,
                mode="temporal",
                iteration=iteration,
                run_dir=run_dir,
                conditioning=conditioning,
                conditioned_on=conditioned_on,
            )
        except GenerationError as exc:
            result.failures.append(
                StageFailure(record_id, "temporal", iteration, stage, "generation", str(exc))
            )
            continue
        produced[stage] = (image, data)
        result.images.append(image)
        result.image_calls.append(call)
    return result


def generate_temporal_sequence(
    descriptions: SceneDescriptionSet,
    image_backend: ImageBackend,
    config: BackendConfig,
    *,
    record_id: str,
    iteration: int,
    run_dir: str | Path,
) -> TemporalImages:
    """Render the four temporal frames from a complete description set.

    A stage failure aborts exactly its DAG dependents: losing T1 or T2 kills
    the downstream frames with dependency-aborted markers, while T3 and T4
    only ever depend on T2, never on each other.
    """
    if descriptions.mode != "temporal":
        raise ModeMismatchError(
            f"temporal sequence requested for a {descriptions.mode!r} description set"
        )
    descriptions.validate()
    return _temporal_images(
        descriptions,
        image_backend,
        config,
        record_id=record_id,
        iteration=iteration,
        run_dir=Path(run_dir),
    )


def compute_run_id(
    records: Sequence[IncidentRecord],
    modes: Sequence[str],
    iterations: int,
    config: BackendConfig,
) -> str:
    """Deterministic run id: identical inputs always name the same run."""
    digest = hashlib.sha256()
    for record in records:
        digest.update(record.record_id.encode("utf-8"))
        digest.update(b"\x1f")
    digest.update(",".join(modes).encode("utf-8"))
    digest.update(str(iterations).encode("utf-8"))
    digest.update(json.dumps(config.to_json_dict(), sort_keys=True).encode("utf-8"))
    return "run-" + digest.hexdigest()[:12]


def run_batch(
    records: Sequence[IncidentRecord],
    modes: Sequence[str],
    iterations: int,
    text_backend: TextBackend,
    image_backend: ImageBackend,
    config: BackendConfig,
    out_dir: str | Path,
) -> GenerationManifest:
    """Generate descriptions and images for every record/mode/iteration.

    Descriptions are regenerated independently for each iteration. Partial
    failures are logged and never abort the batch; an unreachable backend is
    detected up front, before any record is touched. A complete two-mode,
    two-iteration run yields 10 images per record (2 single-pass frames plus
    2 four-frame temporal sequences).
    """
    if iterations < 1:
        raise BoundsError("iterations must be at least 1")
    bad = [mode for mode in modes if mode not in MODES]
    if bad:
        raise ModeMismatchError(f"unknown mode(s): {', '.join(bad)}")
    text_backend.check_ready()
    image_backend.check_ready()

    ordered_modes = [mode for mode in MODES if mode in modes]
    run_dir = Path(out_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    manifest = GenerationManifest(
        run_id=compute_run_id(records, ordered_modes, iterations, config),
        created_at=_now(),
        config=config.to_json_dict(),
    )

    units = [
        (record, mode, iteration)
        for record in records
        for mode in ordered_modes
        for iteration in range(1, iterations + 1)
    ]

    def run_unit(unit: tuple[IncidentRecord, str, int]) -> tuple[ManifestEntry, list[StageFailure]]:
        record, mode, iteration = unit
        outcome = generate_descriptions(
            record, mode, text_backend, config, iteration=iteration
        )
        entry = ManifestEntry(
            record_id=record.record_id,
            mode=mode,
            iteration=iteration,
            descriptions=outcome.descriptions,
            text_calls=outcome.text_calls,
        )
        failures = list(outcome.failures)
        if mode == "single_pass":
            if outcome.descriptions.r_sp is not None:
                try:
                    image, call = generate_single_pass_image(
                        outcome.descriptions,
                        image_backend,
                        config,
                        record_id=record.record_id,
                        iteration=iteration,
                        run_dir=run_dir,
                    )
                    entry.images.append(image)
                    entry.image_calls.append(call)
                except GenerationError as exc:
                    failures.append(
                        StageFailure(
                            record.record_id, mode, iteration, "SP", "generation", str(exc)
                        )
                    )
        else:
            temporal = _temporal_images(
                outcome.descriptions,
                image_backend,
                config,
                record_id=record.record_id,
                iteration=iteration,
                run_dir=run_dir,
            )
            entry.images.extend(temporal.images)
            entry.image_calls.extend(temporal.image_calls)
            failures.extend(temporal.failures)
        return entry, failures

    if config.parallelism > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            results = list(pool.map(run_unit, units))
    else:
        results = [run_unit(unit) for unit in units]

    # Assemble in unit order so the manifest is deterministic regardless of
    # scheduling.
    for entry, failures in results:
        manifest.entries.append(entry)
        manifest.failures.extend(failures)
    manifest.save(run_dir / "manifest.json")
    return manifest


@dataclass(frozen=True)
class PriceTable:
    """Per-million token rates plus the flat per-image fee."""

    text_per_million_up: float
    text_per_million_down: float
    image_per_million_up: float
    image_per_million_down: float
    per_image_fee: float

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "PriceTable":
        return cls(
            text_per_million_up=obj["text"]["per_million_up"],
            text_per_million_down=obj["text"]["per_million_down"],
            image_per_million_up=obj["image"]["per_million_up"],
            image_per_million_down=obj["image"]["per_million_down"],
            per_image_fee=obj["image"]["per_image_fee"],
        )

    @classmethod
    def load(cls, path: str | Path) -> "PriceTable":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def default(cls) -> "PriceTable":
        asset = resources.files(__package__).joinpath("assets/default_prices.json")
        return cls.from_json_dict(json.loads(asset.read_text(encoding="utf-8")))


@dataclass(frozen=True)
class CostReport:
    """Itemized run cost: token totals by call type plus the per-image fee.

    total = sum(tokens / 1e6 * rate) over the four token lines, plus
    image_count * per_image_fee. incomplete flags calls that reported no
    token counts; their lines undercount and the total is a floor.
    """

    text_tokens_up: int
    text_tokens_down: int
    image_tokens_up: int
    image_tokens_down: int
    image_count: int
    text_up_cost: float
    text_down_cost: float
    image_up_cost: float
    image_down_cost: float
    image_fee_cost: float
    total: float
    incomplete: bool

    def to_json_dict(self) -> dict:
        return {
            "text_tokens_up": self.text_tokens_up,
            "text_tokens_down": self.text_tokens_down,
            "image_tokens_up": self.image_tokens_up,
            "image_tokens_down": self.image_tokens_down,
            "image_count": self.image_count,
            "text_up_cost": self.text_up_cost,
            "text_down_cost": self.text_down_cost,
            "image_up_cost": self.image_up_cost,
            "image_down_cost": self.image_down_cost,
            "image_fee_cost": self.image_fee_cost,
            "total": self.total,
            "incomplete": self.incomplete,
        }


def estimate_cost(manifest: GenerationManifest, prices: PriceTable) -> CostReport:
    """Price a run from its manifest's token accounting."""
    text_up = text_down = image_up = image_down = 0
    incomplete = False
    for entry in manifest.entries:
        for call in entry.text_calls:
            if call.tokens_up is None or call.tokens_down is None:
                incomplete = True
            text_up += call.tokens_up or 0
            text_down += call.tokens_down or 0
        for call in entry.image_calls:
            if call.tokens_up is None or call.tokens_down is None:
                incomplete = True
            image_up += call.tokens_up or 0
            image_down += call.tokens_down or 0
    image_count = manifest.image_count()
    text_up_cost = text_up / 1e6 * prices.text_per_million_up
    text_down_cost = text_down / 1e6 * prices.text_per_million_down
    image_up_cost = image_up / 1e6 * prices.image_per_million_up
    image_down_cost = image_down / 1e6 * prices.image_per_million_down
    image_fee_cost = image_count * prices.per_image_fee
    return CostReport(
        text_tokens_up=text_up,
        text_tokens_down=text_down,
        image_tokens_up=image_up,
        image_tokens_down=image_down,
        image_count=image_count,
        text_up_cost=text_up_cost,
        text_down_cost=text_down_cost,
        image_up_cost=image_up_cost,
        image_down_cost=image_down_cost,
        image_fee_cost=image_fee_cost,
        total=text_up_cost + text_down_cost + image_up_cost + image_down_cost + image_fee_cost,
        incomplete=incomplete,
    )
