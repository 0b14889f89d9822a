"""Prompt templates, composition, and safety-warning parsing.

Ten templates ship as UTF-8 text assets, one file per template id: five text
prompts (P_SP for the single-pass mode, P_T1..P_T4 for the temporal stages)
and five visual prompts (V_SP, V_T1..V_T4). Placeholders use single curly
braces and are substituted in one pass, so braces inside bound values are
never re-scanned.
"""
from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import (
    DependencyError,
    IncompleteDescriptionsError,
    TemplateChecksumError,
    UnresolvedPlaceholderError,
    WarningParseError,
)
from .ingest import IncidentRecord

logger = logging.getLogger(__name__)

TEMPLATE_IDS: tuple[str, ...] = (
    "P_SP", "P_T1", "P_T2", "P_T3", "P_T4",
    "V_SP", "V_T1", "V_T2", "V_T3", "V_T4",
)

PLACEHOLDER_NAMES: frozenset[str] = frozenset(
    {
        "json_data",
        "infrastructure_description",
        "activity_description",
        "hazard_description",
        "state_description",
        "event_keyword",
    }
)

_PLACEHOLDER_RE = re.compile(r"\{(" + "|".join(sorted(PLACEHOLDER_NAMES)) + r")\}")

# Pipeline stages. SP is the one-shot mode; T1..T4 are the temporal states
# (base infrastructure, routine activity, warning overlay, hazard moment).
STAGES: tuple[str, ...] = ("SP", "T1", "T2", "T3", "T4")
TEMPORAL_STAGES: tuple[str, ...] = ("T1", "T2", "T3", "T4")

TEXT_TEMPLATE_FOR_STAGE: Mapping[str, str] = {
    "SP": "P_SP", "T1": "P_T1", "T2": "P_T2", "T3": "P_T3", "T4": "P_T4",
}
VISUAL_TEMPLATE_FOR_STAGE: Mapping[str, str] = {
    "SP": "V_SP", "T1": "V_T1", "T2": "V_T2", "T3": "V_T3", "T4": "V_T4",
}

_template_cache: dict[str, str] = {}


def _templates_root():
    return resources.files(__package__).joinpath("templates")


def template_body(template_id: str) -> str:
    """Raw template text for one of the known template ids."""
    if template_id not in TEMPLATE_IDS:
        raise KeyError(f"unknown template id: {template_id!r}")
    if template_id not in _template_cache:
        asset = _templates_root().joinpath(f"{template_id}.txt")
        _template_cache[template_id] = asset.read_text(encoding="utf-8")
    return _template_cache[template_id]


def template_placeholders(template_id: str) -> set[str]:
    """Placeholders found by static scan of the template body."""
    return {match.group(1) for match in _PLACEHOLDER_RE.finditer(template_body(template_id))}


def render_text(text: str, bindings: Mapping[str, str]) -> str:
    """Substitute known placeholders in one pass; unknown names are left alone."""

    def _replace(match: re.Match[str]) -> str:
        name = match.group(1)
        if name not in bindings:
            raise KeyError(name)
        return bindings[name]

    return _PLACEHOLDER_RE.sub(_replace, text)


def render_template(template_id: str, bindings: Mapping[str, str]) -> str:
    """Render a template with the given bindings.

    Every placeholder occurring in the template must be bound; bindings for
    placeholders the template does not use are ignored with a warning.
    """
    body = template_body(template_id)
    needed = template_placeholders(template_id)
    extra = set(bindings) - needed
    if extra:
        logger.warning(
            "template %s ignores unused binding(s): %s",
            template_id,
            ", ".join(sorted(extra)),
        )
    try:
        return render_text(body, bindings)
    except KeyError as exc:
        raise UnresolvedPlaceholderError(exc.args[0], template_id) from None


def record_json(record: IncidentRecord) -> str:
    """The record's full source field map as a single-line JSON object."""
    return json.dumps(dict(record.fields), ensure_ascii=False)


@dataclass(frozen=True)
class WarningSpec:
    """Parsed safety-warning stage output: who to highlight plus the phrase."""

    highlight_description: str
    warning_phrase: str
    phrase_word_count: int
    phrase_in_range: bool


# A SAFETY_WARNING line, tolerating leading whitespace and markdown residue
# (list dashes, asterisks, quote markers) plus space around the colon.
_WARNING_LINE_RE = re.compile(r"^[\s\-*#>]*SAFETY_WARNING\s*:\s*(.*)$")


def parse_warning_spec(text: str) -> WarningSpec:
    """Split a warning-stage response on its first SAFETY_WARNING line.

    Everything before the line is the highlight description; everything after
    the colon is the warning phrase. A phrase outside the 5-7 word range is
    flagged, not rejected.
    """
    lines = text.splitlines()
    for index, line in enumerate(lines):
        match = _WARNING_LINE_RE.match(line)
        if match is None:
            continue
        highlight = "\n".join(lines[:index]).strip()
        phrase = match.group(1).strip()
        words = phrase.split()
        return WarningSpec(
            highlight_description=highlight,
            warning_phrase=phrase,
            phrase_word_count=len(words),
            phrase_in_range=5 <= len(words) <= 7,
        )
    raise WarningParseError("response contains no SAFETY_WARNING line", raw_text=text)


@dataclass
class SceneDescriptionSet:
    """Scene description texts for one record/iteration in one mode.

    Constructed incrementally during generation, so fields may be missing
    while a pipeline is in flight or after a stage failure; validate()
    enforces the completeness contract before images are composed.
    """

    mode: str  # "single_pass" | "temporal"
    r_sp: str | None = None
    r_t1: str | None = None
    r_t2: str | None = None
    r_t3: str | None = None
    r_t4: str | None = None
    warning: WarningSpec | None = None

    def is_complete(self) -> bool:
        if self.mode == "single_pass":
            return self.r_sp is not None
        return all(
            value is not None
            for value in (self.r_t1, self.r_t2, self.r_t3, self.r_t4, self.warning)
        )

    def validate(self) -> None:
        if self.mode not in ("single_pass", "temporal"):
            raise IncompleteDescriptionsError(f"unknown mode: {self.mode!r}")
        if not self.is_complete():
            if self.mode == "single_pass":
                required = (("r_sp", self.r_sp),)
            else:
                required = (
                    ("r_t1", self.r_t1),
                    ("r_t2", self.r_t2),
                    ("r_t3", self.r_t3),
                    ("r_t4", self.r_t4),
                    ("warning", self.warning),
                )
            missing = [name for name, value in required if value is None]
            raise IncompleteDescriptionsError(
                f"{self.mode} description set is missing: {', '.join(missing)}"
            )

    def to_json_dict(self) -> dict:
        warning = None
        if self.warning is not None:
            warning = {
                "highlight_description": self.warning.highlight_description,
                "warning_phrase": self.warning.warning_phrase,
                "phrase_word_count": self.warning.phrase_word_count,
                "phrase_in_range": self.warning.phrase_in_range,
            }
        return {
            "mode": self.mode,
            "r_sp": self.r_sp,
            "r_t1": self.r_t1,
            "r_t2": self.r_t2,
            "r_t3": self.r_t3,
            "r_t4": self.r_t4,
            "warning": warning,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "SceneDescriptionSet":
        warning = None
        if obj.get("warning") is not None:
            w = obj["warning"]
            warning = WarningSpec(
                highlight_description=w["highlight_description"],
                warning_phrase=w["warning_phrase"],
                phrase_word_count=w["phrase_word_count"],
                phrase_in_range=w["phrase_in_range"],
            )
        return cls(
            mode=obj["mode"],
            r_sp=obj.get("r_sp"),
            r_t1=obj.get("r_t1"),
            r_t2=obj.get("r_t2"),
            r_t3=obj.get("r_t3"),
            r_t4=obj.get("r_t4"),
            warning=warning,
        )


def compose_text_prompt(
    stage: str,
    record: IncidentRecord,
    priors: SceneDescriptionSet | None = None,
) -> str:
    """Build the description-generation prompt for a pipeline stage.

    SP and T1 need only the record. T2 consumes the T1 text; T3 and T4 each
    consume the T2 text and are independent of one another.
    """
    if stage not in STAGES:
        raise KeyError(f"unknown stage: {stage!r}")
    bindings: dict[str, str] = {"json_data": record_json(record)}
    if stage == "SP":
        bindings["event_keyword"] = record.event_keyword
    elif stage == "T2":
        if priors is None or priors.r_t1 is None:
            raise DependencyError("stage T2 requires the T1 infrastructure description")
        bindings["infrastructure_description"] = priors.r_t1
    elif stage in ("T3", "T4"):
        if priors is None or priors.r_t2 is None:
            raise DependencyError(f"stage {stage} requires the T2 activity description")
        bindings["activity_description"] = priors.r_t2
    return render_template(TEXT_TEMPLATE_FOR_STAGE[stage], bindings)


def compose_visual_prompt(stage: str, descriptions: SceneDescriptionSet) -> str:
    """Build the image-generation prompt for a pipeline stage.

    V_T2 embeds both the activity text and the hazard text (so positioning
    anticipates the event); V_T3 embeds the raw warning-stage text, which
    carries the highlight description and the SAFETY_WARNING line.
    """
    if stage not in STAGES:
        raise KeyError(f"unknown stage: {stage!r}")
    if stage == "SP":
        if descriptions.r_sp is None:
            raise DependencyError("visual stage SP requires the single-pass description")
        bindings = {"state_description": descriptions.r_sp}
    elif stage == "T1":
        if descriptions.r_t1 is None:
            raise DependencyError("visual stage T1 requires the T1 description")
        bindings = {"state_description": descriptions.r_t1}
    elif stage == "T2":
        if descriptions.r_t2 is None or descriptions.r_t4 is None:
            raise DependencyError("visual stage T2 requires the T2 and T4 descriptions")
        bindings = {
            "state_description": descriptions.r_t2,
            "hazard_description": descriptions.r_t4,
        }
    elif stage == "T3":
        if descriptions.r_t3 is None or descriptions.warning is None:
            raise DependencyError("visual stage T3 requires a parsed safety warning")
        bindings = {"state_description": descriptions.r_t3}
    else:  # T4
        if descriptions.r_t4 is None:
            raise DependencyError("visual stage T4 requires the T4 description")
        bindings = {"state_description": descriptions.r_t4}
    return render_template(VISUAL_TEMPLATE_FOR_STAGE[stage], bindings)


def compute_template_checksums() -> dict[str, str]:
    """SHA-256 of each template asset's raw bytes, keyed by file name."""
    sums: dict[str, str] = {}
    for template_id in TEMPLATE_IDS:
        data = _templates_root().joinpath(f"{template_id}.txt").read_bytes()
        sums[f"{template_id}.txt"] = hashlib.sha256(data).hexdigest()
    return sums


def _checksum_file():
    return _templates_root().joinpath("checksums.json")


def verify_templates() -> None:
    """Compare template assets against the recorded checksums.

    Raises TemplateChecksumError naming every file that is missing from the
    record or whose bytes have drifted.
    """
    recorded = json.loads(_checksum_file().read_text(encoding="utf-8"))
    actual = compute_template_checksums()
    problems = []
    for name, digest in sorted(actual.items()):
        if name not in recorded:
            problems.append(f"{name}: no recorded checksum")
        elif recorded[name] != digest:
            problems.append(f"{name}: checksum mismatch")
    if problems:
        raise TemplateChecksumError("; ".join(problems))


def write_template_checksums(path: str | Path | None = None) -> Path:
    """Regenerate the checksum record (maintenance helper for template edits)."""
    target = Path(path) if path is not None else Path(str(_checksum_file()))
    target.write_text(
        json.dumps(compute_template_checksums(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return target
