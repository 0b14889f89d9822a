"""OSHA severe-injury report ingest: parse, filter, sample, categorize.

Source CSVs have an open column set; every column is preserved verbatim as a
string so downstream prompt serialization sees exactly what the file said.
Only four columns are required: abstract_text, event_keyword,
event_description (the alias event_desc is accepted), and naics_code.
"""
from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import BoundsError, SchemaError

# event_description appears as event_desc in some exports; either satisfies
# the requirement and the canonical name is used for access.
_DESCRIPTION_ALIASES = ("event_description", "event_desc")
_REQUIRED_COLUMNS = ("abstract_text", "event_keyword", "naics_code")

STORE_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class IncidentRecord:
    """One severe-injury report row, immutable after construction.

    fields holds every source column keyed by its original header name.
    record_id is minted at parse time and is not an OSHA identifier.
    """

    record_id: str
    fields: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "fields", MappingProxyType(dict(self.fields)))

    @property
    def abstract_text(self) -> str:
        return self.fields["abstract_text"]

    @property
    def event_keyword(self) -> str:
        return self.fields["event_keyword"]

    @property
    def event_description(self) -> str:
        for name in _DESCRIPTION_ALIASES:
            if name in self.fields:
                return self.fields[name]
        return ""

    @property
    def naics_code(self) -> str:
        return self.fields["naics_code"]


@dataclass(frozen=True)
class RowError:
    """A skipped data row: the line it ended on and why it was rejected."""

    line: int
    message: str


@dataclass(frozen=True)
class ParseResult:
    records: tuple[IncidentRecord, ...]
    row_errors: tuple[RowError, ...]


@dataclass(frozen=True)
class SamplePlan:
    """Deterministic sampling request: size, seed, optional NAICS filter."""

    n: int
    seed: int
    naics_filter: str = ""

    def __post_init__(self) -> None:
        if self.n < 0:
            raise BoundsError(f"sample size must be non-negative, got {self.n}")


def parse_sir_csv(path: str | Path) -> ParseResult:
    """Read a UTF-8 CSV of severe-injury reports.

    Each well-formed data row becomes one IncidentRecord with a minted
    record_id of the form sir-NNNNNN (1-based data-row ordinal, so ids are
    stable for a given file). Rows with the wrong column count or an empty
    abstract_text are skipped and reported as RowErrors.
    """
    path = Path(path)
    records: list[IncidentRecord] = []
    errors: list[RowError] = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty, expected a header row")
        _check_header(header, path)
        ordinal = 0
        for row in reader:
            ordinal += 1
            if len(row) != len(header):
                errors.append(
                    RowError(
                        reader.line_num,
                        f"expected {len(header)} columns, found {len(row)}",
                    )
                )
                continue
            fields = dict(zip(header, row))
            if not fields["abstract_text"].strip():
                errors.append(RowError(reader.line_num, "abstract_text is empty"))
                continue
            records.append(IncidentRecord(f"sir-{ordinal:06d}", fields))
    return ParseResult(tuple(records), tuple(errors))


def _check_header(header: Sequence[str], path: Path) -> None:
    missing = [name for name in _REQUIRED_COLUMNS if name not in header]
    if not any(alias in header for alias in _DESCRIPTION_ALIASES):
        missing.append("event_description")
    if missing:
        raise SchemaError(f"{path}: missing required column(s): {', '.join(sorted(missing))}")


def filter_records(records: Iterable[IncidentRecord], naics_code: str) -> list[IncidentRecord]:
    """Keep records whose naics_code equals the given code, order preserved."""
    return [record for record in records if record.naics_code == naics_code]


def sample_records(records: Sequence[IncidentRecord], plan: SamplePlan) -> list[IncidentRecord]:
    """Draw a uniform sample without replacement, deterministic in the seed.

    When the plan carries a naics_filter it is applied before sampling, so
    plan.n is checked against the surviving records.
    """
    pool = list(records)
    if plan.naics_filter:
        pool = filter_records(pool, plan.naics_filter)
    if plan.n > len(pool):
        raise BoundsError(
            f"sample size {plan.n} exceeds the {len(pool)} records available"
        )
    return random.Random(plan.seed).sample(pool, plan.n)


# Primary hazard categories, matched in order against event_keyword after
# normalization; the first hit wins and anything unmatched lands in the
# catch-all bucket.
KEYWORD_CATEGORIES: tuple[str, ...] = (
    "Struck-By",
    "Fall from Elevation",
    "Caught in/Between",
    "Struck Against",
    "Other",
)
CATCH_ALL_CATEGORY = "Unclassified"


def _normalize_keyword_text(text: str) -> str:
    lowered = text.lower().replace("-", " ").replace("/", " ")
    return " ".join(lowered.split())


def primary_category(record: IncidentRecord) -> str:
    """The first category whose name appears in the record's event_keyword."""
    haystack = _normalize_keyword_text(record.event_keyword)
    for category in KEYWORD_CATEGORIES:
        if _normalize_keyword_text(category) in haystack:
            return category
    return CATCH_ALL_CATEGORY


def keyword_histogram(records: Iterable[IncidentRecord]) -> dict[str, int]:
    """Count records by primary hazard category; empty input gives {}."""
    counts: dict[str, int] = {}
    for record in records:
        category = primary_category(record)
        counts[category] = counts.get(category, 0) + 1
    return counts


def write_record_store(records: Iterable[IncidentRecord], path: str | Path) -> int:
    """Write records as line-delimited JSON, one object per record.

    Keys are the original column names plus record_id; values are the
    untouched source strings, so a read back round-trips byte for byte.
    """
    path = Path(path)
    count = 0
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            obj = dict(record.fields)
            obj["record_id"] = record.record_id
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_record_store(path: str | Path) -> list[IncidentRecord]:
    """Load records written by write_record_store."""
    path = Path(path)
    records: list[IncidentRecord] = []
    with path.open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            try:
                record_id = obj.pop("record_id")
            except KeyError:
                raise SchemaError(f"{path}:{line_no}: store line has no record_id")
            records.append(IncidentRecord(record_id, obj))
    return records
