"""Canonical data model, ingestion and aggregation for the encoded citizen survey.

The survey is a fixed questionnaire serialized as one delimited-text row per
respondent.  Canonical column names:

    respondent_id   opaque unique identifier (optional; synthesized if absent)
    q01             overall quality of life, one of six raw answers
    q02 .. q12      satisfaction with the 11 project sectors, codes 0..5
                    (5 = very satisfied .. 1 = not at all satisfied,
                     0 = "I don't know")
    q13 .. q18      participation items (q13/q14 codes 0..4, q15..q18 codes 0..2)
    q19             current neighborhood label
    q21             previous neighborhood label (empty unless relocated)
    q23, q24, q25   household {1..4}, education {1..4}, employment {0..3}
    q26             proposed project sectors, ';'-separated tags (may be empty)

A JSON schema config maps arbitrary source headers onto these canonical names
and carries the label vocabularies.  Rows failing validation are rejected
individually with a reason; the rest of the file still loads.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DataError

QOL_RAW_LABELS = (
    "Very Good",
    "Good",
    "Enough",
    "Insufficient",
    "Bad",
    "I don't know",
)

# Raw answer (casefolded) -> merged class index.  The three weakest answers
# collapse into class 1 because they are too sparse to model separately.
_QOL_CLASS = {
    "bad": 1,
    "i don't know": 1,
    "insufficient": 1,
    "enough": 2,
    "good": 3,
    "very good": 4,
}

QOL_CLASS_LABELS = {1: "Insufficient", 2: "Enough", 3: "Good", 4: "Very Good"}

SATISFACTION_SECTOR_COUNT = 11
SATISFACTION_CODE_RANGE = (0, 5)

PARTICIPATION_ITEMS = ("q13", "q14", "q15", "q16", "q17", "q18")
PARTICIPATION_RANGES = {
    "q13": (0, 4),
    "q14": (0, 4),
    "q15": (0, 2),
    "q16": (0, 2),
    "q17": (0, 2),
    "q18": (0, 2),
}

DEMOGRAPHIC_RANGES = {"q23": (1, 4), "q24": (1, 4), "q25": (0, 3)}

PROPOSAL_SEPARATOR = ";"


def satisfaction_column(sector_index: int) -> str:
    """Canonical column name for the i-th sector (0-based): q02 .. q12."""
    return f"q{sector_index + 2:02d}"


def _normalize_qol(raw: str) -> str | None:
    """Map a raw QoL answer onto its canonical label, or None if unknown."""
    cleaned = raw.strip().replace("’", "'").casefold()
    for label in QOL_RAW_LABELS:
        if label.casefold() == cleaned:
            return label
    return None


def merge_qol_classes(qol_raw: str) -> int:
    """Collapse the six raw quality-of-life answers into class 1..4.

    {Bad, I don't know, Insufficient} -> 1, Enough -> 2, Good -> 3,
    Very Good -> 4.  Raises DataError for anything else.
    """
    canonical = _normalize_qol(qol_raw)
    if canonical is None:
        raise DataError(f"unknown quality-of-life answer {qol_raw!r}")
    return _QOL_CLASS[canonical.casefold()]


@dataclass(frozen=True)
class SchemaConfig:
    """Label vocabularies plus the source-header-to-canonical column map."""

    neighborhoods: tuple[str, ...]
    sectors: tuple[str, ...]
    column_map: dict[str, str] = field(default_factory=dict)
    delimiter: str = ","
    proposal_separator: str = PROPOSAL_SEPARATOR

    def __post_init__(self):
        if len(set(self.neighborhoods)) != len(self.neighborhoods):
            raise ConfigError("duplicate neighborhood labels in schema config")
        if len(set(self.sectors)) != len(self.sectors):
            raise ConfigError("duplicate sector labels in schema config")
        if len(self.sectors) != SATISFACTION_SECTOR_COUNT:
            raise ConfigError(
                f"schema config must list exactly {SATISFACTION_SECTOR_COUNT} "
                f"sectors (one per satisfaction question), got {len(self.sectors)}"
            )

    @classmethod
    def from_file(cls, path: str | Path) -> "SchemaConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"schema config not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"schema config is not valid JSON: {exc}") from exc
        for key in ("neighborhoods", "sectors"):
            if key not in raw or not isinstance(raw[key], list):
                raise ConfigError(f"schema config missing list field {key!r}")
        return cls(
            neighborhoods=tuple(raw["neighborhoods"]),
            sectors=tuple(raw["sectors"]),
            column_map=dict(raw.get("column_map", {})),
            delimiter=raw.get("delimiter", ","),
            proposal_separator=raw.get("proposal_separator", PROPOSAL_SEPARATOR),
        )

    @classmethod
    def canonical(
        cls, neighborhoods: tuple[str, ...], sectors: tuple[str, ...]
    ) -> "SchemaConfig":
        """Schema for files already using canonical column names."""
        return cls(neighborhoods=tuple(neighborhoods), sectors=tuple(sectors))

    def canonical_columns(self) -> list[str]:
        cols = ["respondent_id", "q01"]
        cols += [satisfaction_column(i) for i in range(len(self.sectors))]
        cols += list(PARTICIPATION_ITEMS)
        cols += ["q19", "q21", "q23", "q24", "q25", "q26"]
        return cols


@dataclass(frozen=True)
class SurveyResponse:
    """One respondent's validated, encoded answers.

    ``satisfaction`` maps sector label -> code 0..5; ``participation`` maps
    item name (q13..q18) -> code.  Unanswered questions are simply absent
    from the maps.  Demographic fields are None when unanswered.
    """

    respondent_id: str
    neighborhood: str
    previous_neighborhood: str | None
    qol_raw: str
    satisfaction: dict[str, int]
    participation: dict[str, int]
    household: int | None
    education: int | None
    employment: int | None
    proposals: tuple[str, ...]

    @property
    def relocated(self) -> bool:
        return (
            self.previous_neighborhood is not None
            and self.previous_neighborhood != self.neighborhood
        )


def _check_range(value: int, lo: int, hi: int, what: str) -> None:
    if not lo <= value <= hi:
        raise DataError(f"{what}: code {value} out of range {{{lo}..{hi}}}")


def _validate_response(
    r: SurveyResponse, neighborhoods: frozenset, sectors: frozenset
) -> None:
    if r.neighborhood not in neighborhoods:
        raise DataError(f"unknown neighborhood label {r.neighborhood!r}")
    if r.previous_neighborhood is not None and r.previous_neighborhood not in neighborhoods:
        raise DataError(f"unknown neighborhood label {r.previous_neighborhood!r}")
    if _normalize_qol(r.qol_raw) is None:
        raise DataError(f"unknown quality-of-life answer {r.qol_raw!r}")
    for sector, code in r.satisfaction.items():
        if sector not in sectors:
            raise DataError(f"unknown sector label {sector!r}")
        _check_range(code, *SATISFACTION_CODE_RANGE, what=f"satisfaction[{sector}]")
    for item, code in r.participation.items():
        if item not in PARTICIPATION_RANGES:
            raise DataError(f"unknown participation item {item!r}")
        _check_range(code, *PARTICIPATION_RANGES[item], what=f"participation[{item}]")
    for col, value in (("q23", r.household), ("q24", r.education), ("q25", r.employment)):
        if value is not None:
            _check_range(value, *DEMOGRAPHIC_RANGES[col], what=col)
    for tag in r.proposals:
        if tag not in sectors:
            raise DataError(f"unknown sector label {tag!r}")


@dataclass(frozen=True)
class SurveyDataset:
    """Immutable collection of validated responses plus the label vocabularies."""

    responses: tuple[SurveyResponse, ...]
    neighborhood_labels: tuple[str, ...]
    sector_labels: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.neighborhood_labels)) != len(self.neighborhood_labels):
            raise DataError("duplicate neighborhood labels")
        if len(set(self.sector_labels)) != len(self.sector_labels):
            raise DataError("duplicate sector labels")
        neighborhoods = frozenset(self.neighborhood_labels)
        sectors = frozenset(self.sector_labels)
        seen_ids = set()
        for r in self.responses:
            if r.respondent_id in seen_ids:
                raise DataError(f"duplicate respondent_id {r.respondent_id!r}")
            seen_ids.add(r.respondent_id)
            _validate_response(r, neighborhoods, sectors)

    def __len__(self) -> int:
        return len(self.responses)


@dataclass
class LoadReport:
    """Per-file ingestion outcome: what loaded, what was rejected and why."""

    accepted: int = 0
    rejected: list[dict] = field(default_factory=list)
    flagged: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "flagged": self.flagged,
            "notes": self.notes,
        }


_LOAD_NOTES = [
    "satisfaction code 0 (\"I don't know\") is treated as missing, not as the scale floor",
    "rows failing validation are rejected individually; the remainder of the file loads",
]


def _parse_code(raw: str, col: str) -> int:
    text = raw.strip()
    try:
        return int(text)
    except ValueError:
        raise DataError(f"{col}: not an integer code: {raw!r}") from None


def _parse_row(
    row: dict[str, str],
    row_index: int,
    schema: SchemaConfig,
    flags: list[dict],
) -> SurveyResponse:
    def cell(col: str) -> str:
        return (row.get(col) or "").strip()

    respondent_id = cell("respondent_id") or f"row-{row_index:05d}"

    qol = cell("q01")
    if not qol:
        raise DataError("q01: missing required answer")
    if _normalize_qol(qol) is None:
        raise DataError(f"q01: unknown quality-of-life answer {qol!r}")

    satisfaction: dict[str, int] = {}
    for i, sector in enumerate(schema.sectors):
        col = satisfaction_column(i)
        raw = cell(col)
        if not raw:
            continue
        code = _parse_code(raw, col)
        lo, hi = SATISFACTION_CODE_RANGE
        if not lo <= code <= hi:
            raise DataError(f"{col}: code {code} out of range {{{lo}..{hi}}}")
        satisfaction[sector] = code

    participation: dict[str, int] = {}
    for item in PARTICIPATION_ITEMS:
        raw = cell(item)
        if not raw:
            continue
        code = _parse_code(raw, item)
        lo, hi = PARTICIPATION_RANGES[item]
        if not lo <= code <= hi:
            raise DataError(f"{item}: code {code} out of range {{{lo}..{hi}}}")
        participation[item] = code

    demographics: dict[str, int | None] = {}
    for col in ("q23", "q24", "q25"):
        raw = cell(col)
        if not raw:
            demographics[col] = None
            continue
        value = _parse_code(raw, col)
        lo, hi = DEMOGRAPHIC_RANGES[col]
        if not lo <= value <= hi:
            raise DataError(f"{col}: code {value} out of range {{{lo}..{hi}}}")
        demographics[col] = value

    neighborhood = cell("q19")
    if not neighborhood:
        raise DataError("q19: missing required answer")
    if neighborhood not in schema.neighborhoods:
        raise DataError(f"q19: unknown neighborhood label {neighborhood!r}")

    previous = cell("q21") or None
    if previous is not None:
        if previous not in schema.neighborhoods:
            raise DataError(f"q21: unknown neighborhood label {previous!r}")
        if previous == neighborhood:
            flags.append({"row": row_index, "flag": "self-relocation"})

    proposals: list[str] = []
    raw_proposals = cell("q26")
    if raw_proposals:
        for tag in raw_proposals.split(schema.proposal_separator):
            tag = tag.strip()
            if not tag:
                continue
            if tag not in schema.sectors:
                raise DataError(f"q26: unknown sector label {tag!r}")
            proposals.append(tag)

    return SurveyResponse(
        respondent_id=respondent_id,
        neighborhood=neighborhood,
        previous_neighborhood=previous,
        qol_raw=_normalize_qol(qol),
        satisfaction=satisfaction,
        participation=participation,
        household=demographics["q23"],
        education=demographics["q24"],
        employment=demographics["q25"],
        proposals=tuple(proposals),
    )


def load_survey(
    path: str | Path, schema: SchemaConfig
) -> tuple[SurveyDataset, LoadReport]:
    """Load and validate a delimited survey file.

    Returns the dataset of accepted rows plus a report listing every
    rejected row with its reason.  Raises DataError only for file-level
    problems (missing file, missing columns, no data rows).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset not found: {path}")

    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter=schema.delimiter)
        if reader.fieldnames is None:
            raise DataError("no data rows")
        header = [h.strip() for h in reader.fieldnames]
        rename = {src: dst for src, dst in schema.column_map.items()}
        canonical_header = [rename.get(h, h) for h in header]

        required = set(schema.canonical_columns()) - {"respondent_id", "q21"}
        missing = sorted(required - set(canonical_header))
        if missing:
            raise DataError(f"missing column(s): {', '.join(missing)}")

        report = LoadReport(notes=list(_LOAD_NOTES))
        responses: list[SurveyResponse] = []
        seen_ids: set[str] = set()
        row_index = 0
        for raw_row in reader:
            row_index += 1
            row = {
                canonical: (raw_row.get(src) or "")
                for src, canonical in zip(reader.fieldnames, canonical_header)
            }
            flags: list[dict] = []
            try:
                response = _parse_row(row, row_index, schema, flags)
                if response.respondent_id in seen_ids:
                    raise DataError(
                        f"respondent_id: duplicate identifier {response.respondent_id!r}"
                    )
            except DataError as exc:
                report.rejected.append({"row": row_index, "reason": str(exc)})
                continue
            seen_ids.add(response.respondent_id)
            report.flagged.extend(flags)
            responses.append(response)

        if row_index == 0:
            raise DataError("no data rows")

    report.accepted = len(responses)
    dataset = SurveyDataset(
        responses=tuple(responses),
        neighborhood_labels=tuple(schema.neighborhoods),
        sector_labels=tuple(schema.sectors),
    )
    return dataset, report


def export_survey(dataset: SurveyDataset, path: str | Path) -> None:
    """Write the dataset as canonical CSV (round-trips through load_survey)."""
    Path(path).write_text(dump_survey(dataset), encoding="utf-8")


def dump_survey(dataset: SurveyDataset) -> str:
    """Canonical CSV serialization: fixed column order, deterministic bytes."""
    schema = SchemaConfig.canonical(dataset.neighborhood_labels, dataset.sector_labels)
    columns = schema.canonical_columns()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in dataset.responses:
        row = [r.respondent_id, r.qol_raw]
        for sector in dataset.sector_labels:
            code = r.satisfaction.get(sector)
            row.append("" if code is None else str(code))
        for item in PARTICIPATION_ITEMS:
            code = r.participation.get(item)
            row.append("" if code is None else str(code))
        row.append(r.neighborhood)
        row.append(r.previous_neighborhood or "")
        for value in (r.household, r.education, r.employment):
            row.append("" if value is None else str(value))
        row.append(PROPOSAL_SEPARATOR.join(r.proposals))
        writer.writerow(row)
    return buf.getvalue()


class Axis(enum.Enum):
    """Analysis axis for demand tallies."""

    SECTORS_WITHIN_NEIGHBORHOOD = "sectors"
    NEIGHBORHOODS_WITHIN_SECTOR = "neighborhoods"


@dataclass(frozen=True)
class CountTable:
    """Demand counts along one axis, in canonical order.

    Entries are sorted by count descending, ties broken lexicographically by
    label, so top-k membership is reproducible.
    """

    axis: Axis
    scope: str
    entries: tuple[tuple[str, int], ...]

    @classmethod
    def from_tallies(cls, axis: Axis, scope: str, tallies: dict[str, int]) -> "CountTable":
        for label, count in tallies.items():
            if count < 0:
                raise DataError(f"negative count for {label!r}")
        ordered = tuple(sorted(tallies.items(), key=lambda kv: (-kv[1], kv[0])))
        return cls(axis=axis, scope=scope, entries=ordered)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.entries)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(count for _, count in self.entries)

    def total(self) -> int:
        return sum(self.counts)

    def __len__(self) -> int:
        return len(self.entries)


def proposal_counts(dataset: SurveyDataset, axis: Axis, scope: str) -> CountTable:
    """Tally proposal tags for one scope.

    Axis ``SECTORS_WITHIN_NEIGHBORHOOD``: scope is a neighborhood; counts how
    often each sector was proposed there.  Axis ``NEIGHBORHOODS_WITHIN_SECTOR``:
    scope is a sector; counts proposals for it per neighborhood.  Each tag
    occurrence in a respondent's proposal list increments by one.
    """
    tallies: dict[str, int] = {}
    if axis is Axis.SECTORS_WITHIN_NEIGHBORHOOD:
        if scope not in dataset.neighborhood_labels:
            raise DataError(f"unknown neighborhood label {scope!r}")
        for r in dataset.responses:
            if r.neighborhood != scope:
                continue
            for tag in r.proposals:
                tallies[tag] = tallies.get(tag, 0) + 1
    elif axis is Axis.NEIGHBORHOODS_WITHIN_SECTOR:
        if scope not in dataset.sector_labels:
            raise DataError(f"unknown sector label {scope!r}")
        for r in dataset.responses:
            for tag in r.proposals:
                if tag == scope:
                    tallies[r.neighborhood] = tallies.get(r.neighborhood, 0) + 1
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown axis {axis!r}")
    return CountTable.from_tallies(axis, scope, tallies)


def scope_labels(dataset: SurveyDataset, axis: Axis) -> tuple[str, ...]:
    """All scope labels for an axis (neighborhoods or sectors)."""
    if axis is Axis.SECTORS_WITHIN_NEIGHBORHOOD:
        return dataset.neighborhood_labels
    return dataset.sector_labels


@dataclass(frozen=True)
class SatisfactionMatrix:
    """Mean satisfaction (codes 1..5) per (sector, neighborhood) cell.

    Cells without any valid answer are absent rather than zero; ``support``
    counts the answers that entered each mean.
    """

    mean: dict[tuple[str, str], float]
    support: dict[tuple[str, str], int]

    def mean_of(self, sector: str, neighborhood: str) -> float | None:
        return self.mean.get((sector, neighborhood))

    def support_of(self, sector: str, neighborhood: str) -> int:
        return self.support.get((sector, neighborhood), 0)

    def to_rows(self) -> list[dict]:
        rows = []
        for (sector, neighborhood) in sorted(self.mean):
            rows.append(
                {
                    "sector": sector,
                    "neighborhood": neighborhood,
                    "mean": self.mean[(sector, neighborhood)],
                    "support": self.support[(sector, neighborhood)],
                }
            )
        return rows


def mean_satisfaction(dataset: SurveyDataset) -> SatisfactionMatrix:
    """Average satisfaction codes per (sector, neighborhood).

    Code 0 ("I don't know") is excluded from both the mean and the support
    count; it carries no position on the 1..5 scale.
    """
    sums: dict[tuple[str, str], int] = {}
    counts: dict[tuple[str, str], int] = {}
    for r in dataset.responses:
        for sector, code in r.satisfaction.items():
            if code == 0:
                continue
            key = (sector, r.neighborhood)
            sums[key] = sums.get(key, 0) + code
            counts[key] = counts.get(key, 0) + 1
    means = {key: sums[key] / counts[key] for key in sums}
    return SatisfactionMatrix(mean=means, support=counts)
