"""Relocation flows and quality-improvement metrics.

For a move from neighborhood x to neighborhood y, the relative quality
improvement (RQI) of a sector is the relative change of its neighborhood
mean satisfaction, (mean_y - mean_x) / mean_x; positive values mean the
move improves that sector.  The perceived quality improvement (PQI) puts
one individual's destination satisfaction in relation to the collective
mean shift: 1 - (mean_y - code) / (mean_y - mean_x).  PQI is 1 when the
individual sits exactly at the destination mean and 0 when they sit at
the origin mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ComputationError
from .survey import SatisfactionMatrix, SurveyDataset, SurveyResponse, mean_satisfaction

PQI_DENOMINATOR_EPSILON = 1e-9


@dataclass(frozen=True)
class MigrationMatrix:
    """Observed relocation counts per (from, to) pair, max-min normalized.

    Normalization runs over observed flows only; pairs nobody moved between
    stay absent.  When all observed flows are equal the normalized value is
    1.0 for every pair.
    """

    flow: dict[tuple[str, str], int]
    normalized: dict[tuple[str, str], float]

    def pairs_by_flow(self) -> list[tuple[str, str]]:
        """Pairs ordered by flow descending, ties lexicographic."""
        return sorted(self.flow, key=lambda pair: (-self.flow[pair], pair))

    def to_rows(self) -> list[dict]:
        return [
            {
                "from": origin,
                "to": destination,
                "count": self.flow[(origin, destination)],
                "normalized": self.normalized[(origin, destination)],
            }
            for origin, destination in self.pairs_by_flow()
        ]


def migration_matrix(dataset: SurveyDataset) -> MigrationMatrix:
    """Count relocations per (previous, current) pair; empty if none occurred.

    Self-relocations (same neighborhood on both sides) are excluded.
    """
    flow: dict[tuple[str, str], int] = {}
    for r in dataset.responses:
        if not r.relocated:
            continue
        key = (r.previous_neighborhood, r.neighborhood)
        flow[key] = flow.get(key, 0) + 1
    if not flow:
        return MigrationMatrix(flow={}, normalized={})
    low = min(flow.values())
    high = max(flow.values())
    if high == low:
        normalized = {key: 1.0 for key in flow}
    else:
        normalized = {key: (count - low) / (high - low) for key, count in flow.items()}
    return MigrationMatrix(flow=flow, normalized=normalized)


@dataclass
class RelocationAssessment:
    """Quality change for one (from, to) relocation.

    ``per_sector_rqi`` covers the sectors with mean-satisfaction support in
    both neighborhoods; the others are listed in ``excluded_sectors``.
    ``overall_rqi`` is the arithmetic mean of the included values (None if
    nothing is included).  PQI fields are filled by the report pipeline.
    """

    origin: str
    destination: str
    per_sector_rqi: dict[str, float]
    overall_rqi: float | None
    excluded_sectors: tuple[str, ...]
    flow: int = 0
    normalized_flow: float = 0.0
    per_individual_pqi: dict[tuple[str, str], float] = field(default_factory=dict)
    pqi_undefined: int = 0

    @property
    def included_sector_count(self) -> int:
        return len(self.per_sector_rqi)

    def mean_pqi_by_sector(self) -> dict[str, dict]:
        sums: dict[str, float] = {}
        counts: dict[str, int] = {}
        for (_, sector), value in self.per_individual_pqi.items():
            sums[sector] = sums.get(sector, 0.0) + value
            counts[sector] = counts.get(sector, 0) + 1
        return {
            sector: {"mean": sums[sector] / counts[sector], "count": counts[sector]}
            for sector in sorted(sums)
        }

    def to_dict(self) -> dict:
        return {
            "from": self.origin,
            "to": self.destination,
            "flow": self.flow,
            "normalized_flow": self.normalized_flow,
            "overall_rqi": self.overall_rqi,
            "included_sector_count": self.included_sector_count,
            "per_sector_rqi": {s: self.per_sector_rqi[s] for s in sorted(self.per_sector_rqi)},
            "excluded_sectors": list(self.excluded_sectors),
            "mean_pqi_by_sector": self.mean_pqi_by_sector(),
            "pqi_undefined": self.pqi_undefined,
            "pqi_count": len(self.per_individual_pqi),
        }


def rqi(
    sat: SatisfactionMatrix, x: str, y: str, sectors: tuple[str, ...] | list[str]
) -> RelocationAssessment:
    """Per-sector and overall relative quality improvement for a move x -> y.

    Sectors lacking support in either neighborhood are excluded and listed;
    the overall value averages over the remaining ones.
    """
    per_sector: dict[str, float] = {}
    excluded: list[str] = []
    for sector in sectors:
        mean_x = sat.mean_of(sector, x)
        mean_y = sat.mean_of(sector, y)
        if mean_x is None or mean_y is None:
            excluded.append(sector)
            continue
        per_sector[sector] = (mean_y - mean_x) / mean_x
    overall = sum(per_sector.values()) / len(per_sector) if per_sector else None
    return RelocationAssessment(
        origin=x,
        destination=y,
        per_sector_rqi=per_sector,
        overall_rqi=overall,
        excluded_sectors=tuple(excluded),
    )


def pqi(sat: SatisfactionMatrix, response: SurveyResponse, sector: str) -> float:
    """Perceived quality improvement of one individual's relocation, per sector.

    Requires a relocation, a valid (nonzero) destination satisfaction code,
    and origin/destination means that differ by more than the epsilon
    threshold; otherwise the value is undefined and a ComputationError is
    raised (aggregates exclude and count such cases).
    """
    if not response.relocated:
        raise ComputationError(
            f"respondent {response.respondent_id!r} has no relocation"
        )
    code = response.satisfaction.get(sector)
    if code is None or code == 0:
        raise ComputationError(
            f"respondent {response.respondent_id!r} has no valid satisfaction "
            f"code for sector {sector!r}"
        )
    x = response.previous_neighborhood
    y = response.neighborhood
    mean_x = sat.mean_of(sector, x)
    mean_y = sat.mean_of(sector, y)
    if mean_x is None or mean_y is None:
        raise ComputationError(
            f"sector {sector!r} lacks mean-satisfaction support for {x!r} -> {y!r}"
        )
    denominator = mean_y - mean_x
    if abs(denominator) < PQI_DENOMINATOR_EPSILON:
        raise ComputationError(
            f"undefined PQI: means for sector {sector!r} coincide between "
            f"{x!r} and {y!r}"
        )
    return 1.0 - (mean_y - code) / denominator


@dataclass
class RelocationReport:
    """All observed relocations, ranked by likelihood of occurrence."""

    matrix: MigrationMatrix
    assessments: list[RelocationAssessment]
    global_mean_rqi: dict[str, dict]

    def to_dict(self) -> dict:
        return {
            "migration": self.matrix.to_rows(),
            "assessments": [a.to_dict() for a in self.assessments],
            "global_mean_rqi": self.global_mean_rqi,
        }


def assess_relocation(
    dataset: SurveyDataset,
    x: str,
    y: str,
    sat: SatisfactionMatrix | None = None,
    matrix: MigrationMatrix | None = None,
) -> RelocationAssessment:
    """Full assessment (RQI plus individual PQIs) for one relocation pair."""
    if sat is None:
        sat = mean_satisfaction(dataset)
    if matrix is None:
        matrix = migration_matrix(dataset)
    assessment = rqi(sat, x, y, dataset.sector_labels)
    assessment.flow = matrix.flow.get((x, y), 0)
    assessment.normalized_flow = matrix.normalized.get((x, y), 0.0)
    for r in dataset.responses:
        if not (r.relocated and r.previous_neighborhood == x and r.neighborhood == y):
            continue
        for sector in dataset.sector_labels:
            code = r.satisfaction.get(sector)
            if code is None or code == 0:
                continue
            try:
                value = pqi(sat, r, sector)
            except ComputationError:
                assessment.pqi_undefined += 1
                continue
            assessment.per_individual_pqi[(r.respondent_id, sector)] = value
    return assessment


def relocation_report(dataset: SurveyDataset) -> RelocationReport:
    """Assess every observed relocation pair, ordered by flow descending.

    Also aggregates the per-sector RQI as an unweighted mean over the
    observed pairs, showing which sectors improve and which are compromised
    across all relocations.
    """
    sat = mean_satisfaction(dataset)
    matrix = migration_matrix(dataset)
    assessments = [
        assess_relocation(dataset, x, y, sat=sat, matrix=matrix)
        for x, y in matrix.pairs_by_flow()
    ]

    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for assessment in assessments:
        for sector, value in assessment.per_sector_rqi.items():
            sums[sector] = sums.get(sector, 0.0) + value
            counts[sector] = counts.get(sector, 0) + 1
    global_mean = {
        sector: {"mean_rqi": sums[sector] / counts[sector], "pairs": counts[sector]}
        for sector in sorted(sums)
    }
    return RelocationReport(
        matrix=matrix, assessments=assessments, global_mean_rqi=global_mean
    )
