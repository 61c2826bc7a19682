"""Join of proposal popularity, optimal-portfolio gain share, and p-values.

One row per sector: how often it was proposed city-wide (rank 1 = most),
what share of the summed legitimacy gain across all neighborhoods'
optimal-k portfolios it contributes, and its classifier p-value.  Sectors
missing from one side get nulls there rather than being dropped.
"""

from __future__ import annotations

from ..legitimacy import AxisMaps
from ..survey import SurveyDataset
from .significance import SignificanceReport


def optimal_gain_crosscheck(
    dataset: SurveyDataset,
    maps: AxisMaps,
    significance: SignificanceReport,
) -> list[dict]:
    proposal_totals: dict[str, int] = {}
    for r in dataset.responses:
        for tag in r.proposals:
            proposal_totals[tag] = proposal_totals.get(tag, 0) + 1

    ranked = sorted(proposal_totals.items(), key=lambda kv: (-kv[1], kv[0]))
    ranking = {sector: rank + 1 for rank, (sector, _) in enumerate(ranked)}

    gain_sums: dict[str, float] = {}
    for scope_map in maps.maps:
        for label, gain in scope_map.entries:
            gain_sums[label] = gain_sums.get(label, 0.0) + gain
    total_gain = sum(gain_sums.values())

    rows = []
    for sector in dataset.sector_labels:
        gain_pct = (
            100.0 * gain_sums.get(sector, 0.0) / total_gain if total_gain > 0 else 0.0
        )
        rows.append(
            {
                "sector": sector,
                "ranking": ranking.get(sector),
                "proposal_count": proposal_totals.get(sector, 0),
                "optimal_gain_pct": gain_pct,
                "p_value": significance.p_value_of(sector),
            }
        )
    rows.sort(key=lambda row: (row["ranking"] is None, row["ranking"], row["sector"]))
    return rows
