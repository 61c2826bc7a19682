"""Legitimacy of top-k investment portfolios.

The metric for a demand table is the summed demand of the k most-demanded
items divided by the mean demand over all items.  It is dimensionless and
scale-free: doubling every count leaves it unchanged.  A steep early rise
means the population's preferences are decisive and a small portfolio
already represents a strong majority; a near-linear curve means funding
top items carries legitimacy risk.

``optimal_k`` picks the knee of the curve: the point of maximum
perpendicular distance to the chord between the first and last curve
points, after min-max normalization of both axes.  Beyond the knee the
marginal legitimacy gain decays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ComputationError, DataError
from .survey import Axis, CountTable, SurveyDataset, proposal_counts, scope_labels

KNEE_METHOD = "max-normalized-chord-distance"
SINGLE_ENTRY_METHOD = "single-entry"


def legitimacy(counts: CountTable, k: int) -> float:
    """Summed demand of the top k entries divided by the mean demand.

    Computed as ``top_sum * n / total`` (one division), which keeps the
    value exact for uniform tables and bit-stable under integer scaling.
    """
    n = len(counts)
    if n == 0:
        raise ComputationError(f"empty count table for scope {counts.scope!r}")
    total = counts.total()
    if total <= 0:
        raise ComputationError(f"count table for scope {counts.scope!r} has zero total")
    if not 1 <= k <= n:
        raise ComputationError(f"k={k} out of range 1..{n}")
    top_sum = sum(counts.counts[:k])
    return top_sum * n / total


@dataclass(frozen=True)
class LegitimacyCurve:
    """Legitimacy, top-k demand share, and marginal gain for every k.

    ``share`` is legitimacy divided by n, equivalently the top-k count mass
    over the total count mass; it is the bounded percentage reading of the
    metric and is exported alongside the raw value.
    """

    axis: Axis
    scope: str
    k_values: tuple[int, ...]
    legitimacy: tuple[float, ...]
    share: tuple[float, ...]
    gain: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.k_values)


def legitimacy_curve(counts: CountTable) -> LegitimacyCurve:
    """Evaluate the full legitimacy curve for k = 1..n (requires n >= 2)."""
    n = len(counts)
    if n < 2:
        raise ComputationError(
            f"legitimacy curve needs at least 2 entries, scope {counts.scope!r} has {n}"
        )
    total = counts.total()
    if total <= 0:
        raise ComputationError(f"count table for scope {counts.scope!r} has zero total")

    values: list[float] = []
    shares: list[float] = []
    running = 0
    for count in counts.counts:
        running = running + count
        values.append(running * n / total)
        # Direct mass ratio rather than legitimacy / n: same number, one
        # rounding step fewer, exact for clean fractions.
        shares.append(running / total)

    share = tuple(shares)
    gain = tuple(
        values[i] if i == 0 else values[i] - values[i - 1] for i in range(n)
    )
    return LegitimacyCurve(
        axis=counts.axis,
        scope=counts.scope,
        k_values=tuple(range(1, n + 1)),
        legitimacy=tuple(values),
        share=share,
        gain=gain,
    )


def knee_index(values: Sequence[float]) -> int:
    """1-based index of the knee of a curve sampled at k = 1..n.

    Both axes are min-max normalized, then the point with the largest
    perpendicular distance to the chord joining the first and last points
    wins.  Ties go to the smallest k; an exactly linear (or flat) curve
    has no knee and yields 1.
    """
    n = len(values)
    if n < 2:
        raise ComputationError("knee detection needs at least 2 points")
    y_first = values[0]
    y_range = values[-1] - y_first
    if y_range == 0:
        return 1
    best_k = 1
    best_distance = 0.0
    for i in range(n):
        x_norm = i / (n - 1)
        y_norm = (values[i] - y_first) / y_range
        # Chord is y = x after normalization; |y - x| is proportional to
        # the perpendicular distance.
        distance = abs(y_norm - x_norm)
        if distance > best_distance:
            best_distance = distance
            best_k = i + 1
    if best_distance == 0.0:
        return 1
    return best_k


@dataclass(frozen=True)
class KneeResult:
    """Selected portfolio size plus how it was chosen."""

    optimal_k: int
    method: str
    decay_rate: float

    def to_dict(self) -> dict:
        return {
            "optimal_k": self.optimal_k,
            "method": self.method,
            "decay_rate": self.decay_rate,
        }


def optimal_k(curve: LegitimacyCurve) -> KneeResult:
    """Knee of the legitimacy curve; decay_rate is the mean gain beyond it."""
    n = len(curve)
    if n < 2:
        raise ComputationError("knee detection needs at least 2 points")
    k = knee_index(curve.legitimacy)
    tail = curve.gain[k:]
    decay_rate = sum(tail) / len(tail) if tail else 0.0
    return KneeResult(optimal_k=k, method=KNEE_METHOD, decay_rate=decay_rate)


@dataclass(frozen=True)
class LegitimacyMap:
    """Top items for one scope, truncated at the knee, with per-item gains."""

    axis: Axis
    scope: str
    entries: tuple[tuple[str, float], ...]
    knee: KneeResult

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "knee": self.knee.to_dict(),
            "entries": [
                {"label": label, "gain": gain} for label, gain in self.entries
            ],
        }


@dataclass(frozen=True)
class AxisMaps:
    """Per-scope legitimacy maps for a whole axis, plus scopes without demand."""

    axis: Axis
    maps: tuple[LegitimacyMap, ...]
    no_demand: tuple[str, ...]


def _single_entry_map(counts: CountTable) -> LegitimacyMap:
    # One item holds all demand: legitimacy is 1 at k=1 by definition.
    label = counts.labels[0]
    knee = KneeResult(optimal_k=1, method=SINGLE_ENTRY_METHOD, decay_rate=0.0)
    return LegitimacyMap(
        axis=counts.axis, scope=counts.scope, entries=((label, 1.0),), knee=knee
    )


def legitimacy_map(dataset: SurveyDataset, axis: Axis) -> AxisMaps:
    """Compute counts, curve and knee for every scope label on the axis.

    Scopes without any proposal demand are reported in ``no_demand`` rather
    than silently dropped.
    """
    if len(dataset) == 0:
        raise DataError("empty dataset")
    maps: list[LegitimacyMap] = []
    no_demand: list[str] = []
    for scope in scope_labels(dataset, axis):
        counts = proposal_counts(dataset, axis, scope)
        if len(counts) == 0:
            no_demand.append(scope)
            continue
        if len(counts) == 1:
            maps.append(_single_entry_map(counts))
            continue
        curve = legitimacy_curve(counts)
        knee = optimal_k(curve)
        entries = tuple(
            (counts.labels[i], curve.gain[i]) for i in range(knee.optimal_k)
        )
        maps.append(
            LegitimacyMap(axis=axis, scope=scope, entries=entries, knee=knee)
        )
    return AxisMaps(axis=axis, maps=tuple(maps), no_demand=tuple(no_demand))
