"""Synthetic minority oversampling by nearest-neighbor interpolation.

Each minority class is upsampled to the majority class size.  A synthetic
row is x + u * (x' - x) where x is a random member of the class, x' one of
its k nearest same-class neighbors (Euclidean distance), and u uniform on
[0, 1] - so every synthetic point is a convex combination of two original
same-class points.
"""

from __future__ import annotations

import numpy as np

from ..errors import ComputationError
from ..seeds import substream
from .features import FeatureMatrix


def _nearest_neighbors(members: np.ndarray, k: int) -> list[np.ndarray]:
    """Per-row index lists of the k nearest other rows (stable under ties)."""
    diff = members[:, None, :] - members[None, :, :]
    distances = np.sqrt((diff * diff).sum(axis=2))
    neighbor_lists = []
    for i in range(len(members)):
        order = np.argsort(distances[i], kind="stable")
        order = order[order != i]
        neighbor_lists.append(order[:k])
    return neighbor_lists


def smote_oversample(
    X: FeatureMatrix,
    k_neighbors: int = 5,
    seed: int = 0,
    rng: np.random.Generator | None = None,
) -> FeatureMatrix:
    """Upsample every minority class to the majority size.

    Deterministic under ``seed`` (or an explicitly supplied generator).
    Already-balanced input is returned unchanged.  A class that needs
    upsampling but has fewer than 2 members cannot be interpolated and
    raises ComputationError.
    """
    if k_neighbors < 1:
        raise ComputationError(f"k_neighbors must be >= 1, got {k_neighbors}")
    counts = X.class_counts()
    if not counts:
        raise ComputationError("empty feature matrix")
    target = max(counts.values())
    if all(count == target for count in counts.values()):
        return X

    if rng is None:
        rng = substream(seed, "smote")

    new_rows: list[np.ndarray] = []
    new_labels: list[int] = []
    new_ids: list[str] = []
    for label in sorted(counts):
        need = target - counts[label]
        if need == 0:
            continue
        if counts[label] < 2:
            raise ComputationError(
                f"class {label} has fewer than 2 members; cannot interpolate"
            )
        members = X.features[X.labels == label]
        k_effective = min(k_neighbors, len(members) - 1)
        neighbor_lists = _nearest_neighbors(members, k_effective)
        for i in range(need):
            base = int(rng.integers(len(members)))
            neighbor = int(neighbor_lists[base][int(rng.integers(k_effective))])
            u = rng.random()
            new_rows.append(members[base] + u * (members[neighbor] - members[base]))
            new_labels.append(label)
            new_ids.append(f"synthetic-{label}-{i:05d}")

    features = np.vstack([X.features, np.asarray(new_rows)])
    labels = np.concatenate([X.labels, np.asarray(new_labels, dtype=np.int64)])
    return FeatureMatrix(
        features=features,
        labels=labels,
        feature_names=X.feature_names,
        feature_set=X.feature_set,
        respondent_ids=X.respondent_ids + tuple(new_ids),
        dropped_rows=X.dropped_rows,
    )
