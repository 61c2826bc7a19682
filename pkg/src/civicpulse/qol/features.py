"""Feature assembly for the quality-of-life classifier.

Three feature sets: the 11 satisfaction codes ("S"), the 6 participation
codes ("P"), or all 17 ("SP").  Rows missing any selected feature are
dropped and counted; the merged class label (1..4) is always required.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ComputationError
from ..survey import PARTICIPATION_ITEMS, SurveyDataset, merge_qol_classes

FEATURE_SETS = ("S", "P", "SP")

N_CLASSES = 4


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense feature rows with merged class labels.

    ``features`` is (n_rows, n_features) float64; ``labels`` holds the
    merged class 1..4 per row.  Column order is fixed and recorded in
    ``feature_names``.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    feature_set: str
    respondent_ids: tuple[str, ...]
    dropped_rows: int = 0

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> dict[int, int]:
        labels, counts = np.unique(self.labels, return_counts=True)
        return {int(label): int(count) for label, count in zip(labels, counts)}

    def take(self, indices: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(
            features=self.features[indices],
            labels=self.labels[indices],
            feature_names=self.feature_names,
            feature_set=self.feature_set,
            respondent_ids=tuple(self.respondent_ids[i] for i in indices),
            dropped_rows=self.dropped_rows,
        )


def build_features(dataset: SurveyDataset, feature_set: str = "SP") -> FeatureMatrix:
    """Assemble the feature matrix for one feature set.

    Satisfaction features keep the raw 0..5 codes (0 is a legitimate level
    of the encoding here, unlike in mean-satisfaction aggregation);
    participation features keep their 0..4 / 0..2 codes.
    """
    if feature_set not in FEATURE_SETS:
        raise ComputationError(f"unknown feature set {feature_set!r}")

    names: list[str] = []
    if "S" in feature_set:
        names.extend(dataset.sector_labels)
    if "P" in feature_set:
        names.extend(PARTICIPATION_ITEMS)

    rows: list[list[float]] = []
    labels: list[int] = []
    ids: list[str] = []
    dropped = 0
    sectors = set(dataset.sector_labels)
    for r in dataset.responses:
        row: list[float] = []
        complete = True
        for name in names:
            if name in sectors:
                code = r.satisfaction.get(name)
            else:
                code = r.participation.get(name)
            if code is None:
                complete = False
                break
            row.append(float(code))
        if not complete:
            dropped += 1
            continue
        rows.append(row)
        labels.append(merge_qol_classes(r.qol_raw))
        ids.append(r.respondent_id)

    features = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(names))
    return FeatureMatrix(
        features=features,
        labels=np.asarray(labels, dtype=np.int64),
        feature_names=tuple(names),
        feature_set=feature_set,
        respondent_ids=tuple(ids),
        dropped_rows=dropped,
    )


def stratified_split(
    X: FeatureMatrix, test_fraction: float, rng: np.random.Generator
) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Seeded stratified split; every class contributes its share to test.

    Classes with a single row stay in the training split (nothing to
    stratify).  Order within splits follows the shuffled per-class order,
    so the result is fully determined by the generator state.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ComputationError(f"test fraction {test_fraction} outside (0, 1)")
    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in sorted(set(int(v) for v in X.labels)):
        class_idx = np.flatnonzero(X.labels == label)
        shuffled = class_idx[rng.permutation(len(class_idx))]
        if len(shuffled) < 2:
            train_idx.extend(int(i) for i in shuffled)
            continue
        n_test = int(len(shuffled) * test_fraction + 0.5)
        n_test = min(max(n_test, 1), len(shuffled) - 1)
        test_idx.extend(int(i) for i in shuffled[:n_test])
        train_idx.extend(int(i) for i in shuffled[n_test:])
    return X.take(np.asarray(train_idx, dtype=np.int64)), X.take(
        np.asarray(test_idx, dtype=np.int64)
    )


@dataclass(frozen=True)
class MinMaxScaler:
    """Per-column min-max scaling onto [0, 1], fitted on training data only."""

    minimum: np.ndarray
    value_range: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "MinMaxScaler":
        minimum = features.min(axis=0)
        value_range = features.max(axis=0) - minimum
        return cls(minimum=minimum, value_range=value_range)

    def transform(self, features: np.ndarray) -> np.ndarray:
        # Constant columns scale to 0 rather than dividing by zero.
        safe_range = np.where(self.value_range == 0, 1.0, self.value_range)
        return (features - self.minimum) / safe_range

    def to_dict(self) -> dict:
        return {
            "minimum": self.minimum.tolist(),
            "range": self.value_range.tolist(),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "MinMaxScaler":
        return cls(
            minimum=np.asarray(raw["minimum"], dtype=np.float64),
            value_range=np.asarray(raw["range"], dtype=np.float64),
        )
