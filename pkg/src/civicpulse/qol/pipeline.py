"""End-to-end training protocol for one experiment.

Protocol, fixed for comparability across runs: stratified 80/20 split of
the assembled feature matrix, oversampling (if requested) applied to the
training split only, min-max scaling fitted on training data, evaluation
on the untouched test split.  Every report carries the full configuration
so a run can be reproduced from its own artifact.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ComputationError
from ..seeds import substream
from ..survey import SurveyDataset
from .evaluation import EvalReport, evaluate
from .features import FeatureMatrix, build_features, stratified_split
from .network import MLPConfig, TrainedModel, train
from .sampling import smote_oversample

SAMPLING_MODES = ("none", "smote")

TEST_FRACTION = 0.2

PROTOCOL_NOTES = [
    "stratified 80/20 train/test split, seeded",
    "oversampling applied to the training split only; test rows untouched",
]


@dataclass
class ExperimentResult:
    model: TrainedModel
    eval_report: EvalReport
    feature_set: str
    sampling: str
    seed: int
    train_rows: int
    train_rows_after_sampling: int
    test_rows: int
    dropped_rows: int
    train_class_counts: dict[int, int]
    test_class_counts: dict[int, int]

    def to_dict(self) -> dict:
        return {
            "feature_set": self.feature_set,
            "sampling": self.sampling,
            "seed": self.seed,
            "config": self.model.config.to_dict(),
            "protocol": PROTOCOL_NOTES,
            "rows": {
                "train": self.train_rows,
                "train_after_sampling": self.train_rows_after_sampling,
                "test": self.test_rows,
                "dropped_incomplete": self.dropped_rows,
            },
            "train_class_counts": self.train_class_counts,
            "test_class_counts": self.test_class_counts,
            "evaluation": self.eval_report.to_dict(),
        }


def run_experiment(
    dataset: SurveyDataset,
    feature_set: str = "SP",
    sampling: str = "smote",
    seed: int = 0,
    config: MLPConfig | None = None,
    k_neighbors: int = 5,
) -> ExperimentResult:
    """Split, optionally oversample, train, and evaluate one model."""
    if sampling not in SAMPLING_MODES:
        raise ComputationError(f"unknown sampling mode {sampling!r}")
    X = build_features(dataset, feature_set)
    if X.n_rows == 0:
        raise ComputationError("no complete rows for the selected feature set")

    X_train, X_test = stratified_split(X, TEST_FRACTION, substream(seed, "split"))
    train_rows = X_train.n_rows
    if sampling == "smote":
        X_train = smote_oversample(
            X_train, k_neighbors=k_neighbors, rng=substream(seed, "smote")
        )

    if config is None:
        config = MLPConfig(input_dim=X.n_features, seed=seed)
    elif config.input_dim != X.n_features or config.seed != seed:
        config = MLPConfig(
            **{**config.to_dict(), "input_dim": X.n_features, "seed": seed}
        )

    model = train(X_train, config)
    report = evaluate(model, X_test)
    return ExperimentResult(
        model=model,
        eval_report=report,
        feature_set=feature_set,
        sampling=sampling,
        seed=seed,
        train_rows=train_rows,
        train_rows_after_sampling=X_train.n_rows,
        test_rows=X_test.n_rows,
        dropped_rows=X.dropped_rows,
        train_class_counts=X_train.class_counts(),
        test_class_counts=X_test.class_counts(),
    )
