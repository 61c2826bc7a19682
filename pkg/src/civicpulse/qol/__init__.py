"""Quality-of-life classification: features, rebalancing, training, evaluation."""

from .features import FeatureMatrix, MinMaxScaler, build_features, stratified_split
from .sampling import smote_oversample
from .network import MLPConfig, TrainedModel, predict_proba, train
from .evaluation import EvalReport, evaluate
from .significance import SignificanceReport, feature_significance
from .crosscheck import optimal_gain_crosscheck
from .pipeline import ExperimentResult, run_experiment

__all__ = [
    "FeatureMatrix",
    "MinMaxScaler",
    "build_features",
    "stratified_split",
    "smote_oversample",
    "MLPConfig",
    "TrainedModel",
    "predict_proba",
    "train",
    "EvalReport",
    "evaluate",
    "SignificanceReport",
    "feature_significance",
    "optimal_gain_crosscheck",
    "ExperimentResult",
    "run_experiment",
]
