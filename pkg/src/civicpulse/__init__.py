"""Batch analytics for encoded citizen surveys.

Computes legitimacy curves and optimal top-k investment portfolios from
proposal demand, relocation quality metrics over neighborhood moves, and
a quality-of-life classifier with class rebalancing and per-feature
significance, all emitted as reproducible machine-readable reports.
"""

__version__ = "0.1.0"

from .errors import CivicPulseError, ComputationError, ConfigError, DataError
from .survey import (
    Axis,
    CountTable,
    SatisfactionMatrix,
    SchemaConfig,
    SurveyDataset,
    SurveyResponse,
    dump_survey,
    export_survey,
    load_survey,
    mean_satisfaction,
    merge_qol_classes,
    proposal_counts,
)
from .legitimacy import (
    AxisMaps,
    KneeResult,
    LegitimacyCurve,
    LegitimacyMap,
    knee_index,
    legitimacy,
    legitimacy_curve,
    legitimacy_map,
    optimal_k,
)
from .relocation import (
    MigrationMatrix,
    RelocationAssessment,
    RelocationReport,
    assess_relocation,
    migration_matrix,
    pqi,
    relocation_report,
    rqi,
)

__all__ = [
    "__version__",
    "CivicPulseError",
    "ComputationError",
    "ConfigError",
    "DataError",
    "Axis",
    "CountTable",
    "SatisfactionMatrix",
    "SchemaConfig",
    "SurveyDataset",
    "SurveyResponse",
    "dump_survey",
    "export_survey",
    "load_survey",
    "mean_satisfaction",
    "merge_qol_classes",
    "proposal_counts",
    "AxisMaps",
    "KneeResult",
    "LegitimacyCurve",
    "LegitimacyMap",
    "knee_index",
    "legitimacy",
    "legitimacy_curve",
    "legitimacy_map",
    "optimal_k",
    "MigrationMatrix",
    "RelocationAssessment",
    "RelocationReport",
    "assess_relocation",
    "migration_matrix",
    "pqi",
    "relocation_report",
    "rqi",
]
