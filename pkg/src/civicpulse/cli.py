"""Command-line entry point tying the analysis modules into reproducible runs.

Exit codes: 0 success, 2 invalid configuration, 3 data errors, 4
computation errors.  Failures emit a machine-readable error record on
stderr.  All artifacts land in the output directory, embed an audit
header, and are written atomically; identical config + seed yields
byte-identical files.

Every option can also come from the environment with the CIVICPULSE_
prefix (e.g. CIVICPULSE_DATA, CIVICPULSE_SEED) for CI use.
"""

from __future__ import annotations

import functools
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from . import __version__
from .errors import ComputationError, ConfigError, DataError
from .legitimacy import (
    SINGLE_ENTRY_METHOD,
    KneeResult,
    legitimacy,
    legitimacy_curve,
    legitimacy_map,
    optimal_k,
)
from .qol import (
    MLPConfig,
    build_features,
    feature_significance,
    optimal_gain_crosscheck,
    run_experiment,
)
from .relocation import assess_relocation, mean_satisfaction, relocation_report
from .report_io import (
    audit_header,
    write_csv_artifact,
    write_error_record,
    write_json_artifact,
    write_text_atomic,
)
from .survey import Axis, SchemaConfig, dump_survey, load_survey, proposal_counts, scope_labels


def _fail(code: int, message: str) -> None:
    write_error_record(sys.stderr, code, message)
    sys.exit(code)


def pipeline_command(fn):
    """Map package errors onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            _fail(2, str(exc))
        except DataError as exc:
            _fail(3, str(exc))
        except ComputationError as exc:
            _fail(4, str(exc))

    return wrapper


@dataclass
class RunContext:
    data: str | None
    schema_path: str | None
    out: str
    seed: int
    fmt: str

    def require_inputs(self) -> None:
        if not self.data:
            raise ConfigError("missing --data (or CIVICPULSE_DATA)")
        if not self.schema_path:
            raise ConfigError("missing --schema (or CIVICPULSE_SCHEMA)")

    def load(self):
        self.require_inputs()
        schema = SchemaConfig.from_file(self.schema_path)
        dataset, report = load_survey(self.data, schema)
        return dataset, report, schema

    def audit(self, command: str, **params) -> dict:
        config = {
            "command": command,
            "data": self.data,
            "schema": self.schema_path,
            "out": self.out,
            "seed": self.seed,
            "format": self.fmt,
            "params": params,
        }
        return audit_header(config, self.seed)

    def path(self, name: str) -> Path:
        return Path(self.out) / name


@click.group()
@click.option("--data", type=str, default=None, help="Survey data file (delimited text).")
@click.option("--schema", "schema_path", type=str, default=None, help="Schema config JSON.")
@click.option("--out", type=str, default="civicpulse-out", show_default=True, help="Output directory.")
@click.option("--seed", type=int, default=0, show_default=True, help="Master seed for all randomness.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.version_option(__version__)
@click.pass_context
def cli(ctx, data, schema_path, out, seed, fmt):
    """Batch analytics for encoded citizen surveys."""
    ctx.obj = RunContext(data=data, schema_path=schema_path, out=out, seed=seed, fmt=fmt)


@cli.command()
@click.pass_obj
@pipeline_command
def ingest(run: RunContext):
    """Load and validate the survey; write the load report and canonical CSV."""
    dataset, report, _ = run.load()
    audit = run.audit("ingest")
    write_json_artifact(run.path("load_report.json"), "load_report", report.to_dict(), audit)
    write_text_atomic(run.path("dataset_canonical.csv"), dump_survey(dataset))
    click.echo(f"accepted {report.accepted} rows, rejected {len(report.rejected)}")


def _degenerate_curve_payload() -> dict:
    return {"k": [1], "legitimacy": [1.0], "share": [1.0], "gain": [1.0]}


def _scope_payload(dataset, axis: Axis, scope: str, k: int | None) -> dict | None:
    counts = proposal_counts(dataset, axis, scope)
    if len(counts) == 0:
        return None
    if len(counts) == 1:
        knee = KneeResult(optimal_k=1, method=SINGLE_ENTRY_METHOD, decay_rate=0.0)
        curve_payload = _degenerate_curve_payload()
        map_entries = [{"label": counts.labels[0], "gain": 1.0}]
    else:
        curve = legitimacy_curve(counts)
        knee = optimal_k(curve)
        curve_payload = {
            "k": list(curve.k_values),
            "legitimacy": list(curve.legitimacy),
            "share": list(curve.share),
            "gain": list(curve.gain),
        }
        map_entries = [
            {"label": counts.labels[i], "gain": curve.gain[i]}
            for i in range(knee.optimal_k)
        ]
    payload = {
        "scope": scope,
        "n_items": len(counts),
        "curve": curve_payload,
        "knee": knee.to_dict(),
        "map": {"scope": scope, "knee": knee.to_dict(), "entries": map_entries},
    }
    if k is not None:
        payload["legitimacy_at_k"] = legitimacy(counts, k) if k <= len(counts) else None
    return payload


def _axis_analysis(dataset, axis: Axis, k: int | None = None, scope: str | None = None) -> dict:
    scopes = []
    no_demand = []
    targets = [scope] if scope is not None else list(scope_labels(dataset, axis))
    for label in targets:
        payload = _scope_payload(dataset, axis, label, k)
        if payload is None:
            no_demand.append(label)
        else:
            scopes.append(payload)
    return {"axis": axis.value, "scopes": scopes, "no_demand": no_demand}


def _curve_rows(analysis: dict) -> list[dict]:
    rows = []
    for scope in analysis["scopes"]:
        curve = scope["curve"]
        for i, k in enumerate(curve["k"]):
            rows.append(
                {
                    "scope": scope["scope"],
                    "k": k,
                    "legitimacy": curve["legitimacy"][i],
                    "share_pct": 100.0 * curve["share"][i],
                    "gain": curve["gain"][i],
                }
            )
    return rows


def _map_rows(analysis: dict) -> list[dict]:
    rows = []
    for scope in analysis["scopes"]:
        for rank, entry in enumerate(scope["map"]["entries"], start=1):
            rows.append(
                {
                    "scope": scope["scope"],
                    "rank": rank,
                    "label": entry["label"],
                    "gain": entry["gain"],
                }
            )
    return rows


_AXIS_CHOICE = click.Choice([a.value for a in Axis])


@cli.command("legitimacy")
@click.option("--axis", "axis_value", type=_AXIS_CHOICE, required=True)
@click.option("--scope", type=str, default=None, help="Restrict to one scope label.")
@click.option("--k", type=int, default=None, help="Also report legitimacy at this k.")
@click.pass_obj
@pipeline_command
def legitimacy_cmd(run: RunContext, axis_value, scope, k):
    """Legitimacy curves, knees and optimal-k maps along one axis."""
    dataset, _, _ = run.load()
    axis = Axis(axis_value)
    if scope is not None and scope not in scope_labels(dataset, axis):
        raise DataError(f"unknown scope label {scope!r} for axis {axis.value}")
    if k is not None and k < 1:
        raise ComputationError(f"k={k} out of range 1..n")
    analysis = _axis_analysis(dataset, axis, k=k, scope=scope)
    audit = run.audit("legitimacy", axis=axis.value, scope=scope, k=k)
    write_json_artifact(run.path(f"legitimacy_{axis.value}.json"), "legitimacy", analysis, audit)
    if run.fmt == "csv":
        write_csv_artifact(
            run.path(f"legitimacy_curves_{axis.value}.csv"),
            ["scope", "k", "legitimacy", "share_pct", "gain"],
            _curve_rows(analysis),
            audit,
        )
        write_csv_artifact(
            run.path(f"legitimacy_maps_{axis.value}.csv"),
            ["scope", "rank", "label", "gain"],
            _map_rows(analysis),
            audit,
        )
    click.echo(
        f"{len(analysis['scopes'])} scopes analyzed, "
        f"{len(analysis['no_demand'])} without demand"
    )


@cli.command("optimal-k")
@click.option("--axis", "axis_value", type=_AXIS_CHOICE, required=True)
@click.pass_obj
@pipeline_command
def optimal_k_cmd(run: RunContext, axis_value):
    """Knee-point portfolio size for every scope on the axis."""
    dataset, _, _ = run.load()
    axis = Axis(axis_value)
    analysis = _axis_analysis(dataset, axis)
    rows = [
        {
            "scope": s["scope"],
            "n_items": s["n_items"],
            "optimal_k": s["knee"]["optimal_k"],
            "method": s["knee"]["method"],
            "decay_rate": s["knee"]["decay_rate"],
        }
        for s in analysis["scopes"]
    ]
    payload = {"axis": axis.value, "scopes": rows, "no_demand": analysis["no_demand"]}
    audit = run.audit("optimal-k", axis=axis.value)
    write_json_artifact(run.path(f"optimal_k_{axis.value}.json"), "optimal_k", payload, audit)
    if run.fmt == "csv":
        write_csv_artifact(
            run.path(f"optimal_k_{axis.value}.csv"),
            ["scope", "n_items", "optimal_k", "method", "decay_rate"],
            rows,
            audit,
        )
    click.echo(f"optimal k computed for {len(rows)} scopes")


def _rqi_pqi_rows(report_dict: dict) -> list[dict]:
    rows = []
    for assessment in report_dict["assessments"]:
        pqi_by_sector = assessment["mean_pqi_by_sector"]
        for sector in sorted(assessment["per_sector_rqi"]):
            pqi_entry = pqi_by_sector.get(sector, {})
            rows.append(
                {
                    "from": assessment["from"],
                    "to": assessment["to"],
                    "flow": assessment["flow"],
                    "normalized_flow": assessment["normalized_flow"],
                    "sector": sector,
                    "rqi": assessment["per_sector_rqi"][sector],
                    "mean_pqi": pqi_entry.get("mean"),
                    "pqi_count": pqi_entry.get("count", 0),
                }
            )
    return rows


@cli.command("relocation")
@click.option("--from", "from_label", type=str, default=None, help="Origin neighborhood.")
@click.option("--to", "to_label", type=str, default=None, help="Destination neighborhood.")
@click.pass_obj
@pipeline_command
def relocation_cmd(run: RunContext, from_label, to_label):
    """Migration matrix and relocation quality metrics (all pairs or one)."""
    dataset, _, _ = run.load()
    if (from_label is None) != (to_label is None):
        raise ConfigError("--from and --to must be given together")
    audit = run.audit("relocation", from_label=from_label, to_label=to_label)

    if from_label is not None:
        for label in (from_label, to_label):
            if label not in dataset.neighborhood_labels:
                raise DataError(f"unknown neighborhood label {label!r}")
        assessment = assess_relocation(dataset, from_label, to_label)
        payload = {
            "from": from_label,
            "to": to_label,
            "flow": assessment.flow,
            "normalized": assessment.normalized_flow,
            "rqi": {
                "overall": assessment.overall_rqi,
                "per_sector": {
                    s: assessment.per_sector_rqi[s]
                    for s in sorted(assessment.per_sector_rqi)
                },
                "included_sector_count": assessment.included_sector_count,
            },
            "pqi_summary": assessment.mean_pqi_by_sector(),
            "pqi_undefined": assessment.pqi_undefined,
            "excluded_sectors": list(assessment.excluded_sectors),
        }
        write_json_artifact(run.path("relocation_pair.json"), "relocation_pair", payload, audit)
        click.echo(f"{from_label} -> {to_label}: flow {assessment.flow}")
        return

    report = relocation_report(dataset)
    report_dict = report.to_dict()
    write_json_artifact(run.path("relocation.json"), "relocation", report_dict, audit)
    if run.fmt == "csv":
        write_csv_artifact(
            run.path("migration.csv"),
            ["from", "to", "count", "normalized"],
            report_dict["migration"],
            audit,
        )
        write_csv_artifact(
            run.path("mean_satisfaction.csv"),
            ["sector", "neighborhood", "mean", "support"],
            mean_satisfaction(dataset).to_rows(),
            audit,
        )
        write_csv_artifact(
            run.path("rqi_pqi.csv"),
            ["from", "to", "flow", "normalized_flow", "sector", "rqi", "mean_pqi", "pqi_count"],
            _rqi_pqi_rows(report_dict),
            audit,
        )
    click.echo(f"{len(report.assessments)} relocation pairs assessed")


def _load_mlp_overrides(config_path: str | None) -> dict:
    if config_path is None:
        return {}
    path = Path(config_path)
    if not path.exists():
        raise ConfigError(f"model config not found: {path}")
    try:
        overrides = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model config is not valid JSON: {exc}") from exc
    if not isinstance(overrides, dict):
        raise ConfigError("model config must be a JSON object")
    return overrides


def _build_config(overrides: dict, seed: int) -> MLPConfig | None:
    if not overrides:
        return None
    try:
        # input_dim is replaced by the pipeline once features are assembled.
        return MLPConfig(**{"input_dim": 1, "seed": seed, **overrides})
    except TypeError as exc:
        raise ConfigError(f"invalid model config: {exc}") from exc


_FEATURES_CHOICE = click.Choice(["S", "P", "SP"])
_SAMPLING_CHOICE = click.Choice(["none", "smote"])


def _experiment_csv_rows(result_dict: dict) -> list[dict]:
    evaluation = result_dict["evaluation"]
    rows = []
    for metrics in evaluation["per_class"]:
        rows.append(
            {
                "sampling": result_dict["sampling"],
                "feature_set": result_dict["feature_set"],
                "class": metrics["class"],
                "recall": metrics["recall"],
                "precision": metrics["precision"],
                "accuracy": metrics["one_vs_rest_accuracy"],
            }
        )
    rows.append(
        {
            "sampling": result_dict["sampling"],
            "feature_set": result_dict["feature_set"],
            "class": "overall",
            "recall": evaluation["recall_macro"],
            "precision": evaluation["precision_macro"],
            "accuracy": evaluation["accuracy"],
        }
    )
    return rows


@cli.command("train")
@click.option("--features", type=_FEATURES_CHOICE, default="SP", show_default=True)
@click.option("--sampling", type=_SAMPLING_CHOICE, default="smote", show_default=True)
@click.option("--config", "config_path", type=str, default=None, help="Hyperparameter overrides (JSON).")
@click.pass_obj
@pipeline_command
def train_cmd(run: RunContext, features, sampling, config_path):
    """Train and evaluate the quality-of-life classifier."""
    dataset, _, _ = run.load()
    overrides = _load_mlp_overrides(config_path)
    config = _build_config(overrides, run.seed)
    result = run_experiment(
        dataset, feature_set=features, sampling=sampling, seed=run.seed, config=config
    )
    audit = run.audit("train", features=features, sampling=sampling, config_overrides=overrides)
    result_dict = result.to_dict()
    suffix = f"{features}_{sampling}"
    write_json_artifact(
        run.path(f"model_{suffix}.json"), "model", result.model.to_dict(), audit
    )
    write_json_artifact(run.path(f"experiment_{suffix}.json"), "experiment", result_dict, audit)
    if run.fmt == "csv":
        write_csv_artifact(
            run.path(f"experiment_{suffix}.csv"),
            ["sampling", "feature_set", "class", "recall", "precision", "accuracy"],
            _experiment_csv_rows(result_dict),
            audit,
        )
    evaluation = result_dict["evaluation"]
    click.echo(
        f"{features}/{sampling}: accuracy {evaluation['accuracy']:.3f}, "
        f"macro AUC {evaluation['auc_macro']:.3f}"
    )


def _significance_payload(dataset, feature_set: str) -> dict:
    X = build_features(dataset, feature_set)
    report = feature_significance(X)
    maps = legitimacy_map(dataset, Axis.SECTORS_WITHIN_NEIGHBORHOOD)
    crosscheck = optimal_gain_crosscheck(dataset, maps, report)
    payload = report.to_dict()
    payload["crosscheck"] = crosscheck
    return payload


@cli.command("significance")
@click.option("--features", type=_FEATURES_CHOICE, default="SP", show_default=True)
@click.pass_obj
@pipeline_command
def significance_cmd(run: RunContext, features):
    """Per-feature p-values plus the popularity/gain/p-value crosscheck."""
    dataset, _, _ = run.load()
    payload = _significance_payload(dataset, features)
    audit = run.audit("significance", features=features)
    write_json_artifact(run.path("significance.json"), "significance", payload, audit)
    if run.fmt == "csv":
        write_csv_artifact(
            run.path("significance.csv"),
            ["feature", "p_value", "statistic", "dof", "unstable"],
            payload["features"],
            audit,
        )
        write_csv_artifact(
            run.path("crosscheck.csv"),
            ["sector", "ranking", "proposal_count", "optimal_gain_pct", "p_value"],
            payload["crosscheck"],
            audit,
        )
    significant = sum(1 for f in payload["features"] if f["p_value"] < 0.05)
    click.echo(f"{significant}/{len(payload['features'])} features significant at 0.05")


def _roc_rows(result_dict: dict) -> list[dict]:
    rows = []
    for metrics in result_dict["evaluation"]["per_class"]:
        roc = metrics["roc"]
        for fpr, tpr, threshold in zip(roc["fpr"], roc["tpr"], roc["thresholds"]):
            rows.append(
                {
                    "feature_set": result_dict["feature_set"],
                    "sampling": result_dict["sampling"],
                    "class": metrics["class"],
                    "fpr": fpr,
                    "tpr": tpr,
                    "threshold": threshold,
                }
            )
    return rows


@cli.command("report-all")
@click.option("--config", "config_path", type=str, default=None, help="Hyperparameter overrides (JSON).")
@click.pass_obj
@pipeline_command
def report_all_cmd(run: RunContext, config_path):
    """Full pipeline: ingest, legitimacy (both axes), relocation, training, significance."""
    dataset, load_report, _ = run.load()
    overrides = _load_mlp_overrides(config_path)
    config = _build_config(overrides, run.seed)
    audit = run.audit("report-all", config_overrides=overrides)

    sectors_analysis = _axis_analysis(dataset, Axis.SECTORS_WITHIN_NEIGHBORHOOD)
    neighborhoods_analysis = _axis_analysis(dataset, Axis.NEIGHBORHOODS_WITHIN_SECTOR)
    reloc = relocation_report(dataset).to_dict()

    experiments = []
    for feature_set in ("S", "P", "SP"):
        for sampling in ("none", "smote"):
            result = run_experiment(
                dataset,
                feature_set=feature_set,
                sampling=sampling,
                seed=run.seed,
                config=config,
            )
            experiments.append(result.to_dict())

    significance = _significance_payload(dataset, "SP")

    bundle = {
        "ingest": load_report.to_dict(),
        "legitimacy": {
            "sectors": sectors_analysis,
            "neighborhoods": neighborhoods_analysis,
        },
        "relocation": reloc,
        "mean_satisfaction": mean_satisfaction(dataset).to_rows(),
        "experiments": experiments,
        "significance": {k: significance[k] for k in ("method", "features")},
        "crosscheck": significance["crosscheck"],
    }
    write_json_artifact(run.path("bundle.json"), "bundle", bundle, audit)

    if run.fmt == "csv":
        for axis_value, analysis in (
            ("sectors", sectors_analysis),
            ("neighborhoods", neighborhoods_analysis),
        ):
            write_csv_artifact(
                run.path(f"legitimacy_curves_{axis_value}.csv"),
                ["scope", "k", "legitimacy", "share_pct", "gain"],
                _curve_rows(analysis),
                audit,
            )
            write_csv_artifact(
                run.path(f"legitimacy_maps_{axis_value}.csv"),
                ["scope", "rank", "label", "gain"],
                _map_rows(analysis),
                audit,
            )
        write_csv_artifact(
            run.path("migration.csv"),
            ["from", "to", "count", "normalized"],
            reloc["migration"],
            audit,
        )
        write_csv_artifact(
            run.path("mean_satisfaction.csv"),
            ["sector", "neighborhood", "mean", "support"],
            mean_satisfaction(dataset).to_rows(),
            audit,
        )
        write_csv_artifact(
            run.path("rqi_pqi.csv"),
            ["from", "to", "flow", "normalized_flow", "sector", "rqi", "mean_pqi", "pqi_count"],
            _rqi_pqi_rows(reloc),
            audit,
        )
        table3_rows = []
        for result_dict in experiments:
            table3_rows.extend(_experiment_csv_rows(result_dict))
        write_csv_artifact(
            run.path("table_classifier.csv"),
            ["sampling", "feature_set", "class", "recall", "precision", "accuracy"],
            table3_rows,
            audit,
        )
        write_csv_artifact(
            run.path("table_crosscheck.csv"),
            ["sector", "ranking", "proposal_count", "optimal_gain_pct", "p_value"],
            significance["crosscheck"],
            audit,
        )
        best = next(
            r for r in experiments if r["feature_set"] == "SP" and r["sampling"] == "smote"
        )
        write_csv_artifact(
            run.path("roc_points.csv"),
            ["feature_set", "sampling", "class", "fpr", "tpr", "threshold"],
            _roc_rows(best),
            audit,
        )
    click.echo("bundle written")


def main():
    cli(auto_envvar_prefix="CIVICPULSE")


if __name__ == "__main__":
    main()
