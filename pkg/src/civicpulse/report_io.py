"""Deterministic artifact emission with embedded audit headers.

Every artifact carries the resolved run configuration, its hash, the seed
and the tool version, so any output is reproducible from its own header.
Writes are atomic (temp file in the target directory, then rename) and
byte-deterministic: sorted JSON keys, fixed CSV column order, no
timestamps.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def canonical_json(payload) -> str:
    return json.dumps(
        payload, sort_keys=True, indent=2, ensure_ascii=False, default=_json_default
    )


def config_hash(config: dict) -> str:
    compact = json.dumps(config, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha256(compact.encode("utf-8")).hexdigest()


def audit_header(config: dict, seed: int) -> dict:
    return {
        "config": config,
        "config_hash": config_hash(config),
        "seed": seed,
        "tool_version": __version__,
    }


def make_artifact(kind: str, data, audit: dict) -> dict:
    return {"kind": kind, "audit": audit, "data": data}


def write_text_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def write_json_artifact(path: str | Path, kind: str, data, audit: dict) -> None:
    write_text_atomic(Path(path), canonical_json(make_artifact(kind, data, audit)) + "\n")


def write_csv_artifact(
    path: str | Path, columns: list[str], rows: list[dict], audit: dict
) -> None:
    """Fixed-column CSV with the audit header as a leading comment line."""
    compact_audit = json.dumps(audit, sort_keys=True, separators=(",", ":"), default=_json_default)
    lines = [f"# audit {compact_audit}", ",".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            value = row.get(col)
            if value is None:
                cells.append("")
            elif isinstance(value, float):
                cells.append(repr(value))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    write_text_atomic(Path(path), "\n".join(lines) + "\n")


def write_error_record(stream, code: int, message: str) -> None:
    record = {"error": {"exit_code": code, "message": message}}
    stream.write(json.dumps(record, sort_keys=True) + "\n")


_SCHEMA_DIR = Path(__file__).parent / "schemas"


def load_schema(kind: str) -> dict:
    path = _SCHEMA_DIR / f"{kind}.schema.json"
    if not path.exists():
        raise ConfigError(f"no schema shipped for artifact kind {kind!r}")
    return json.loads(path.read_text(encoding="utf-8"))


def validate_artifact(payload: dict) -> None:
    """Check an artifact against its shipped schema (requires jsonschema)."""
    import jsonschema

    kind = payload.get("kind")
    jsonschema.validate(payload, load_schema(kind))
