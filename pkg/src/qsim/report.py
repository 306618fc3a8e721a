"""Report and pattern serialization: stable JSON and CSV on disk.

CSV files use '.' decimals, LF line endings and 17 significant digits so
regression tests can compare bytes.  Metadata rides in leading comment lines
of the form ``# key: value`` (consumed by the plotting frontend); the data
header follows.  All writes go through a temp file plus rename.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import DensityOperator
from .optics import Pattern


def _jsonable(value: Any) -> Any:
    """Recursively convert values into deterministic JSON-ready structures."""
    if isinstance(value, DensityOperator):
        return {"dims": list(value.dims),
                "matrix_real": _jsonable(value.matrix.real),
                "matrix_imag": _jsonable(value.matrix.imag)}
    if isinstance(value, Pattern):
        return {"label": value.label,
                "visibility": value.visibility,
                "z": _jsonable(value.z),
                "intensity": _jsonable(value.intensity)}
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"non-finite value {value} in report")
    return value


def config_hash(config: dict) -> str:
    """Short stable digest of a resolved configuration."""
    blob = json.dumps(_jsonable(config), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class ExperimentReport:
    """Everything one experiment run produced, ready for report.json."""

    name: str
    seed: int
    config: dict
    results: dict
    version: str
    pattern_files: list[str] = field(default_factory=list)
    timestamp: str | None = None

    def to_json(self) -> str:
        body = {
            "name": self.name,
            "seed": self.seed,
            "version": self.version,
            "config": _jsonable(self.config),
            "config_hash": config_hash(self.config),
            "results": _jsonable(self.results),
            "pattern_files": list(self.pattern_files),
        }
        if self.timestamp is not None:
            body["timestamp"] = self.timestamp
        return json.dumps(body, sort_keys=True, indent=2) + "\n"

    def write(self, path: str) -> None:
        atomic_write_text(path, self.to_json())


def format_sig(x: float) -> str:
    return format(float(x), ".17g")


def pattern_to_csv(pattern: Pattern, path: str,
                   metadata: dict[str, Any] | None = None) -> None:
    """Write a screen pattern with its metadata comment block."""
    meta = {"label": pattern.label, "visibility": pattern.visibility}
    if metadata:
        meta.update(metadata)
    lines = [f"# {key}: {_meta_str(val)}" for key, val in sorted(meta.items())]
    lines.append("z_m,intensity,label")
    for z, i in zip(pattern.z, pattern.intensity):
        lines.append(f"{format_sig(z)},{format_sig(i)},{pattern.label}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def table_to_csv(path: str, columns: dict[str, Any],
                 metadata: dict[str, Any] | None = None) -> None:
    """Write parallel columns (sweep tables) with a metadata comment block."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    length = arrays[0].size
    if any(a.size != length for a in arrays):
        raise ValueError("columns must share one length")
    lines = [f"# {key}: {_meta_str(val)}"
             for key, val in sorted((metadata or {}).items())]
    lines.append(",".join(names))
    for row in range(length):
        lines.append(",".join(
            format_sig(a[row]) if np.issubdtype(a.dtype, np.floating)
            else str(a[row]) for a in arrays))
    atomic_write_text(path, "\n".join(lines) + "\n")


def trials_to_csv(path: str, trials: list[dict]) -> None:
    if not trials:
        raise ValueError("no trial records to write")
    names = list(trials[0])
    lines = [",".join(names)]
    for rec in trials:
        lines.append(",".join(str(rec[n]) for n in names))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _meta_str(val: Any) -> str:
    if isinstance(val, float):
        return format_sig(val)
    return str(val)
