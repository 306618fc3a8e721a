"""Reader for the simulator's CSV contract.

Files start with ``# key: value`` metadata comment lines, then one header row
of column names, then comma-separated data rows.  Numeric columns are parsed
to float arrays; anything non-numeric stays a list of strings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class CsvFormatError(ValueError):
    """File does not follow the metadata + header + rows contract."""


@dataclass(frozen=True)
class CsvTable:
    path: str
    metadata: dict
    columns: dict

    def floats(self, name: str) -> np.ndarray:
        col = self.columns[name]
        if not isinstance(col, np.ndarray):
            raise CsvFormatError(f"{self.path}: column {name!r} is not numeric")
        return col

    def meta_float(self, key: str, default: float | None = None) -> float:
        if key not in self.metadata:
            if default is None:
                raise CsvFormatError(f"{self.path}: missing metadata {key!r}")
            return default
        return float(self.metadata[key])


def _parse_meta_value(raw: str):
    raw = raw.strip()
    try:
        return float(raw)
    except ValueError:
        return raw


def read_table(path: str) -> CsvTable:
    metadata = {}
    header = None
    rows = []
    with open(path, "r", newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if header is None and line.startswith("#"):
                body = line.lstrip("#").strip()
                if ":" not in body:
                    raise CsvFormatError(f"{path}: bad metadata line {line!r}")
                key, raw = body.split(":", 1)
                metadata[key.strip()] = _parse_meta_value(raw)
                continue
            if header is None:
                header = [name.strip() for name in line.split(",")]
                continue
            cells = line.split(",")
            if len(cells) != len(header):
                raise CsvFormatError(
                    f"{path}: row has {len(cells)} cells, header has {len(header)}")
            rows.append(cells)
    if header is None:
        raise CsvFormatError(f"{path}: no header row found")
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    columns = {}
    for j, name in enumerate(header):
        raw = [row[j] for row in rows]
        try:
            columns[name] = np.array([float(v) for v in raw])
        except ValueError:
            columns[name] = raw
    return CsvTable(path=path, metadata=metadata, columns=columns)
