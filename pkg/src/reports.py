# src/reports.py
"""Tables written as CSV (pandas) plus one JSON document mirroring them."""
from __future__ import annotations
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from .hermitian_kernel import CMatrix

FLOAT_FORMAT = "%.17g"
FORMATS = ("csv", "json", "both")


def jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become "inf" / "-inf" / "nan"."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(value, complex):
        return [jsonable(value.real), jsonable(value.imag)]
    return value


def matrix_rows(name: str, m: CMatrix, rows: Sequence[str], cols: Sequence[str]) -> List[Dict[str, Any]]:
    """Long format: one record per matrix entry."""
    m = np.asarray(m)
    return [
        {"matrix": name, "row": rows[i], "col": cols[k], "re": float(m[i, k].real), "im": float(m[i, k].imag)}
        for i in range(m.shape[0])
        for k in range(m.shape[1])
    ]


@dataclass
class ReportBundle:
    command: str
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)

    def add(self, name: str, records: List[Dict[str, Any]], columns: Sequence[str]) -> pd.DataFrame:
        df = pd.DataFrame.from_records(records, columns=list(columns))
        self.tables[name] = df
        return df

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "summary": jsonable(self.summary),
            "tables": {name: jsonable(df.to_dict(orient="records")) for name, df in self.tables.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def write(self, out_dir: str, prefix: str = "", fmt: str = "both") -> List[str]:
        if fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        os.makedirs(out_dir, exist_ok=True)
        paths: List[str] = []
        if fmt in ("csv", "both"):
            for name, df in self.tables.items():
                path = os.path.join(out_dir, f"{prefix}{self.command}_{name}.csv")
                df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
                paths.append(path)
        if fmt in ("json", "both"):
            path = os.path.join(out_dir, f"{prefix}{self.command}.json")
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(self.to_json())
            paths.append(path)
        return paths
