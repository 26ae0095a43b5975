"""CSV / JSON writers with a JSON sidecar describing the run."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Sequence


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def rows_to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def rows_to_json(header: Sequence[str], rows: Sequence[Sequence], extra: dict | None = None) -> str:
    doc = {"columns": list(header), "rows": [list(r) for r in rows]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n"


def write_table(
    path: str | Path | None,
    header: Sequence[str],
    rows: Sequence[Sequence],
    fmt: str = "csv",
    sidecar: dict | None = None,
    extra: dict | None = None,
) -> str:
    """Serialize the table; write it (plus ``<path>.meta.json``) when a path is given."""
    text = rows_to_csv(header, rows) if fmt == "csv" else rows_to_json(header, rows, extra)
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        if sidecar is not None:
            meta = dict(sidecar)
            if extra and fmt == "csv":
                meta["results"] = extra
            Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=1, sort_keys=True, default=str) + "\n")
    return text
