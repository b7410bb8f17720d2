"""Deterministic JSON/CSV/TSV report emission.

Schema: {schema_version, command, params, results[], diagnostics[], timings}.
Output bytes are identical across runs with identical configuration: floats
are rendered with repr (17 significant digits round-trip), dict keys are
sorted, and the timings block carries deterministic work counters rather
than wall-clock times.
"""
from __future__ import annotations

import json
from pathlib import Path

SCHEMA_VERSION = 1


def _normalize(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_normalize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    if hasattr(obj, "to_dict"):
        return _normalize(obj.to_dict())
    return str(obj)


def render_float(x) -> str:
    return repr(float(x))


def report_document(command: str, params: dict, results: list,
                    diagnostics: list | None = None,
                    timings: dict | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": _normalize(params),
        "results": _normalize(results),
        "diagnostics": _normalize(diagnostics or []),
        "timings": _normalize(timings or {}),
    }


def emit_json(doc: dict, path) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    Path(path).write_text(text + "\n")


def emit_table(rows: list[dict], path, sep: str) -> None:
    """Flat table with a header row; floats rendered at round-trip
    precision."""
    if not rows:
        Path(path).write_text("")
        return
    cols = list(rows[0].keys())
    lines = [sep.join(cols)]
    for row in rows:
        cells = []
        for c in cols:
            v = row.get(c, "")
            cells.append(render_float(v) if isinstance(v, float) else str(v))
        lines.append(sep.join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def emit_report(doc_or_rows, fmt: str, path) -> None:
    if fmt == "json":
        emit_json(doc_or_rows, path)
    elif fmt == "csv":
        emit_table(doc_or_rows, path, ",")
    elif fmt == "tsv":
        emit_table(doc_or_rows, path, "\t")
    else:
        raise ValueError(f"unknown format {fmt!r}")
