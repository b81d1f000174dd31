"""Trace CSV contract: leading parameter comments, then fixed-order columns.

Every number is serialized with 9 significant digits using C-locale
formatting; cells outside the current epoch's structure hold ``nan``.  The
comment block carries every effective parameter as ``# key = <json>`` so a
trace is audit-ready on its own.
"""

import json
from pathlib import Path

import numpy as np

from .engine import Trace
from .errors import ValidationError


def format_number(x: float) -> str:
    """9-significant-digit, locale-independent rendering."""
    return f"{x:.9g}"


def write_trace_csv(trace: Trace, path) -> None:
    path = Path(path)
    lines = [f"# {key} = {json.dumps(value)}" for key, value in trace.params.items()]
    lines.append(",".join(trace.columns))
    for row in trace.data:
        lines.append(",".join(format_number(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trace_csv(path) -> Trace:
    """Parse a trace CSV back into a Trace (params from the comment block)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValidationError(f"trace file not found: {path}") from None
    params = {}
    columns = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            if columns is not None:
                raise ValidationError(f"{path}:{lineno}: comment after header row")
            body = line[1:].strip()
            if "=" not in body:
                raise ValidationError(f"{path}:{lineno}: malformed parameter comment")
            key, _, value = body.partition("=")
            try:
                params[key.strip()] = json.loads(value.strip())
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: bad parameter value: {exc}") from exc
            continue
        cells = line.split(",")
        if columns is None:
            columns = tuple(cells)
            continue
        if len(cells) != len(columns):
            raise ValidationError(
                f"{path}:{lineno}: expected {len(columns)} cells, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: non-numeric cell: {exc}") from exc
    if columns is None:
        raise ValidationError(f"{path}: no header row found")
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(columns)))
    return Trace(columns=columns, data=data, params=params)
