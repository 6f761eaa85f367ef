"""CSV ingestion with schema checks, and deterministic table writers."""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
import numbers
from pathlib import Path

import numpy as np

from .errors import EpiphaseError

INPUT_SCHEMAS = {
    "cases": ("date", "count"),
    "contacts": ("date", "case_id", "lat", "lon"),
    "subway": ("date", "hour", "station_id", "riders"),
    "traffic": ("date", "hour", "sensor_id", "volume"),
    "holidays": ("date_2020", "date_2019"),
    "survey": ("date", "metric", "value"),
    "policy": ("indicator", "start_day", "end_day", "score", "flag"),
}


class SchemaError(EpiphaseError):
    """Input rows that violate the expected layout; carries line numbers."""

    def __init__(self, path, problems):
        self.path = str(path)
        self.problems = list(problems)
        lines = "; ".join(f"line {ln}: {msg}" for ln, msg in self.problems[:20])
        more = f" (+{len(self.problems) - 20} more)" if len(self.problems) > 20 else ""
        super().__init__(f"{self.path}: {lines}{more}")


def _rows(path, kind):
    """Yield ``(line_number, row_dict)``; OSError propagates as I/O failure."""
    expected = INPUT_SCHEMAS[kind]
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in expected if c not in header]
        if missing:
            raise SchemaError(path, [(1, f"missing column(s) {', '.join(missing)}")])
        reader.fieldnames = header
        for row in reader:
            yield reader.line_num, {k: (v or "").strip() for k, v in row.items() if k}


def _date(s):
    return dt.date.fromisoformat(s)


def read_cases(path):
    """``[(date, count)]`` sorted by date; duplicate dates are schema errors."""
    out, problems, seen = [], [], {}
    for ln, r in _rows(path, "cases"):
        try:
            d, c = _date(r["date"]), float(r["count"])
            if c < 0 or not math.isfinite(c):
                raise ValueError(f"count must be a non-negative number, got {r['count']!r}")
        except ValueError as exc:
            problems.append((ln, str(exc)))
            continue
        if d in seen:
            problems.append((ln, f"duplicate date {d} (first on line {seen[d]})"))
            continue
        seen[d] = ln
        out.append((d, c))
    if problems:
        raise SchemaError(path, problems)
    return sorted(out)


def read_contacts(path):
    """``[(date, case_id, lat, lon)]``."""
    out, problems = [], []
    for ln, r in _rows(path, "contacts"):
        try:
            lat, lon = float(r["lat"]), float(r["lon"])
            if not (-90 <= lat <= 90 and -180 <= lon <= 180):
                raise ValueError(f"coordinate out of range ({lat}, {lon})")
            out.append((_date(r["date"]), r["case_id"], lat, lon))
        except ValueError as exc:
            problems.append((ln, str(exc)))
    if problems:
        raise SchemaError(path, problems)
    return out


def read_hourly(path, kind):
    """``[(date, hour, id, value)]``; a blank value marks a missing cell."""
    id_col, val_col = INPUT_SCHEMAS[kind][2], INPUT_SCHEMAS[kind][3]
    out, problems, seen = [], [], {}
    for ln, r in _rows(path, kind):
        try:
            d, h = _date(r["date"]), int(r["hour"])
            if not 0 <= h <= 23:
                raise ValueError(f"hour {h} outside 0..23")
            v = float(r[val_col]) if r[val_col] != "" else None
            if v is not None and (v < 0 or not math.isfinite(v)):
                raise ValueError(f"{val_col} must be non-negative, got {r[val_col]!r}")
        except ValueError as exc:
            problems.append((ln, str(exc)))
            continue
        key = (d, h, r[id_col])
        if key in seen:
            problems.append((ln, f"duplicate key {d} hour {h} {r[id_col]} "
                                 f"(first on line {seen[key]})"))
            continue
        seen[key] = ln
        out.append((d, h, r[id_col], v))
    if problems:
        raise SchemaError(path, problems)
    return out


def read_holidays(path):
    out, problems, seen = [], [], set()
    for ln, r in _rows(path, "holidays"):
        try:
            a, b = _date(r["date_2020"]), _date(r["date_2019"])
        except ValueError as exc:
            problems.append((ln, str(exc)))
            continue
        if a in seen:
            problems.append((ln, f"{a} mapped twice"))
        seen.add(a)
        out.append((a, b))
    if problems:
        raise SchemaError(path, problems)
    return tuple(out)


def read_survey(path):
    """``{metric: [(date, value)]}``, each list sorted by date."""
    out, problems = {}, []
    for ln, r in _rows(path, "survey"):
        try:
            out.setdefault(r["metric"], []).append((_date(r["date"]), float(r["value"])))
        except ValueError as exc:
            problems.append((ln, str(exc)))
    if problems:
        raise SchemaError(path, problems)
    return {k: sorted(v) for k, v in sorted(out.items())}


def fmt(v) -> str:
    """Shortest round-trip text for numbers; blank for NaN/None."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, numbers.Integral):
        return str(int(v))
    if isinstance(v, numbers.Real):
        f = float(v)
        if math.isnan(f):
            return ""
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return repr(f)
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_table(path) -> list[dict]:
    """Read a table written by ``write_csv``; numeric cells become floats,
    blank cells NaN, everything else stays text."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {}
            for k, v in row.items():
                if v == "":
                    parsed[k] = math.nan
                    continue
                try:
                    parsed[k] = float(v)
                except ValueError:
                    parsed[k] = v
            out.append(parsed)
    return out


def _json_safe(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if hasattr(obj, "item"):
        return _json_safe(obj.item())
    return obj


def write_json(path, obj):
    text = json.dumps(_json_safe(obj), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
