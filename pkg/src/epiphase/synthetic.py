"""Seeded 189-day fixture with planted structure.

The generator writes every input the pipeline reads (cases, contact
locations, subway and traffic hourly volumes with 2019 baselines, survey
series) plus a ``pipeline.cfg`` pointing at them, and returns the planted
truth so tests can check recovery.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .series import HORIZON, StudyCalendar, match_day

# Planted days refer to the smoothed series. A trailing 7-day mean delays
# a raw step by about three days, so raw changes are placed that much
# earlier.
SMA_LAG = 3

# daily case level per segment; segments end on the listed days
CASE_BREAKS = (50, 82, 128, 156)
CASE_LEVELS = (6.0, 30.0, 14.0, 34.0, 22.0)

# momentum sign regimes: negative (expansion/contraction) first
GEO_TRANSITIONS = (29, 82, 106, 169)
SPARSE_CONTACTS_FROM = 163

SUBWAY_BREAKS = (34, 63, 91, 126, 161)
SUBWAY_LEVELS = (0.085, 0.422, 0.393, 0.318, 0.262, 0.227)
SUBWAY_HOURS = tuple(range(5, 24))
SUBWAY_STATIONS = tuple(f"S{k:02d}" for k in range(1, 7))
TRAFFIC_SENSORS = tuple(f"T{k:02d}" for k in range(1, 6))
BAD_SENSOR = "T05"
BAD_SENSOR_MISSING = 0.01

SEOUL_CENTER = (37.5665, 126.9780)
SEOUL_HALF_SPAN = (0.09, 0.13)  # degrees, about 20 x 23 km


@dataclass(frozen=True)
class PlantedTruth:
    case_breaks: tuple
    geo_transitions: tuple
    subway_breaks: tuple
    subway_levels: tuple
    rejected_sensor: str
    files: dict


def _level(day, breaks, levels):
    return levels[int(np.searchsorted(breaks, day, side="left"))]


def _hour_profile(hour):
    # two commute bumps over a daytime plateau
    return (0.3 + 0.7 * np.exp(-0.5 * ((hour - 8) / 1.2) ** 2)
            + 0.8 * np.exp(-0.5 * ((hour - 18.5) / 1.5) ** 2)
            + 0.4 * (9 <= hour <= 17))


def _slice_offset(date, hour):
    off = 0.0
    if date.weekday() >= 5:
        off += 0.08
    if 14 <= hour <= 16:
        off += 0.04
    if hour >= 21:
        off += 0.10
    return off


def _write(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _cases(rng, cal):
    rows = []
    for day in range(1, cal.horizon + 1):
        lam = _level(day + SMA_LAG, CASE_BREAKS, CASE_LEVELS)
        rows.append((cal.date_of(day).isoformat(), int(rng.poisson(lam))))
    return rows


def _contacts(rng, cal):
    lat0, lon0 = SEOUL_CENTER
    dlat, dlon = SEOUL_HALF_SPAN
    hotspots = np.column_stack([
        lat0 + rng.uniform(-dlat, dlat, 12),
        lon0 + rng.uniform(-dlon, dlon, 12),
    ])
    rows, case_no = [], 0
    for day in range(1, cal.horizon + 1):
        if day > SPARSE_CONTACTS_FROM and day % 3 == 0:
            continue  # locations no longer published on some days
        negative = _level(day + SMA_LAG, GEO_TRANSITIONS, (True, False, True, False, True))
        if negative:
            # tight central cluster plus one far newcomer: Hausdorff dominates
            pts = np.array(SEOUL_CENTER) + rng.normal(0.0, 0.004, (8, 2))
            far = np.array([lat0 + rng.choice([-1, 1]) * rng.uniform(0.6, 1.0) * dlat,
                            lon0 + rng.choice([-1, 1]) * rng.uniform(0.6, 1.0) * dlon])
            pts = np.vstack([pts, far])
        else:
            # every hotspot revisited: new points sit near old ones
            pts = hotspots + rng.normal(0.0, 0.003, hotspots.shape)
        for lat, lon in pts:
            case_no += 1
            rows.append((cal.date_of(day).isoformat(), f"C{case_no:05d}",
                         f"{lat:.6f}", f"{lon:.6f}"))
    return rows


def _hourly(rng, cal, ids, hours, scale, reduction_scale, missing=None):
    base_days = sorted({match_day(cal.date_of(d), cal) for d in range(1, cal.horizon + 1)})
    base_level = {sid: scale * rng.uniform(0.6, 1.4) for sid in ids}
    weekday_factor = (1.0, 1.0, 1.0, 1.0, 1.05, 0.75, 0.6)

    def volume(date, hour, sid):
        return (base_level[sid] * _hour_profile(hour) * weekday_factor[date.weekday()]
                * rng.lognormal(0.0, 0.01))

    rows, v2019 = [], {}
    for date in base_days:
        for h in hours:
            for sid in ids:
                v = volume(date, h, sid)
                v2019[(date, h, sid)] = v
                rows.append([date.isoformat(), h, sid, f"{v:.3f}"])
    for day in range(1, cal.horizon + 1):
        date = cal.date_of(day)
        base = match_day(date, cal)
        red = _level(day + SMA_LAG, SUBWAY_BREAKS, SUBWAY_LEVELS) * reduction_scale
        red += rng.normal(0.0, 0.02) * reduction_scale
        for h in hours:
            r = min(red + _slice_offset(date, h) * reduction_scale, 0.95)
            for sid in ids:
                v = v2019[(base, h, sid)] * (1.0 - r) * rng.lognormal(0.0, 0.01)
                rows.append([date.isoformat(), h, sid, f"{v:.3f}"])
    for sid, count in (missing or {}).items():
        cells = [k for k, row in enumerate(rows) if row[2] == sid]
        for k in rng.choice(cells, size=count, replace=False):
            rows[k][3] = ""
    return rows


def _survey(cal):
    rows = []
    for day in range(8, cal.horizon + 1, 14):
        date = cal.date_of(day).isoformat()
        rows.append((date, "mask_use", round(min(0.98, 0.55 + 0.004 * day), 3)))
        rows.append((date, "risk_perception", round(0.35 + 0.25 * np.sin(day / 40.0), 3)))
    return rows


def make_dataset(out_dir, seed: int = 0, cal: StudyCalendar | None = None) -> PlantedTruth:
    """Write the fixture into ``out_dir`` and return the planted truth."""
    cal = cal or StudyCalendar()
    if cal.horizon != HORIZON:
        raise ValueError("the fixture is laid out for the 189-day window")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    files = {
        "cases": "cases.csv",
        "contacts": "contacts.csv",
        "subway": "subway.csv",
        "traffic": "traffic.csv",
        "survey": "survey.csv",
    }
    _write(out / files["cases"], ("date", "count"), _cases(rng, cal))
    _write(out / files["contacts"], ("date", "case_id", "lat", "lon"), _contacts(rng, cal))
    _write(out / files["subway"], ("date", "hour", "station_id", "riders"),
           _hourly(rng, cal, SUBWAY_STATIONS, SUBWAY_HOURS, 2000.0, 1.0))
    n_cells = 2 * cal.horizon * 24
    _write(out / files["traffic"], ("date", "hour", "sensor_id", "volume"),
           _hourly(rng, cal, TRAFFIC_SENSORS, tuple(range(24)), 900.0, 0.4,
                   missing={"T02": 5, BAD_SENSOR: int(BAD_SENSOR_MISSING * n_cells)}))
    _write(out / files["survey"], ("date", "metric", "value"), _survey(cal))

    lines = [f"{k} = {v}" for k, v in files.items()]
    lines += [f"seed = {seed}", "out = output"]
    (out / "pipeline.cfg").write_text("\n".join(lines) + "\n", encoding="utf-8")
    files["config"] = "pipeline.cfg"

    return PlantedTruth(CASE_BREAKS, GEO_TRANSITIONS, SUBWAY_BREAKS, SUBWAY_LEVELS,
                        BAD_SENSOR, {k: str(out / v) for k, v in files.items()})
