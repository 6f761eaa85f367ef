"""Day-indexed series, smoothing, 2020/2019 calendar matching and slicing.

Day 1 is 2020-01-20 and the default study window covers 189 days
(through 2020-07-26). Mobility is compared against 2019 by pairing each
2020 day with a same-weekday day of 2019; public holidays are paired
explicitly through a table shipped in ``epiphase/data/holidays.csv``.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import (
    EmptySeriesError,
    InvalidArgumentError,
    OutOfRangeError,
    SensorRejectedError,
    UndefinedBaselineError,
)

log = logging.getLogger(__name__)

ORIGIN = dt.date(2020, 1, 20)
HORIZON = 189
MISSING_RATE_CEILING = 0.0025


def load_holiday_map(path=None) -> tuple[tuple[dt.date, dt.date], ...]:
    """Read a ``date_2020,date_2019`` CSV; defaults to the packaged table."""
    if path is None:
        text = resources.files("epiphase.data").joinpath("holidays.csv").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    rows = csv.DictReader(text.splitlines())
    return tuple(
        (dt.date.fromisoformat(r["date_2020"]), dt.date.fromisoformat(r["date_2019"]))
        for r in rows
    )


@dataclass(frozen=True)
class StudyCalendar:
    origin_date: dt.date = ORIGIN
    horizon: int = HORIZON
    holiday_map: tuple[tuple[dt.date, dt.date], ...] = field(
        default_factory=load_holiday_map)

    def __post_init__(self):
        if self.horizon < 1:
            raise InvalidArgumentError("horizon must be positive")
        keys = [a for a, _ in self.holiday_map]
        if len(keys) != len(set(keys)):
            raise InvalidArgumentError("holiday_map maps a 2020 date more than once")

    def day_index(self, date: dt.date) -> int:
        return (date - self.origin_date).days + 1

    def date_of(self, day: int) -> dt.date:
        return self.origin_date + dt.timedelta(days=int(day) - 1)

    @property
    def days(self) -> np.ndarray:
        return np.arange(1, self.horizon + 1)

    def in_window(self, date: dt.date) -> bool:
        return 1 <= self.day_index(date) <= self.horizon


@dataclass
class DailySeries:
    """Day-indexed values; ``NaN`` marks a missing entry.

    ``days`` is strictly increasing but need not be contiguous (sliced
    series such as weekday-only totals skip the excluded days).
    """

    days: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.days = np.asarray(self.days, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=float)
        if self.days.ndim != 1 or self.days.shape != self.values.shape:
            raise InvalidArgumentError("days and values must be 1-D and equally long")
        if len(self.days) < 1:
            raise EmptySeriesError("a series needs at least one entry")
        if np.any(np.diff(self.days) <= 0):
            raise InvalidArgumentError("days must be strictly increasing")
        if np.any(np.isinf(self.values)):
            raise InvalidArgumentError("present values must be finite")

    @classmethod
    def from_values(cls, values, start_day: int = 1, label: str = "") -> "DailySeries":
        values = np.asarray(
            [np.nan if v is None else v for v in values], dtype=float
        )
        return cls(np.arange(start_day, start_day + len(values)), values, label)

    def __len__(self):
        return len(self.days)

    @property
    def start_day(self) -> int:
        return int(self.days[0])

    @property
    def end_day(self) -> int:
        return int(self.days[-1])

    @property
    def is_contiguous(self) -> bool:
        return self.end_day - self.start_day + 1 == len(self.days)

    def present(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def value_at(self, day: int) -> float:
        pos = np.searchsorted(self.days, day)
        if pos < len(self.days) and self.days[pos] == day:
            return float(self.values[pos])
        return float("nan")

    def window(self, first: int, last: int) -> "DailySeries":
        """Entries with ``first <= day <= last``."""
        mask = (self.days >= first) & (self.days <= last)
        if not mask.any():
            raise EmptySeriesError(f"no entries between day {first} and {last}")
        return DailySeries(self.days[mask], self.values[mask], self.label)

    def dropna(self) -> "DailySeries":
        mask = self.present()
        if not mask.any():
            raise EmptySeriesError(f"series {self.label!r} has no present values")
        return DailySeries(self.days[mask], self.values[mask], self.label)

    def reindex(self, days: Sequence[int]) -> "DailySeries":
        days = np.asarray(days, dtype=np.int64)
        out = np.full(len(days), np.nan)
        pos = np.searchsorted(self.days, days)
        pos_c = np.minimum(pos, len(self.days) - 1)
        hit = self.days[pos_c] == days
        out[hit] = self.values[pos_c[hit]]
        return DailySeries(days, out, self.label)


def simple_moving_average(series: DailySeries, window: int = 7) -> DailySeries:
    """Trailing moving average over calendar days.

    The value at day ``d`` is the mean of the present values among days
    ``d - window + 1 .. d``; a window without present values yields NaN.
    Output starts at ``series.start_day + window - 1``.
    """
    if window < 1:
        raise InvalidArgumentError("window must be >= 1")
    span = series.end_day - series.start_day + 1
    if window > span:
        raise InvalidArgumentError(
            f"window {window} exceeds series length {span}"
        )
    if window == 1:
        return DailySeries(series.days.copy(), series.values.copy(), series.label)

    present = series.present()
    csum = np.concatenate([[0.0], np.cumsum(np.where(present, series.values, 0.0))])
    ccount = np.concatenate([[0], np.cumsum(present)])

    keep = series.days >= series.start_day + window - 1
    out_days = series.days[keep]
    hi = np.nonzero(keep)[0] + 1
    lo = np.searchsorted(series.days, out_days - window + 1, side="left")
    total = csum[hi] - csum[lo]
    count = ccount[hi] - ccount[lo]
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(count > 0, total / np.maximum(count, 1), np.nan)
    return DailySeries(out_days, values, series.label)


def match_day(date_2020: dt.date, cal: StudyCalendar) -> dt.date:
    """2019 comparison day for a 2020 study day.

    Holidays use the calendar's explicit table. Any other day maps to the
    2019 date with the same weekday that lies within three days of the
    same calendar position a year earlier; inside the study window that
    is always the date 364 days before.
    """
    if not cal.in_window(date_2020):
        raise OutOfRangeError(f"{date_2020} is outside the study window")
    for d20, d19 in cal.holiday_map:
        if d20 == date_2020:
            return d19
    try:
        anchor = date_2020.replace(year=date_2020.year - 1)
    except ValueError:  # Feb 29
        anchor = date_2020.replace(year=date_2020.year - 1, day=28)
    for offset in range(-3, 4):
        cand = anchor + dt.timedelta(days=offset)
        if cand.weekday() == date_2020.weekday():
            return cand
    raise AssertionError("unreachable: seven consecutive days cover every weekday")


def reduction(v_2020: float, v_2019: float) -> float:
    """Fractional drop of a 2020 volume against its 2019 baseline."""
    if v_2019 <= 0 or not np.isfinite(v_2019):
        raise UndefinedBaselineError(f"baseline volume must be positive, got {v_2019}")
    if v_2020 < 0:
        raise InvalidArgumentError("2020 volume must be non-negative")
    return 1.0 - v_2020 / v_2019


DayFilter = Literal["all-week", "weekday", "weekend"]


@dataclass(frozen=True)
class SliceSpec:
    day_filter: DayFilter = "all-week"
    hours: frozenset = field(default_factory=lambda: frozenset(range(24)))
    name: str = ""

    def __post_init__(self):
        if self.day_filter not in ("all-week", "weekday", "weekend"):
            raise InvalidArgumentError(f"unknown day filter {self.day_filter!r}")
        hours = frozenset(int(h) for h in self.hours)
        if not hours or min(hours) < 0 or max(hours) > 23:
            raise InvalidArgumentError("hour set must be nonempty within 0..23")
        object.__setattr__(self, "hours", hours)

    def accepts(self, date: dt.date) -> bool:
        if self.day_filter == "weekday":
            return date.weekday() < 5
        if self.day_filter == "weekend":
            return date.weekday() >= 5
        return True


ALL_HOURS = frozenset(range(24))
# Two commute definitions circulate for the same analysis: 7-9h & 18-20h
# (figure caption) and 8-9h & 18-20h (CPD results table). Both ship.
HOUR_PRESETS = {
    "all": ALL_HOURS,
    "commute": frozenset({7, 8, 18, 19}),
    "commute-table": frozenset({8, 18, 19}),
    "afternoon": frozenset({14, 15, 16}),
    "nighttime": frozenset({21, 22, 23}),
}

SEASONALITY_SLICES = (
    SliceSpec("all-week", HOUR_PRESETS["all"], "all-week/all-hours"),
    SliceSpec("all-week", HOUR_PRESETS["afternoon"], "all-week/afternoon"),
    SliceSpec("all-week", HOUR_PRESETS["nighttime"], "all-week/nighttime"),
    SliceSpec("weekday", HOUR_PRESETS["all"], "weekday/all-hours"),
    SliceSpec("weekday", HOUR_PRESETS["commute"], "weekday/commute"),
    SliceSpec("weekend", HOUR_PRESETS["all"], "weekend/all-hours"),
)


@dataclass
class HourlySeries:
    """Dense (day, hour, id) grid of non-negative counts, NaN = missing.

    ``days`` lists the days that occur in the data (2019 days carry
    non-positive indices relative to the 2020 origin); ``hours`` the
    hours that occur for any id.
    """

    days: np.ndarray
    hours: np.ndarray
    ids: tuple
    counts: np.ndarray

    def __post_init__(self):
        self.days = np.asarray(self.days, dtype=np.int64)
        self.hours = np.asarray(self.hours, dtype=np.int64)
        self.ids = tuple(self.ids)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.counts.shape != (len(self.days), len(self.hours), len(self.ids)):
            raise InvalidArgumentError("counts grid shape does not match its axes")
        if np.any(self.counts < 0):
            raise InvalidArgumentError("counts must be non-negative")

    @classmethod
    def from_records(cls, records: Iterable[tuple]) -> "HourlySeries":
        """Build the grid from ``(day, hour, id, count)`` tuples.

        A ``None``/NaN count marks an explicitly missing cell.
        """
        records = list(records)
        if not records:
            raise EmptySeriesError("no hourly records")
        days = sorted({int(r[0]) for r in records})
        hours = sorted({int(r[1]) for r in records})
        ids = sorted({r[2] for r in records}, key=str)
        di = {d: i for i, d in enumerate(days)}
        hi = {h: i for i, h in enumerate(hours)}
        ii = {s: i for i, s in enumerate(ids)}
        grid = np.full((len(days), len(hours), len(ids)), np.nan)
        seen = set()
        for day, hour, sid, count in records:
            key = (int(day), int(hour), sid)
            if key in seen:
                raise InvalidArgumentError(f"duplicate hourly key {key}")
            seen.add(key)
            if not 0 <= int(hour) <= 23:
                raise InvalidArgumentError(f"hour {hour} outside 0..23")
            if count is not None and not np.isnan(count):
                if count < 0:
                    raise InvalidArgumentError(f"negative count at {key}")
                grid[di[key[0]], hi[key[1]], ii[sid]] = float(count)
        return cls(np.array(days), np.array(hours), tuple(ids), grid)

    def records(self):
        """Present cells as ``(day, hour, id, count)`` in grid order."""
        for a, b, c in zip(*np.nonzero(~np.isnan(self.counts))):
            yield (int(self.days[a]), int(self.hours[b]), self.ids[c],
                   float(self.counts[a, b, c]))

    def missing_cells(self) -> list[tuple[int, int, object]]:
        return [
            (int(self.days[a]), int(self.hours[b]), self.ids[c])
            for a, b, c in zip(*np.nonzero(np.isnan(self.counts)))
        ]

    def drop_ids(self, ids) -> "HourlySeries":
        drop = set(ids)
        keep = [i for i, s in enumerate(self.ids) if s not in drop]
        return HourlySeries(self.days, self.hours,
                            tuple(self.ids[i] for i in keep),
                            self.counts[:, :, keep])


def slice_aggregate(hourly: HourlySeries, slice: SliceSpec,
                    cal: StudyCalendar) -> DailySeries:
    """Per-day totals over all ids and the slice's hours.

    Days rejected by the day filter are absent from the result. A day
    whose selected cells are all missing gets NaN.
    """
    hour_mask = np.isin(hourly.hours, sorted(slice.hours))
    day_mask = np.array([slice.accepts(cal.date_of(d)) for d in hourly.days], bool)
    if not hour_mask.any() or not day_mask.any():
        raise EmptySeriesError(
            f"slice {slice.name or slice.day_filter!r} selects no data"
        )
    block = hourly.counts[day_mask][:, hour_mask, :]
    flat = block.reshape(block.shape[0], -1)
    any_present = (~np.isnan(flat)).any(axis=1)
    totals = np.where(any_present, np.nansum(flat, axis=1), np.nan)
    return DailySeries(hourly.days[day_mask], totals, slice.name)


def matched_totals(hourly: HourlySeries, slice: SliceSpec,
                   cal: StudyCalendar) -> tuple[DailySeries, DailySeries]:
    """Slice totals for study days and for their matched 2019 days.

    The 2019 side is aggregated over the same hours on the matched day,
    whatever its weekday. Both series share the study days of the slice;
    absent baselines are NaN.
    """
    current = slice_aggregate(hourly, slice, cal)
    base = slice_aggregate(
        hourly, SliceSpec("all-week", slice.hours, "baseline"), cal
    )
    study = current.days[(current.days >= 1) & (current.days <= cal.horizon)]
    if len(study) == 0:
        raise EmptySeriesError("no study-window days in hourly data")
    v20 = np.array([current.value_at(d) for d in study])
    v19 = np.array([base.value_at(cal.day_index(match_day(cal.date_of(d), cal)))
                    for d in study])
    return DailySeries(study, v20, slice.name), DailySeries(study, v19, "baseline")


def ratio_reduction(v20: DailySeries, v19: DailySeries, label: str = "") -> DailySeries:
    """Elementwise reduction; NaN where either side is missing or the
    baseline is zero."""
    out = np.full(len(v20), np.nan)
    for k, (day, a, b) in enumerate(zip(v20.days, v20.values, v19.values)):
        if np.isnan(a) or np.isnan(b):
            continue
        try:
            out[k] = reduction(a, b)
        except UndefinedBaselineError:
            log.info("day %d dropped: zero baseline for %s", day, label)
    return DailySeries(v20.days, out, label)


def reduction_series(hourly: HourlySeries, slice: SliceSpec, cal: StudyCalendar,
                     mode: str = "") -> DailySeries:
    """Daily reduction ``1 - total_2020 / total_2019`` for study days."""
    v20, v19 = matched_totals(hourly, slice, cal)
    label = f"{mode}:{slice.name}" if mode else slice.name
    return ratio_reduction(v20, v19, label)


def hourly_reduction(hourly: HourlySeries, slice: SliceSpec, cal: StudyCalendar):
    """Per (day, hour) reduction over all ids, for the slice's study days.

    Returns parallel arrays ``days, hours, values`` in day-then-hour order.
    """
    pos = {int(d): i for i, d in enumerate(hourly.days)}
    hcols = [k for k, h in enumerate(hourly.hours) if int(h) in slice.hours]
    days, hours, values = [], [], []
    for d in hourly.days:
        d = int(d)
        if not (1 <= d <= cal.horizon) or not slice.accepts(cal.date_of(d)):
            continue
        base = pos.get(cal.day_index(match_day(cal.date_of(d), cal)))
        for k in hcols:
            now = hourly.counts[pos[d], k, :]
            value = np.nan
            if base is not None:
                then = hourly.counts[base, k, :]
                ok = ~(np.isnan(now) | np.isnan(then))
                b = then[ok].sum()
                if ok.any() and b > 0:
                    value = 1.0 - now[ok].sum() / b
            days.append(d)
            hours.append(int(hourly.hours[k]))
            values.append(value)
    return np.array(days), np.array(hours), np.array(values, dtype=float)


def missing_rates(hourly: HourlySeries) -> dict:
    rates = np.isnan(hourly.counts).mean(axis=(0, 1))
    return {sid: float(r) for sid, r in zip(hourly.ids, rates)}


def rejected_sensors(hourly: HourlySeries,
                     ceiling: float = MISSING_RATE_CEILING) -> dict:
    return {sid: r for sid, r in missing_rates(hourly).items() if r > ceiling}


def impute_missing(hourly: HourlySeries,
                   ceiling: float = MISSING_RATE_CEILING) -> HourlySeries:
    """Fill missing cells with the median of the same hour/id one week
    before and one week after.

    Neighbours are read from the original grid; if neither exists the cell
    stays missing and is logged. Raises ``SensorRejectedError`` when any
    id's missing rate exceeds ``ceiling``.
    """
    bad = rejected_sensors(hourly, ceiling)
    if bad:
        raise SensorRejectedError(sorted(bad, key=str), bad)

    counts = hourly.counts
    filled = counts.copy()
    pos = {int(d): i for i, d in enumerate(hourly.days)}
    unfilled = []
    for a, b, c in zip(*np.nonzero(np.isnan(counts))):
        day = int(hourly.days[a])
        neigh = []
        for other in (day - 7, day + 7):
            j = pos.get(other)
            if j is not None and not np.isnan(counts[j, b, c]):
                neigh.append(counts[j, b, c])
        if neigh:
            filled[a, b, c] = float(np.median(neigh))
        else:
            unfilled.append((day, int(hourly.hours[b]), hourly.ids[c]))
    if unfilled:
        log.warning("%d cell(s) left missing after imputation: %s",
                    len(unfilled), unfilled[:10])
    return HourlySeries(hourly.days, hourly.hours, hourly.ids, filled)
