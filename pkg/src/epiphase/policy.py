"""OxCGRT-style policy indices.

Every indicator contributes a 0-100 sub-score; a composite is the plain
mean over its indicator set (13 indicators for the government response
index, C5/C6/C7 for the mobility restriction index). Flagged indicators
use the legacy additive-flag formula ``100 (score + flag) / (max + 1)``,
unflagged ones ``100 score / max``. Indicator metadata and the Seoul
2020 record timeline are data files under ``epiphase/data``.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import InvalidArgumentError, InvalidRecordError

log = logging.getLogger(__name__)

FORMULA_VERSION = "oxcgrt-legacy-additive-flag"
MOBILITY_SET = ("C5", "C6", "C7")


@dataclass(frozen=True)
class Indicator:
    code: str
    name: str
    max_score: int
    flagged: bool
    mobility: bool = False


def _read_text(name, path):
    if path is None:
        return resources.files("epiphase.data").joinpath(name).read_text()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_indicators(path=None) -> dict:
    rows = csv.DictReader(_read_text("indicators.csv", path).splitlines())
    return {
        r["code"]: Indicator(r["code"], r["name"], int(r["max_score"]),
                             r["flagged"] == "1", r.get("mobility") == "1")
        for r in rows
    }


INDICATORS = load_indicators()
GOVERNMENT_SET = tuple(INDICATORS)


@dataclass(frozen=True)
class PolicyRecord:
    indicator: str
    start_day: int
    end_day: int
    score: int
    flag: int | None = None

    def active(self, day: int) -> bool:
        return self.start_day <= day <= self.end_day


def sub_index(score: int, flag: int | None, max_score: int, flagged: bool) -> float:
    """0-100 sub-score of one indicator; an absent flag counts as 0."""
    if max_score < 1:
        raise InvalidRecordError("max_score must be positive")
    if score < 0 or score > max_score:
        raise InvalidRecordError(f"score {score} outside 0..{max_score}")
    if score == 0:
        return 0.0
    if flagged:
        return 100.0 * (score + (flag or 0)) / (max_score + 1)
    return 100.0 * score / max_score


def validate_records(records, indicators=None, horizon: int | None = None) -> list:
    """Check scores, flags and day ranges; equal start days per indicator
    are rejected because the override order would be ambiguous."""
    indicators = indicators or INDICATORS
    starts = set()
    for r in records:
        ind = indicators.get(r.indicator)
        if ind is None:
            raise InvalidRecordError(f"unknown indicator {r.indicator!r}")
        if not 0 <= r.score <= ind.max_score:
            raise InvalidRecordError(
                f"{r.indicator}: score {r.score} outside 0..{ind.max_score}"
            )
        if r.flag not in (None, 0, 1):
            raise InvalidRecordError(f"{r.indicator}: flag must be 0, 1 or empty")
        if r.start_day < 1 or r.end_day < r.start_day:
            raise InvalidRecordError(f"{r.indicator}: bad day range {r.start_day}-{r.end_day}")
        if horizon is not None and r.end_day > horizon:
            raise InvalidRecordError(f"{r.indicator}: end day {r.end_day} beyond horizon")
        key = (r.indicator, r.start_day)
        if key in starts:
            raise InvalidRecordError(f"{r.indicator}: two records start on day {r.start_day}")
        starts.add(key)
    return list(records)


def load_records(path=None, indicators=None) -> list:
    """Read ``indicator,start_day,end_day,score,flag``; defaults to the
    packaged Seoul 2020 encoding."""
    rows = csv.DictReader(_read_text("policy_seoul_2020.csv", path).splitlines())
    records = []
    for line, r in enumerate(rows, start=2):
        try:
            flag = r["flag"].strip()
            records.append(PolicyRecord(
                r["indicator"].strip(), int(r["start_day"]), int(r["end_day"]),
                int(r["score"]), int(flag) if flag else None,
            ))
        except (KeyError, ValueError) as exc:
            raise InvalidRecordError(f"line {line}: {exc}") from exc
    return validate_records(records, indicators)


def active_record(records, indicator: str, day: int) -> PolicyRecord | None:
    """The active record with the latest start day, if any."""
    best = None
    for r in records:
        if r.indicator == indicator and r.active(day):
            if best is None or r.start_day > best.start_day:
                best = r
    return best


def composite_index(records, indicator_set, day: int, indicators=None) -> float:
    """Mean sub-score over ``indicator_set`` on ``day``; indicators with no
    active record score 0."""
    indicators = indicators or INDICATORS
    codes = list(indicator_set)
    if not codes:
        raise InvalidArgumentError("indicator_set is empty")
    total = 0.0
    for code in codes:
        ind = indicators.get(code)
        if ind is None:
            raise InvalidArgumentError(f"unknown indicator {code!r}")
        rec = active_record(records, code, day)
        if rec is not None:
            total += sub_index(rec.score, rec.flag, ind.max_score, ind.flagged)
    return total / len(codes)


@dataclass
class IndexSeries:
    days: np.ndarray
    government_response: np.ndarray
    mobility_restriction: np.ndarray
    formula: str = FORMULA_VERSION

    def rows(self):
        for d, g, m in zip(self.days, self.government_response, self.mobility_restriction):
            yield int(d), float(g), float(m)


def index_series(records, horizon: int, indicators=None) -> IndexSeries:
    indicators = indicators or INDICATORS
    gov_set = tuple(indicators)
    mob_set = tuple(c for c, i in indicators.items() if i.mobility) or MOBILITY_SET
    days = np.arange(1, horizon + 1)
    gov = np.array([composite_index(records, gov_set, d, indicators) for d in days])
    mob = np.array([composite_index(records, mob_set, d, indicators) for d in days])
    return IndexSeries(days, gov, mob)
