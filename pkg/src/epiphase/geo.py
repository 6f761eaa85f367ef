"""Day-to-day dispersion of contact locations.

For consecutive days t, t+1 with contact-location sets P_t and P_{t+1}:

* grouped distance: mean distance over all cross pairs (symmetric);
* directed Hausdorff distance from P_{t+1} to P_t: the largest distance
  from a new-day point to its nearest old-day point.

Their difference (grouped minus Hausdorff) is the dispersion momentum.
Positive momentum means every new location lies within the grouped
distance of some existing location (a geospatial peak); non-positive
momentum marks expansion or contraction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError, UndefinedDayError
from .series import DailySeries, simple_moving_average

log = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0088

PEAK = "peak"
SPREAD = "expansion/contraction"


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise InvalidArgumentError("coordinates must be finite")
        if not (-90 <= self.lat <= 90 and -180 <= self.lon <= 180):
            raise InvalidArgumentError(f"coordinate out of bounds: {self.lat}, {self.lon}")


@dataclass
class ContactDay:
    """Contact locations published for one day, as an (k, 2) lat/lon array.

    Exact duplicate coordinates are collapsed on construction.
    """

    day: int
    points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    duplicates: int = 0

    def __post_init__(self):
        pts = np.asarray(
            [(p.lat, p.lon) if isinstance(p, GeoPoint) else p for p in self.points],
            dtype=float,
        ).reshape(-1, 2)
        if len(pts):
            if not np.all(np.isfinite(pts)):
                raise InvalidArgumentError(f"non-finite coordinate on day {self.day}")
            if np.any(np.abs(pts[:, 0]) > 90) or np.any(np.abs(pts[:, 1]) > 180):
                raise InvalidArgumentError(f"coordinate out of bounds on day {self.day}")
            uniq = np.unique(pts, axis=0)
            dup = len(pts) - len(uniq)
            if dup:
                log.debug("day %s: collapsed %d duplicate point(s)", self.day, dup)
            self.duplicates += dup
            pts = uniq
        self.points = pts

    def __len__(self):
        return len(self.points)


def _as_points(p) -> np.ndarray:
    if isinstance(p, ContactDay):
        return p.points
    if isinstance(p, GeoPoint):
        return np.array([[p.lat, p.lon]])
    return np.asarray(p, dtype=float).reshape(-1, 2)


def haversine_km(a, b, planar: bool = False) -> float:
    """Great-circle distance in km between two (lat, lon) points.

    ``planar=True`` instead treats the coordinates as km offsets and
    returns the Euclidean distance.
    """
    (lat1, lon1), (lat2, lon2) = _as_points(a)[0], _as_points(b)[0]
    if planar:
        dy, dx = lat2 - lat1, lon2 - lon1
        return math.sqrt(dy * dy + dx * dx)
    p1, p2 = math.radians(lat1), math.radians(lat2)
    h = (math.sin((p2 - p1) / 2) ** 2
         + math.cos(p1) * math.cos(p2) * math.sin(math.radians(lon2 - lon1) / 2) ** 2)
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(min(h, 1.0)))


def pairwise_km(a, b, planar: bool = False) -> np.ndarray:
    """Distance matrix ``D[i, j]`` between the i-th point of ``a`` and the
    j-th point of ``b``."""
    A, B = _as_points(a), _as_points(b)
    if planar:
        dy = B[None, :, 0] - A[:, None, 0]
        dx = B[None, :, 1] - A[:, None, 1]
        return np.sqrt(dy * dy + dx * dx)
    la, lb = np.radians(A[:, 0])[:, None], np.radians(B[:, 0])[None, :]
    dlon = np.radians(B[None, :, 1] - A[:, None, 1])
    h = np.sin((lb - la) / 2) ** 2 + np.cos(la) * np.cos(lb) * np.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.minimum(h, 1.0)))


def _require(A, B, what):
    if len(A) == 0 or len(B) == 0:
        raise UndefinedDayError(f"{what}: empty point set")


def grouped_distance(p_t, p_t1, planar: bool = False) -> float:
    A, B = _as_points(p_t), _as_points(p_t1)
    _require(A, B, "grouped distance")
    D = pairwise_km(A, B, planar)
    # fsum: exact summation, independent of pair order
    return math.fsum(D.ravel().tolist()) / (len(A) * len(B))


def directed_hausdorff(p_t1, p_t, planar: bool = False) -> float:
    """max over new-day points of the distance to the nearest old-day point."""
    A, B = _as_points(p_t1), _as_points(p_t)
    _require(A, B, "directed Hausdorff distance")
    return float(pairwise_km(A, B, planar).min(axis=1).max())


@dataclass(frozen=True)
class DispersionPoint:
    day: int
    d_g: float
    d_h: float

    @property
    def momentum(self) -> float:
        return self.d_g - self.d_h


@dataclass
class MomentumSeries:
    """Per-pair metrics (``day`` = first day of the pair) plus smoothing."""

    points: list
    raw: DailySeries
    smoothed: DailySeries
    undefined_days: list = field(default_factory=list)

    def rows(self):
        """Tuples ``(day, d_g, d_h, momentum, momentum_sma, regime)``."""
        for p in self.points:
            sma = self.smoothed.value_at(p.day)
            regime = "" if math.isnan(sma) else (PEAK if sma > 0 else SPREAD)
            yield p.day, p.d_g, p.d_h, p.momentum, sma, regime


def momentum_series(days: Sequence[ContactDay], window: int = 7,
                    planar: bool = False) -> MomentumSeries:
    """Grouped and Hausdorff distances for every consecutive day pair.

    Days absent from ``days`` count as empty. A pair with an empty side
    yields NaN metrics (never zero) and is listed in ``undefined_days``.
    The momentum is then smoothed with a trailing window.
    """
    by_day = {}
    for cd in days:
        if cd.day in by_day:
            raise InvalidArgumentError(f"day {cd.day} given twice")
        by_day[cd.day] = cd
    usable = sorted(d for d, cd in by_day.items() if len(cd))
    if len(usable) < 2:
        raise InsufficientDataError("need at least two days with contact locations")

    first, last = min(by_day), max(by_day)
    points, undefined = [], []
    for t in range(first, last):
        a, b = by_day.get(t), by_day.get(t + 1)
        if a is None or b is None or not len(a) or not len(b):
            points.append(DispersionPoint(t, math.nan, math.nan))
            undefined.append(t)
            continue
        points.append(DispersionPoint(
            t, grouped_distance(a, b, planar), directed_hausdorff(b, a, planar)
        ))
    if len(undefined) == len(points):
        raise InsufficientDataError("no consecutive pair of days has contact locations")

    raw = DailySeries([p.day for p in points], [p.momentum for p in points],
                      "momentum")
    smoothed = simple_moving_average(raw, window) if window > 1 else raw
    return MomentumSeries(points, raw, smoothed, undefined)


def sign_transitions(momentum: DailySeries, min_run: int = 7) -> list[int]:
    """Days where the momentum sign flips and holds for ``min_run`` days.

    Positive values are the peak regime, zero or negative the
    expansion/contraction regime. Missing values are skipped.
    """
    if min_run < 1:
        raise InvalidArgumentError("min_run must be >= 1")
    mask = momentum.present()
    days = momentum.days[mask]
    positive = momentum.values[mask] > 0
    if len(days) == 0:
        return []
    out = []
    regime = positive[0]
    k = 1
    while k < len(days):
        if positive[k] != regime:
            run = positive[k:k + min_run]
            if len(run) == min_run and np.all(run == positive[k]):
                out.append(int(days[k]))
                regime = positive[k]
                k += min_run
                continue
        k += 1
    return out
