"""Multiple mean-shift detection by exact dynamic programming.

Each segment is fitted with its own intercept, so the segment cost is the
sum of squared deviations from the segment mean. For a fixed number of
breaks ``m`` the partition minimising the total cost is found exactly
(Bai & Perron style dynamic programming over a cost matrix), and
break-date uncertainty is summarised by a within-segment residual
bootstrap.

The number of breaks is picked by an information criterion with ``2m + 1``
free parameters (m break dates, m + 1 means). Two are available: BIC and
the Liu-Wu-Zidek (LWZ) criterion. LWZ is the default because BIC keeps
about 7% spurious breaks on 189-day series with one-week minimum segments.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, MissingDataError
from .series import DailySeries

log = logging.getLogger(__name__)

CI_METHOD = "bootstrap-percentile"
CRITERIA = ("BIC", "LWZ")
LWZ_C0 = 0.299
LWZ_DELTA0 = 0.1


@dataclass(frozen=True)
class BreakConfig:
    max_breaks: int = 8
    min_segment: int = 7
    criterion: str = "LWZ"
    bootstrap_reps: int = 1000
    ci_level: float = 0.95
    seed: int = 0
    ssr_floor: float = 1e-12

    def __post_init__(self):
        if self.max_breaks < 0:
            raise InvalidArgumentError("max_breaks must be non-negative")
        if self.min_segment < 1:
            raise InvalidArgumentError("min_segment must be positive")
        if self.criterion.upper() not in CRITERIA:
            raise InvalidArgumentError(f"unsupported criterion {self.criterion!r}")
        if self.bootstrap_reps < 1:
            raise InvalidArgumentError("bootstrap_reps must be positive")
        if not 0 < self.ci_level < 1:
            raise InvalidArgumentError("ci_level must lie in (0, 1)")

    def feasible_max_breaks(self, n: int) -> int:
        """Largest break count whose segments all fit ``min_segment``."""
        return max(0, min(self.max_breaks, n // self.min_segment - 1))


@dataclass
class SegmentationResult:
    breaks: list
    segment_means: list
    ssr: float
    m_selected: int
    intervals: list = field(default_factory=list)
    criterion_trace: list = field(default_factory=list)
    method: str = CI_METHOD
    criterion: str = "LWZ"
    n: int = 0
    positions: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "breaks": [int(b) for b in self.breaks],
            "segment_means": [float(v) for v in self.segment_means],
            "ssr": float(self.ssr),
            "m_selected": int(self.m_selected),
            "intervals": [[int(a), int(b)] for a, b in self.intervals],
            "criterion_trace": [[int(m), float(v)] for m, v in self.criterion_trace],
            "method": self.method,
            "criterion": self.criterion,
            "n": int(self.n),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SegmentationResult":
        return cls(
            breaks=[int(b) for b in d["breaks"]],
            segment_means=[float(v) for v in d["segment_means"]],
            ssr=float(d["ssr"]),
            m_selected=int(d["m_selected"]),
            intervals=[(int(a), int(b)) for a, b in d.get("intervals", [])],
            criterion_trace=[(int(m), float(v)) for m, v in d.get("criterion_trace", [])],
            method=d.get("method", CI_METHOD),
            criterion=d.get("criterion", "LWZ"),
            n=int(d.get("n", 0)),
            notes=list(d.get("notes", [])),
        )


def _values(y) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(y, DailySeries):
        return y.values, y.days
    arr = np.asarray(y, dtype=float)
    return arr, np.arange(1, len(arr) + 1)


def segment_ssr(y, i: int, j: int) -> float:
    """Sum of squared deviations from the mean over positions ``i..j``.

    Positions are 1-based and inclusive.
    """
    values, _ = _values(y)
    if not 1 <= i <= j <= len(values):
        raise InvalidArgumentError(f"invalid segment [{i}, {j}] for length {len(values)}")
    seg = values[i - 1:j]
    if np.isnan(seg).any():
        raise MissingDataError(f"missing value inside segment [{i}, {j}]")
    return float(np.sum((seg - seg.mean()) ** 2))


def cost_matrix(values: np.ndarray, min_segment: int = 1) -> np.ndarray:
    """``C[i, j]`` = SSR of segment ``i..j`` (0-based, inclusive).

    Entries with ``j < i`` or fewer than ``min_segment`` points are inf.
    Each row is accumulated relative to its first value, which keeps the
    running-sum formula well conditioned.
    """
    n = len(values)
    z = np.triu(values[None, :] - values[:, None])
    s1 = np.cumsum(z, axis=1)
    s2 = np.cumsum(z * z, axis=1)
    length = np.arange(n)[None, :] - np.arange(n)[:, None] + 1
    with np.errstate(divide="ignore", invalid="ignore"):
        cost = s2 - s1 * s1 / length
    cost = np.maximum(cost, 0.0)
    cost[length < min_segment] = np.inf
    return cost


def _dp_tables(cost: np.ndarray, max_m: int):
    """Optimal totals ``F[k][j]`` for prefixes ``0..j`` split into k+1
    segments, plus back-pointers to the start of the last segment."""
    n = cost.shape[0]
    cols = np.arange(n)
    tables = [cost[0].copy()]
    backs = []
    for _ in range(max_m):
        prev = tables[-1]
        cand = prev[:-1, None] + cost[1:, :]
        # argmin returns the first minimum: earliest start wins ties
        arg = np.argmin(cand, axis=0)
        tables.append(cand[arg, cols])
        backs.append(arg + 1)
    return tables, backs


def _backtrack(backs, m: int, n: int) -> list:
    ends = []
    j = n - 1
    for k in range(m, 0, -1):
        start = int(backs[k - 1][j])
        ends.append(start - 1)
        j = start - 1
    return sorted(ends)


def _assemble(values, days, ends, m_selected) -> SegmentationResult:
    bounds = [0] + [e + 1 for e in ends] + [len(values)]
    means, ssr = [], 0.0
    for a, b in zip(bounds[:-1], bounds[1:]):
        seg = values[a:b]
        means.append(float(seg.mean()))
        ssr += float(np.sum((seg - seg.mean()) ** 2))
    return SegmentationResult(
        breaks=[int(days[e]) for e in ends],
        segment_means=means,
        ssr=ssr,
        m_selected=m_selected,
        n=len(values),
        positions=list(ends),
    )


def _checked(y, cfg: BreakConfig, m: int):
    values, days = _values(y)
    if np.isnan(values).any():
        raise MissingDataError("change-point detection needs a series without gaps")
    n = len(values)
    if m < 0:
        raise InvalidArgumentError("m must be non-negative")
    if (m + 1) * cfg.min_segment > n:
        raise InvalidArgumentError(
            f"{m} breaks with min_segment {cfg.min_segment} need "
            f"{(m + 1) * cfg.min_segment} points, series has {n}"
        )
    return values, days


def optimal_partition(y, m: int, cfg: BreakConfig = BreakConfig()) -> SegmentationResult:
    """Globally optimal split into ``m + 1`` segments.

    Ties between equal-cost partitions resolve toward the earliest break.
    """
    if m > cfg.max_breaks:
        raise InvalidArgumentError(f"m={m} exceeds max_breaks={cfg.max_breaks}")
    values, days = _checked(y, cfg, m)
    cost = cost_matrix(values, cfg.min_segment)
    _, backs = _dp_tables(cost, m)
    return _assemble(values, days, _backtrack(backs, m, len(values)), m)


def bic(ssr: float, n: int, m: int, floor: float = 1e-12) -> tuple[float, bool]:
    """``n ln(SSR/n) + (2m+1) ln n``; the flag reports a floored SSR/n."""
    ratio = ssr / n
    clamped = ratio < floor
    return n * math.log(max(ratio, floor)) + (2 * m + 1) * math.log(n), clamped


def lwz(ssr: float, n: int, m: int, floor: float = 1e-12) -> tuple[float, bool]:
    """Liu-Wu-Zidek criterion scaled by n to share BIC's units.

    ``n ln(SSR/(n-p)) + p c0 (ln n)^(2+d0)`` with p = 2m+1, c0 = 0.299,
    d0 = 0.1.
    """
    p = 2 * m + 1
    ratio = ssr / max(n - p, 1)
    clamped = ratio < floor
    penalty = p * LWZ_C0 * math.log(n) ** (2 + LWZ_DELTA0)
    return n * math.log(max(ratio, floor)) + penalty, clamped


def information_criterion(ssr: float, n: int, m: int, criterion: str = "LWZ",
                          floor: float = 1e-12) -> tuple[float, bool]:
    if criterion.upper() == "BIC":
        return bic(ssr, n, m, floor)
    return lwz(ssr, n, m, floor)


def select_breaks(y, cfg: BreakConfig = BreakConfig()) -> SegmentationResult:
    """Fit 0..max_breaks breaks and keep the criterion minimiser.

    Ties go to the smaller break count.
    """
    values, days = _checked(y, cfg, cfg.max_breaks)
    n = len(values)
    cost = cost_matrix(values, cfg.min_segment)
    tables, backs = _dp_tables(cost, cfg.max_breaks)

    trace, clamped_at = [], []
    best_m, best_val = 0, math.inf
    for m in range(cfg.max_breaks + 1):
        value, clamped = information_criterion(
            float(tables[m][n - 1]), n, m, cfg.criterion, cfg.ssr_floor
        )
        if clamped:
            clamped_at.append(m)
        trace.append((m, value))
        if value < best_val:
            best_m, best_val = m, value

    result = _assemble(values, days, _backtrack(backs, best_m, n), best_m)
    result.criterion_trace = trace
    result.criterion = cfg.criterion.upper()
    if clamped_at:
        result.notes.append(
            f"ssr floor {cfg.ssr_floor:g} applied to SSR/n for m in {clamped_at}"
        )
    return result


def _fitted(values, positions, means):
    bounds = [0] + [p + 1 for p in positions] + [len(values)]
    fit = np.empty(len(values))
    segs = []
    for (a, b), mu in zip(zip(bounds[:-1], bounds[1:]), means):
        fit[a:b] = mu
        segs.append((a, b))
    return fit, segs


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Independent stream per (seed, replicate) pair."""
    return np.random.default_rng([int(seed) % 2**64, int(replicate)])


def bootstrap_ci(y, result: SegmentationResult,
                 cfg: BreakConfig = BreakConfig()) -> SegmentationResult:
    """Percentile intervals for break days from a residual bootstrap.

    Residuals are resampled with replacement inside their own segment and
    added back to the fitted segment means; every replicate is re-segmented
    with the same break count. Each interval is widened, if needed, so it
    contains the point estimate.
    """
    if cfg.bootstrap_reps < 100:
        raise InvalidArgumentError("bootstrap_reps must be at least 100")
    m = len(result.breaks)
    values, days = _checked(y, cfg, m)
    positions = result.positions or [
        int(np.searchsorted(days, b)) for b in result.breaks
    ]
    out = SegmentationResult(
        breaks=list(result.breaks), segment_means=list(result.segment_means),
        ssr=result.ssr, m_selected=result.m_selected,
        criterion_trace=list(result.criterion_trace), method=CI_METHOD,
        criterion=result.criterion,
        n=result.n or len(values), positions=list(positions),
        notes=list(result.notes),
    )
    if m == 0:
        return out

    fit, segs = _fitted(values, positions, result.segment_means)
    resid = values - fit
    draws = np.empty((cfg.bootstrap_reps, m), dtype=np.int64)
    kept = np.zeros(cfg.bootstrap_reps, dtype=bool)
    for r in range(cfg.bootstrap_reps):
        rng = replicate_rng(cfg.seed, r)
        synth = fit.copy()
        for a, b in segs:
            synth[a:b] += rng.choice(resid[a:b], size=b - a, replace=True)
        if not np.all(np.isfinite(synth)):
            continue
        cost = cost_matrix(synth, cfg.min_segment)
        _, backs = _dp_tables(cost, m)
        ends = _backtrack(backs, m, len(synth))
        if any(e < 0 for e in ends):
            continue
        draws[r] = days[ends]
        kept[r] = True

    discarded = int((~kept).sum())
    if discarded > 0.1 * cfg.bootstrap_reps:
        out.notes.append(
            f"unstable-ci: {discarded}/{cfg.bootstrap_reps} replicates discarded"
        )
    if not kept.any():
        out.intervals = [(b, b) for b in result.breaks]
        return out

    alpha = (1.0 - cfg.ci_level) / 2.0
    good = draws[kept]
    intervals = []
    for k, brk in enumerate(result.breaks):
        lo = int(np.quantile(good[:, k], alpha, method="lower"))
        hi = int(np.quantile(good[:, k], 1.0 - alpha, method="higher"))
        intervals.append((min(lo, brk), max(hi, brk)))
    out.intervals = intervals
    return out


def locate_break_hour(days, hours, values, break_day: int, radius: int = 1):
    """Hour-resolution refinement of a day-level break.

    Considers hourly observations on days ``break_day - radius`` through
    ``break_day + radius`` and returns the (day, hour) of the last
    observation before the single split with least two-segment SSR.
    Returns None when fewer than two observations fall in the window.
    """
    days = np.asarray(days)
    hours = np.asarray(hours)
    values = np.asarray(values, dtype=float)
    mask = (days >= break_day - radius) & (days <= break_day + radius) & ~np.isnan(values)
    if mask.sum() < 2:
        return None
    d, h, v = days[mask], hours[mask], values[mask]
    order = np.lexsort((h, d))
    d, h, v = d[order], h[order], v[order]
    cost = cost_matrix(v, 1)
    n = len(v)
    totals = cost[0, :-1] + cost[np.arange(1, n), n - 1]
    k = int(np.argmin(totals))
    return int(d[k]), int(h[k])
