"""Fusion of count breaks and dispersion transitions into labeled phases.

Rules applied to the candidate segments between consecutive transitions:

1. the first segment is the trigger;
2. a significant rising case trend (|t| of the day-on-count slope at or
   above a threshold) starts or continues an escalation; a new escalation
   after a peak or de-escalation opens a new wave;
3. a non-significant trend after an escalation is a peak; elsewhere it
   continues the current phase;
4. a significant falling trend is a de-escalation candidate, accepted only
   if the smoothed dispersion momentum averaged over the next ``lookahead``
   days is not positive; otherwise the transition is dropped and the
   current phase absorbs the segment.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRegressorError, InsufficientDataError, InvalidArgumentError
from .regression import ols_fit
from .series import HORIZON, DailySeries, StudyCalendar

log = logging.getLogger(__name__)

TRIGGER, ESCALATION, PEAK, DEESCALATION = "trigger", "escalation", "peak", "de-escalation"
KINDS = (TRIGGER, ESCALATION, PEAK, DEESCALATION)


@dataclass(frozen=True)
class PhaseLabel:
    kind: str
    wave: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown phase kind {self.kind!r}")
        if self.wave < 1:
            raise InvalidArgumentError("wave must be positive")

    @property
    def name(self) -> str:
        return self.kind if self.kind == TRIGGER else f"{self.kind}-{self.wave}"


@dataclass(frozen=True)
class Phase:
    label: PhaseLabel
    start_day: int
    end_day: int

    @property
    def name(self) -> str:
        return self.label.name

    @property
    def kind(self) -> str:
        return self.label.kind

    @property
    def wave(self) -> int:
        return self.label.wave


@dataclass
class PhaseTimeline:
    phases: list
    horizon: int = HORIZON
    events: list = field(default_factory=list)

    def __post_init__(self):
        if not self.phases:
            raise InvalidArgumentError("timeline needs at least one phase")
        if self.phases[0].start_day != 1 or self.phases[-1].end_day != self.horizon:
            raise InvalidArgumentError("timeline must span day 1 to the horizon")
        for a, b in zip(self.phases[:-1], self.phases[1:]):
            if b.start_day != a.end_day + 1:
                raise InvalidArgumentError("phases must be contiguous")
        for p in self.phases:
            if p.end_day < p.start_day:
                raise InvalidArgumentError("phase ends before it starts")
        if any(p.kind == TRIGGER for p in self.phases[1:]):
            raise InvalidArgumentError("trigger may only be the first phase")

    @property
    def boundaries(self) -> list[int]:
        return [p.end_day for p in self.phases[:-1]]

    def to_records(self, cal: StudyCalendar | None = None) -> list[dict]:
        cal = cal or StudyCalendar()
        return [
            {
                "kind": p.kind,
                "wave": p.wave,
                "name": p.name,
                "start_day": p.start_day,
                "end_day": p.end_day,
                "start_date": cal.date_of(p.start_day).isoformat(),
                "end_date": cal.date_of(p.end_day).isoformat(),
            }
            for p in self.phases
        ]

    @classmethod
    def from_records(cls, records, horizon: int | None = None) -> "PhaseTimeline":
        phases = [
            Phase(PhaseLabel(r["kind"], int(r["wave"])), int(r["start_day"]), int(r["end_day"]))
            for r in records
        ]
        return cls(phases, horizon or phases[-1].end_day)


@dataclass(frozen=True)
class PhaseConfig:
    horizon: int = HORIZON
    min_segment: int = 7
    slope_t_threshold: float = 2.0
    lookahead: int = 14
    merge_window: int = 4


def fuse_transitions(count_breaks, geo_transitions, merge_window: int = 4) -> list[int]:
    """Union of both transition lists with near-duplicates merged.

    Count breaks are kept as given; a geo transition within
    ``merge_window`` days of an already kept day is dropped.
    """
    if merge_window < 0:
        raise InvalidArgumentError("merge_window must be non-negative")
    kept = sorted({int(d) for d in count_breaks})
    for g in sorted({int(d) for d in geo_transitions}):
        if all(abs(g - k) > merge_window for k in kept):
            kept.append(g)
            kept.sort()
    return kept


def _segments(transitions, horizon):
    bounds = [0] + list(transitions) + [horizon]
    return [(a + 1, b) for a, b in zip(bounds[:-1], bounds[1:])]


def _drop_short(transitions, cfg: PhaseConfig, events: list) -> list[int]:
    trans = sorted({int(t) for t in transitions if 1 <= int(t) < cfg.horizon})
    while True:
        segs = _segments(trans, cfg.horizon)
        short = next((k for k, (a, b) in enumerate(segs)
                      if b - a + 1 < cfg.min_segment), None)
        if short is None or not trans:
            return trans
        victim = trans[short - 1] if short == len(segs) - 1 else trans[short]
        events.append(
            f"transition {victim} dropped: segment {segs[short]} shorter than "
            f"{cfg.min_segment} days"
        )
        trans.remove(victim)


def _trend(counts: DailySeries, start: int, end: int, threshold: float) -> int:
    """+1 rising, -1 falling, 0 not significant."""
    days = np.arange(start, end + 1)
    y = counts.reindex(days).values
    ok = ~np.isnan(y)
    try:
        fit = ols_fit(days[ok].astype(float), y[ok])
    except (InsufficientDataError, DegenerateRegressorError):
        return 0
    if math.isnan(fit.t1) or abs(fit.t1) < threshold:
        return 0
    return 1 if fit.beta1 > 0 else -1


def _lookahead_mean(momentum: DailySeries, start: int, length: int) -> float:
    vals = momentum.reindex(np.arange(start, start + length)).values
    vals = vals[~np.isnan(vals)]
    return float(vals.mean()) if len(vals) else math.nan


def build_timeline(transitions, counts_sma: DailySeries, momentum_sma: DailySeries,
                   cfg: PhaseConfig = PhaseConfig()) -> PhaseTimeline:
    """Label the segments between transitions and merge equal neighbours.

    A de-escalation candidate without any momentum data in its lookahead
    window is accepted on the case trend alone.
    """
    events: list[str] = []
    trans = _drop_short(transitions, cfg, events)
    segs = _segments(trans, cfg.horizon)

    # each entry: [kind, wave, start, end]
    out = [[TRIGGER, 1, segs[0][0], segs[0][1]]]
    wave = 1
    for start, end in segs[1:]:
        prev = out[-1][0]
        trend = _trend(counts_sma, start, end, cfg.slope_t_threshold)
        if trend > 0:
            if prev in (PEAK, DEESCALATION):
                wave += 1
            kind = ESCALATION
        elif trend < 0:
            if prev in (TRIGGER, DEESCALATION):
                kind = prev
            else:
                mean = _lookahead_mean(momentum_sma, start, cfg.lookahead)
                if mean > 0:
                    events.append(
                        f"transition {start - 1} dropped: de-escalation not confirmed "
                        f"(lookahead momentum mean {mean:.6g} > 0)"
                    )
                    kind = prev
                else:
                    kind = DEESCALATION
        else:
            kind = PEAK if prev == ESCALATION else prev

        if kind == prev:
            out[-1][3] = end
        else:
            out.append([kind, wave, start, end])

    for e in events:
        log.info(e)
    phases = [Phase(PhaseLabel(k, w), a, b) for k, w, a, b in out]
    return PhaseTimeline(phases, cfg.horizon, events)
