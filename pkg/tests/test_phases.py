import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epiphase.errors import InvalidArgumentError
from epiphase.phases import (
    DEESCALATION,
    ESCALATION,
    PEAK,
    TRIGGER,
    Phase,
    PhaseConfig,
    PhaseLabel,
    PhaseTimeline,
    build_timeline,
    fuse_transitions,
)
from epiphase.series import DailySeries

import phase_fixture as fx


def _summary(tl):
    return [(p.name, p.start_day, p.end_day) for p in tl.phases]


class TestFuse:
    def test_reference_sets(self):
        got = fuse_transitions(fx.COUNT_BREAKS, fx.GEO_TRANSITIONS, 4)
        assert got == [29, 50, 82, 106, 128, 156, 169]

    def test_disjoint_union(self):
        assert fuse_transitions([100], [10, 50], 4) == [10, 50, 100]

    def test_count_break_wins(self):
        assert fuse_transitions([80], [82], 4) == [80]

    def test_window_zero_keeps_neighbours(self):
        assert fuse_transitions([80], [81], 0) == [80, 81]

    def test_empty(self):
        assert fuse_transitions([], [], 4) == []

    def test_negative_window(self):
        with pytest.raises(InvalidArgumentError):
            fuse_transitions([1], [2], -1)


class TestReferenceFixture:
    @pytest.mark.parametrize("noise_seed", [None, 1, 2, 3])
    def test_six_phases(self, noise_seed):
        counts, momentum = fx.series(noise_seed)
        trans = fuse_transitions(fx.COUNT_BREAKS, fx.GEO_TRANSITIONS, 4)
        tl = build_timeline(trans, counts, momentum)
        assert _summary(tl) == fx.EXPECTED
        assert any(e.startswith("transition 156 dropped") for e in tl.events)
        assert tl.boundaries == [29, 50, 82, 106, 128]

    def test_deterministic(self):
        counts, momentum = fx.series(5)
        trans = fuse_transitions(fx.COUNT_BREAKS, fx.GEO_TRANSITIONS, 4)
        assert _summary(build_timeline(trans, counts, momentum)) == _summary(
            build_timeline(trans, counts, momentum))


def _flat(value, horizon=60):
    days = np.arange(1, horizon + 1)
    return DailySeries(days, np.full(horizon, float(value)))


class TestRules:
    def test_no_transitions(self):
        cfg = PhaseConfig(horizon=60)
        tl = build_timeline([], _flat(3.0), _flat(-1.0), cfg)
        assert _summary(tl) == [("trigger", 1, 60)]

    def test_monotone_rise(self):
        cfg = PhaseConfig(horizon=60)
        counts = DailySeries.from_values(np.arange(1.0, 61.0))
        tl = build_timeline([20], counts, _flat(-1.0), cfg)
        assert _summary(tl) == [("trigger", 1, 20), ("escalation-1", 21, 60)]

    def test_confirmed_deescalation(self):
        cfg = PhaseConfig(horizon=60)
        y = np.interp(np.arange(1, 61), [1, 15, 30, 45, 60], [1, 1, 30, 30, 5])
        tl = build_timeline([15, 30, 45], DailySeries.from_values(y), _flat(-1.0), cfg)
        assert _summary(tl) == [("trigger", 1, 15), ("escalation-1", 16, 30),
                                ("peak-1", 31, 45), ("de-escalation-1", 46, 60)]

    def test_fall_after_trigger_stays_trigger(self):
        cfg = PhaseConfig(horizon=60)
        y = np.interp(np.arange(1, 61), [1, 20, 60], [30, 30, 5])
        tl = build_timeline([20], DailySeries.from_values(y), _flat(-1.0), cfg)
        assert _summary(tl) == [("trigger", 1, 60)]

    def test_unconfirmed_deescalation_absorbed(self):
        cfg = PhaseConfig(horizon=60)
        y = np.interp(np.arange(1, 61), [1, 15, 30, 60], [1, 1, 30, 5])
        counts = DailySeries.from_values(y)
        tl = build_timeline([15, 30], counts, _flat(1.0), cfg)
        assert _summary(tl) == [("trigger", 1, 15), ("escalation-1", 16, 60)]
        assert "transition 30 dropped" in tl.events[0]

    def test_missing_momentum_accepts(self):
        cfg = PhaseConfig(horizon=60)
        y = np.interp(np.arange(1, 61), [1, 15, 30, 60], [1, 1, 30, 5])
        empty = DailySeries(np.arange(1, 61), np.full(60, np.nan))
        tl = build_timeline([15, 30], DailySeries.from_values(y), empty, cfg)
        assert tl.phases[-1].kind == DEESCALATION

    def test_second_wave(self):
        cfg = PhaseConfig(horizon=80)
        y = np.interp(np.arange(1, 81), [1, 10, 30, 50, 80], [1, 1, 20, 20, 60])
        tl = build_timeline([10, 30, 50], DailySeries.from_values(y), _flat(-1.0, 80), cfg)
        assert [p.name for p in tl.phases] == ["trigger", "escalation-1", "peak-1",
                                               "escalation-2"]

    def test_short_segment_dropped(self):
        cfg = PhaseConfig(horizon=60)
        counts = DailySeries.from_values(np.arange(1.0, 61.0))
        tl = build_timeline([20, 23], counts, _flat(-1.0), cfg)
        assert tl.boundaries == [20]
        assert "transition 23 dropped" in tl.events[0]

    def test_trailing_short_segment(self):
        cfg = PhaseConfig(horizon=60)
        tl = build_timeline([30, 57], _flat(1.0), _flat(-1.0), cfg)
        assert all(p.end_day - p.start_day + 1 >= 7 for p in tl.phases)


def _wave_count(tl):
    return 1 + sum(1 for a, b in zip(tl.phases[:-1], tl.phases[1:])
                   if b.kind == ESCALATION and a.kind in (PEAK, DEESCALATION))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(-20, 220), max_size=15), st.integers(0, 2**32 - 1),
       st.integers(1, 20))
def test_adversarial_inputs_stay_contiguous(transitions, seed, min_segment):
    rng = np.random.default_rng(seed)
    counts = DailySeries.from_values(np.cumsum(rng.normal(0, 3, fx.HORIZON)))
    momentum = DailySeries.from_values(rng.normal(0, 1, fx.HORIZON))
    cfg = PhaseConfig(min_segment=min_segment)
    tl = build_timeline(transitions, counts, momentum, cfg)
    assert tl.phases[0].start_day == 1 and tl.phases[-1].end_day == fx.HORIZON
    for a, b in zip(tl.phases[:-1], tl.phases[1:]):
        assert b.start_day == a.end_day + 1
    assert sum(p.kind == TRIGGER for p in tl.phases) == 1
    assert max(p.wave for p in tl.phases) == _wave_count(tl)
    for p in tl.phases:
        if p.kind == DEESCALATION:
            ahead = momentum.reindex(np.arange(p.start_day, p.start_day + 14)).values
            assert np.nanmean(ahead) <= 0


class TestTimeline:
    def test_records_round_trip(self):
        counts, momentum = fx.series()
        tl = build_timeline(fuse_transitions(fx.COUNT_BREAKS, fx.GEO_TRANSITIONS),
                            counts, momentum)
        recs = tl.to_records()
        assert recs[0]["start_date"] == "2020-01-20"
        back = PhaseTimeline.from_records(recs)
        assert _summary(back) == _summary(tl)

    def test_gap_rejected(self):
        with pytest.raises(InvalidArgumentError):
            PhaseTimeline([Phase(PhaseLabel(TRIGGER), 1, 10),
                           Phase(PhaseLabel(PEAK), 12, 20)], 20)

    def test_late_trigger_rejected(self):
        with pytest.raises(InvalidArgumentError):
            PhaseTimeline([Phase(PhaseLabel(TRIGGER), 1, 10),
                           Phase(PhaseLabel(TRIGGER), 11, 20)], 20)

    def test_label_validation(self):
        with pytest.raises(InvalidArgumentError):
            PhaseLabel("plateau")
        with pytest.raises(InvalidArgumentError):
            PhaseLabel(PEAK, 0)
        assert PhaseLabel(TRIGGER, 1).name == "trigger"
        assert PhaseLabel(PEAK, 2).name == "peak-2"
