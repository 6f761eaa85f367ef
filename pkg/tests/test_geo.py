import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epiphase.errors import InsufficientDataError, InvalidArgumentError, UndefinedDayError
from epiphase.geo import (
    PEAK,
    SPREAD,
    ContactDay,
    GeoPoint,
    directed_hausdorff,
    grouped_distance,
    haversine_km,
    momentum_series,
    sign_transitions,
)
from epiphase.series import DailySeries

from oracles import brute_grouped, brute_hausdorff, haversine, planar

SEOUL_BOX = ([37.43, 126.76], [37.70, 127.18])


def _random_sets(rng, size=8):
    P = rng.uniform(*SEOUL_BOX, (int(rng.integers(1, size + 1)), 2))
    Q = rng.uniform(*SEOUL_BOX, (int(rng.integers(1, size + 1)), 2))
    return P, Q


class TestHaversine:
    def test_identity(self):
        assert haversine_km((37.5, 127.0), (37.5, 127.0)) == 0.0

    def test_one_degree_latitude(self):
        # arc length R * pi / 180
        assert haversine_km((10.0, 30.0), (11.0, 30.0)) == pytest.approx(111.1949, abs=1e-3)

    def test_geopoint_input(self):
        a, b = GeoPoint(37.0, 127.0), GeoPoint(38.0, 127.0)
        assert haversine_km(a, b) == pytest.approx(111.1949, abs=1e-3)

    def test_symmetric(self, rng):
        for _ in range(100):
            a, b = rng.uniform([-80, -170], [80, 170], (2, 2))
            assert haversine_km(a, b) == haversine_km(b, a)

    def test_planar(self):
        assert haversine_km((0.0, 0.0), (3.0, 4.0), planar=True) == 5.0

    def test_bounds(self):
        with pytest.raises(InvalidArgumentError):
            GeoPoint(91.0, 0.0)
        with pytest.raises(InvalidArgumentError):
            GeoPoint(0.0, math.nan)


class TestGroupedDistance:
    def test_single_pair(self):
        assert grouped_distance([(0.0, 0.0)], [(0.0, 1.0)], planar=True) == 1.0

    def test_identical_points(self):
        assert grouped_distance([(37.5, 127.0)], [(37.5, 127.0)]) == 0.0

    def test_hand_average(self):
        # d(a, b) = 2 and d(a, c) = 4
        assert grouped_distance([(0, 0)], [(0, 2), (4, 0)], planar=True) == 3.0

    def test_empty(self):
        with pytest.raises(UndefinedDayError):
            grouped_distance(np.empty((0, 2)), [(0, 0)])

    def test_symmetric(self, rng):
        for _ in range(100):
            P, Q = _random_sets(rng)
            assert grouped_distance(P, Q) == grouped_distance(Q, P)


class TestDirectedHausdorff:
    def test_subset_is_zero(self):
        old = [(0, 0), (1, 1), (2, 5)]
        assert directed_hausdorff([(1, 1)], old, planar=True) == 0.0

    def test_single_pair(self):
        assert directed_hausdorff([(0, 1)], [(0, 0)], planar=True) == 1.0

    def test_max_of_min(self):
        assert directed_hausdorff([(1, 0), (5, 0)], [(0, 0)], planar=True) == 5.0

    def test_asymmetric(self):
        new, old = [(0, 0), (10, 0)], [(0, 0)]
        assert directed_hausdorff(new, old, planar=True) == 10.0
        assert directed_hausdorff(old, new, planar=True) == 0.0

    def test_empty(self):
        with pytest.raises(UndefinedDayError):
            directed_hausdorff([(0, 0)], np.empty((0, 2)))


class TestOracle:
    def test_planar_exact(self, rng):
        for _ in range(200):
            P, Q = _random_sets(rng)
            assert grouped_distance(P, Q, True) == brute_grouped(P.tolist(), Q.tolist(), planar)
            assert (directed_hausdorff(Q, P, True)
                    == brute_hausdorff(Q.tolist(), P.tolist(), planar))

    def test_haversine(self, rng):
        for _ in range(200):
            P, Q = _random_sets(rng)
            assert grouped_distance(P, Q) == pytest.approx(
                brute_grouped(P.tolist(), Q.tolist(), haversine), rel=1e-12)
            assert directed_hausdorff(Q, P) == pytest.approx(
                brute_hausdorff(Q.tolist(), P.tolist(), haversine), rel=1e-12)

    def test_bounded_by_extreme_pairs(self, rng):
        for _ in range(200):
            P, Q = _random_sets(rng)
            cross = [haversine(p, q) for p in P.tolist() for q in Q.tolist()]
            allpts = np.vstack([P, Q])
            lo, hi = allpts.min(axis=0), allpts.max(axis=0)
            diag = haversine(lo.tolist(), hi.tolist())
            for value in (grouped_distance(P, Q), directed_hausdorff(Q, P)):
                assert 0.0 <= value <= max(cross) * (1 + 1e-12)
                assert value <= diag * (1 + 1e-9) + 1e-9

    def test_radius_implication(self, rng):
        seen = 0
        for _ in range(300):
            P, Q = _random_sets(rng)
            dg, dh = grouped_distance(P, Q), directed_hausdorff(Q, P)
            if dh > dg:
                seen += 1
                assert any(all(haversine(q, p) > dg for p in P.tolist()) for q in Q.tolist())
        assert seen > 0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
    def test_planar_translation(self, seed, dy, dx):
        P, Q = _random_sets(np.random.default_rng(seed))
        shift = np.array([dy, dx])
        assert grouped_distance(P + shift, Q + shift, True) == pytest.approx(
            grouped_distance(P, Q, True), abs=1e-9)
        assert directed_hausdorff(Q + shift, P + shift, True) == pytest.approx(
            directed_hausdorff(Q, P, True), abs=1e-9)


class TestContactDay:
    def test_duplicates_collapsed(self):
        cd = ContactDay(3, np.array([(37.5, 127.0), (37.5, 127.0), (37.6, 127.0)]))
        assert len(cd) == 2 and cd.duplicates == 1

    def test_geopoints(self):
        cd = ContactDay(1, [GeoPoint(37.5, 127.0)])
        assert cd.points.shape == (1, 2)


class TestMomentumSeries:
    def test_single_shared_point(self):
        days = [ContactDay(d, np.array([(37.5, 127.0)])) for d in range(1, 11)]
        ms = momentum_series(days, window=7)
        assert all(p.momentum == 0.0 for p in ms.points)
        np.testing.assert_array_equal(ms.smoothed.values, 0.0)

    def test_three_day_hand_fixture(self):
        # planar km grid
        days = [
            ContactDay(1, np.array([(0.0, 0.0)])),
            ContactDay(2, np.array([(0.0, 2.0), (4.0, 0.0)])),
            ContactDay(3, np.array([(0.0, 2.0)])),
        ]
        ms = momentum_series(days, window=1, planar=True)
        p1, p2 = ms.points
        assert (p1.day, p1.d_g, p1.d_h, p1.momentum) == (1, 3.0, 4.0, -1.0)
        # day 2 -> 3: distances 0 and sqrt(20); new point (0, 2) already present
        assert p2.d_g == pytest.approx((0.0 + math.sqrt(20.0)) / 2)
        assert p2.d_h == 0.0
        assert p2.momentum == p2.d_g - p2.d_h

    def test_empty_day_gives_missing(self):
        days = [ContactDay(1, [(0.0, 0.0)]), ContactDay(2, np.empty((0, 2))),
                ContactDay(3, [(0.0, 1.0)]), ContactDay(4, [(0.0, 2.0)])]
        ms = momentum_series(days, window=1, planar=True)
        assert ms.undefined_days == [1, 2]
        assert math.isnan(ms.points[0].momentum) and ms.points[2].momentum == 0.0

    def test_insufficient(self):
        with pytest.raises(InsufficientDataError):
            momentum_series([ContactDay(1, [(0.0, 0.0)])])

    def test_rows_regime(self):
        days = [ContactDay(d, [(0.0, 0.0), (0.0, 3.0)]) for d in range(1, 5)]
        rows = list(momentum_series(days, window=1, planar=True).rows())
        assert all(r[5] == PEAK for r in rows)


class TestSignTransitions:
    def test_no_change(self):
        assert sign_transitions(DailySeries.from_values([1.0, 2.0, 0.5]), 3) == []

    def test_single_switch(self):
        s = DailySeries.from_values([-1, -1, -1, 1, 1, 1])
        assert sign_transitions(s, 3) == [4]

    def test_blip_suppressed(self):
        s = DailySeries.from_values([-1, 1, -1, -1])
        assert sign_transitions(s, 2) == []

    def test_zero_is_spread(self):
        s = DailySeries.from_values([1, 1, 0, 0])
        assert sign_transitions(s, 2) == [3]

    def test_leading_missing_skipped(self):
        s = DailySeries.from_values([np.nan, np.nan, 1, 1, -1, -1])
        assert sign_transitions(s, 2) == [5]

    def test_regime_labels(self):
        assert PEAK != SPREAD
