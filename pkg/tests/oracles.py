"""Naive reference implementations used as test oracles.

Each one follows the textbook definition with plain loops so it shares no
code path with the package.
"""

import itertools
import math


def seg_ssr(values):
    mean = math.fsum(values) / len(values)
    return math.fsum((v - mean) ** 2 for v in values)


def brute_partition(y, m, min_segment):
    """Enumerate every valid ``m``-break split; first minimum wins, so ties
    go to the lexicographically earliest break tuple."""
    n = len(y)
    best, best_breaks = math.inf, None
    for ends in itertools.combinations(range(1, n), m):
        bounds = (0,) + ends + (n,)
        if any(b - a < min_segment for a, b in zip(bounds[:-1], bounds[1:])):
            continue
        total = math.fsum(seg_ssr(y[a:b]) for a, b in zip(bounds[:-1], bounds[1:]))
        if total < best:
            best, best_breaks = total, list(ends)
    # report breaks as 1-based day of each segment's last point
    return best_breaks, best


# Squares are written as products: ``x ** 2`` goes through libm pow,
# which is not guaranteed to round exactly like ``x * x``.


def planar(a, b):
    dy, dx = b[0] - a[0], b[1] - a[1]
    return math.sqrt(dy * dy + dx * dx)


def haversine(a, b, radius=6371.0088):
    p1, p2 = math.radians(a[0]), math.radians(b[0])
    s1 = math.sin((p2 - p1) / 2)
    s2 = math.sin(math.radians(b[1] - a[1]) / 2)
    h = s1 * s1 + math.cos(p1) * math.cos(p2) * (s2 * s2)
    return 2 * radius * math.asin(math.sqrt(min(1.0, h)))


def brute_grouped(P, Q, dist):
    terms = []
    for p in P:
        for q in Q:
            terms.append(dist(p, q))
    return math.fsum(terms) / (len(P) * len(Q))


def brute_hausdorff(new, old, dist):
    worst = 0.0
    for p in new:
        nearest = math.inf
        for q in old:
            d = dist(p, q)
            if d < nearest:
                nearest = d
        if nearest > worst:
            worst = nearest
    return worst
