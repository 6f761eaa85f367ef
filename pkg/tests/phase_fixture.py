"""Count and momentum shapes for the reference phase listing.

Counts: flat trigger, rise to 50, plateau to 82, fall to 106, rise to 128,
plateau to 156, a dip to 169 and a flat tail. Momentum is negative while
cases spread out and positive around the peaks, and stays positive after
156 so the dip is not confirmed as a de-escalation.
"""

import numpy as np

from epiphase.series import DailySeries

HORIZON = 189
COUNT_BREAKS = (50, 82, 128, 156)
GEO_TRANSITIONS = (29, 82, 106, 169)
EXPECTED = [
    ("trigger", 1, 29),
    ("escalation-1", 30, 50),
    ("peak-1", 51, 82),
    ("de-escalation-1", 83, 106),
    ("escalation-2", 107, 128),
    ("peak-2", 129, 189),
]

# (last day, level at that day); linear between knots
_COUNT_KNOTS = ((29, 2.0), (50, 40.0), (82, 40.0), (106, 10.0), (128, 45.0),
                (156, 45.0), (169, 35.0), (189, 35.0))
_MOMENTUM_SIGNS = ((29, -1.0), (82, 1.0), (106, -1.0), (169, 1.0), (189, -1.0))


def series(noise_seed=None):
    days = np.arange(1, HORIZON + 1)
    kx = [1] + [d for d, _ in _COUNT_KNOTS]
    ky = [2.0] + [v for _, v in _COUNT_KNOTS]
    counts = np.interp(days, kx, ky)
    sign = np.array([next(s for end, s in _MOMENTUM_SIGNS if d <= end) for d in days])
    momentum = sign * 0.8
    if noise_seed is not None:
        rng = np.random.default_rng(noise_seed)
        counts = counts + rng.normal(0.0, 0.3, HORIZON)
        momentum = momentum + rng.normal(0.0, 0.1, HORIZON)
    return DailySeries(days, counts), DailySeries(days, momentum)
