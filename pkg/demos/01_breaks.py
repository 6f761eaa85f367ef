"""
Finding mean shifts in a daily series
=====================================

A 189-day series with three planted level changes, segmented by dynamic
programming, with the break count chosen by an information criterion and
bootstrap intervals around each break day.
"""

import numpy as np

from epiphase import BreakConfig, DailySeries, bootstrap_ci, select_breaks, simple_moving_average

rng = np.random.default_rng(7)

# Three level changes: segments end on days 40, 95 and 150.
levels = np.repeat([2.0, 9.0, 4.0, 11.0], [40, 55, 55, 39])
raw = DailySeries.from_values(levels + rng.normal(0.0, 1.5, levels.size), label="cases")

# The criterion is evaluated for every break count up to max_breaks.
cfg = BreakConfig(max_breaks=6, min_segment=7, bootstrap_reps=300, seed=1)
result = select_breaks(raw, cfg)
print("criterion by break count (raw series):")
for m, value in result.criterion_trace:
    mark = "  <- selected" if m == result.m_selected else ""
    print(f"  m={m}  {value:10.2f}{mark}")
print("break days:", result.breaks)
print("segment means:", [round(v, 2) for v in result.segment_means])

# Residual bootstrap: resample inside segments and re-segment each replicate.
with_ci = bootstrap_ci(raw, result, cfg)
for day, (lo, hi) in zip(with_ci.breaks, with_ci.intervals):
    print(f"  day {day}: 95% interval {lo}-{hi}")

# A 7-day trailing mean turns each step into a 7-day ramp. A ramp is long
# enough to count as a segment of its own when min_segment is 7, so a large
# step can come back as two breaks framing the ramp.
sma = simple_moving_average(raw, 7)
smoothed = select_breaks(sma, cfg)
print("\nsmoothed series covers days", sma.days[0], "to", sma.days[-1])
print("break days on the smoothed series:", smoothed.breaks)

# A longer minimum segment absorbs the ramps.
wider = select_breaks(sma, BreakConfig(max_breaks=6, min_segment=14))
print("same, with min_segment 14:", wider.breaks)
