"""
How new contact locations relate to earlier ones
================================================

Two distances compare consecutive days of contact locations. The grouped
distance averages over every cross pair. The directed Hausdorff distance
asks how far the most isolated new location is from any earlier one. Their
difference, the momentum, is positive when new cases land inside the area
already reached and negative when they open new ground.
"""

import numpy as np

from epiphase import ContactDay, directed_hausdorff, grouped_distance, momentum_series

rng = np.random.default_rng(3)
center = np.array([37.5665, 126.9780])

# Day 1: a tight cluster downtown.
day1 = center + rng.normal(0.0, 0.004, (6, 2))

# Day 2a: more cases in the same cluster.
day2_same = center + rng.normal(0.0, 0.004, (6, 2))

# Day 2b: the same cluster plus one location about 11 km north.
day2_far = np.vstack([day2_same, center + [0.1, 0.0]])

for label, new in (("same cluster", day2_same), ("one far location", day2_far)):
    dg = grouped_distance(day1, new)
    dh = directed_hausdorff(new, day1)
    print(f"{label:18s} d_g = {dg:6.3f} km   d_H = {dh:6.3f} km   momentum = {dg - dh:+.3f}")

# Over a run of days the momentum is smoothed and its sign marks regimes.
days = []
for d in range(1, 31):
    pts = center + rng.normal(0.0, 0.004, (6, 2))
    if d <= 15:
        # spreading phase: a new far location every day
        angle = rng.uniform(0, 2 * np.pi)
        pts = np.vstack([pts, center + 0.08 * np.array([np.cos(angle), np.sin(angle)])])
    days.append(ContactDay(d, pts))

series = momentum_series(days, window=5)
print("\nday  momentum  smoothed  regime")
for day, dg, dh, m, sm, regime in series.rows():
    if day % 3 == 0:
        print(f"{day:3d}  {m:+8.3f}  {sm:+8.3f}  {regime}")
