"""
End to end on the seeded fixture
================================

Writes the synthetic 189-day dataset, runs every stage and walks through
the main outputs: the phase timeline, one regression table and the policy
indices. The same run is available from the shell as ``epiphase run``.
"""

import tempfile
from pathlib import Path

from epiphase.pipeline import PipelineConfig, run_pipeline
from epiphase.synthetic import make_dataset
from epiphase.tables import read_json, read_table

work = Path(tempfile.mkdtemp(prefix="epiphase-demo-"))
truth = make_dataset(work, seed=0)
print("inputs written to", work)
print("planted case breaks:", truth.case_breaks)

cfg = PipelineConfig.load(work / "pipeline.cfg")
manifest = run_pipeline(cfg)
out = Path(cfg.out)
print("artifacts:", ", ".join(sorted(manifest["files"])))

# The case breaks and dispersion transitions are fused into one list.
breaks = read_json(out / "breaks.json")
print("\ncase breaks found:", breaks["cases_sma"]["breaks"])
print("geo transitions:  ", breaks["geo_transitions"])
print("fused:            ", breaks["fused_transitions"])
for event in breaks["phase_events"]:
    print("  ", event)

print("\nphase            days")
for p in read_json(out / "phases.json"):
    print(f"{p['name']:16s} {p['start_day']:3d}-{p['end_day']}")

# Slope of subway reduction on smoothed cases, per phase.
print("\nsubway reduction ~ cases")
for row in read_table(out / "phase_fits.csv"):
    if row["mode"] == "subway" and row["term"] == "cases":
        stars = row["significance"] if isinstance(row["significance"], str) else ""
        print(f"  {row['phase']:16s} slope {row['estimate']:+.4f} {stars:3s}  r2 {row['r2']:.3f}")

idx = read_table(out / "indices.csv")
peak = max(idx, key=lambda r: r["government_response_index"])
print(f"\nstrictest day {int(peak['day'])}: government response "
      f"{peak['government_response_index']:.1f}, mobility restriction "
      f"{peak['mobility_restriction_index']:.1f}")
print("figures:", ", ".join(sorted(p.name for p in out.glob("*.svg"))))
