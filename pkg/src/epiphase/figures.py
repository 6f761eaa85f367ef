"""The five report figures, drawn from a finished pipeline run."""

from __future__ import annotations

import math

import numpy as np

from .svg import PALETTE, PHASE_COLORS, Figure, limits

MARKERS = ("circle", "square", "triangle")


def _phase_bands(panel, timeline, labels=False):
    for p in timeline.phases:
        panel.band(p.start_day - 0.5, p.end_day + 0.5, PHASE_COLORS[p.kind], 0.45,
                   label=p.name if labels else "")


def fig1(run) -> Figure:
    """Counts with breaks, momentum with regimes, and the phase timeline."""
    fig = Figure(900, 700, "Epidemic phases")
    days = run.cases.days
    xlim = (0.5, run.horizon + 0.5)

    p = fig.panel(70, 50, 700, 170, xlim,
                  limits(run.cases.values, run.cases_sma.values, include_zero=True),
                  title="Daily confirmed cases", ylabel="cases")
    p.points(days, run.cases.values, "#9ecae1", r=1.6)
    p.line(run.cases_sma.days, run.cases_sma.values, PALETTE[0], 2.0)
    for b in run.case_breaks.breaks:
        p.vline(b, PALETTE[1])

    sm = run.momentum.smoothed
    p = fig.panel(70, 270, 700, 170, xlim,
                  limits(run.momentum.raw.values, include_zero=True),
                  title="Grouped minus Hausdorff distance", ylabel="km")
    pos = sm.values > 0
    for d, flag in zip(sm.days, pos):
        if flag:
            p.band(d - 0.5, d + 0.5, PHASE_COLORS["peak"], 0.6)
    p.hline(0.0)
    p.line(run.momentum.raw.days, run.momentum.raw.values, "#bbbbbb", 1.0)
    p.line(sm.days, sm.values, PALETTE[2], 2.0)
    for t in run.geo_transitions:
        p.vline(t, PALETTE[4])

    p = fig.panel(70, 490, 700, 120, xlim, (0.0, 1.0), title="Phases", xlabel="day")
    _phase_bands(p, run.timeline, labels=True)
    for b in run.timeline.boundaries:
        p.vline(b + 0.5, "#333333", "2,2")

    fig.add_legend("case SMA", PALETTE[0])
    fig.add_legend("case breaks", PALETTE[1])
    fig.add_legend("momentum SMA", PALETTE[2])
    fig.add_legend("geo transitions", PALETTE[4])
    fig.add_legend("geospatial peak", PHASE_COLORS["peak"])
    return fig


def fig2(run) -> Figure:
    """Reduction against smoothed cases, one panel per phase."""
    phases = run.timeline.phases
    cols = 3
    rows = max(1, math.ceil(len(phases) / cols))
    fig = Figure(960, 40 + 260 * rows, "Mobility reduction vs confirmed cases by phase")
    modes = sorted(run.reductions)
    for k, phase in enumerate(phases):
        days = np.arange(phase.start_day, phase.end_day + 1)
        x = run.cases_sma.reindex(days).values
        ys = {m: run.reductions[m].reindex(days).values for m in modes}
        panel = fig.panel(70 + 300 * (k % cols), 60 + 260 * (k // cols), 230, 170,
                          limits(x), limits(*ys.values()), title=phase.name,
                          xlabel="cases (SMA)", ylabel="reduction")
        for j, mode in enumerate(modes):
            color = PALETTE[j % len(PALETTE)]
            panel.points(x, ys[mode], color, r=2.0, shape=MARKERS[j % len(MARKERS)])
            row = run.fits.get(phase.name, mode)
            ok = ~np.isnan(x)
            if row.fit is not None and ok.any():
                xs = np.array([np.nanmin(x), np.nanmax(x)])
                panel.line(xs, row.fit.beta0 + row.fit.beta1 * xs, color, 1.5)
    for j, mode in enumerate(modes):
        fig.add_legend(mode, PALETTE[j % len(PALETTE)])
    return fig


def fig3(run) -> Figure:
    """Sliced reduction series with their detected interventions."""
    results = run.seasonal
    modes = sorted({r["mode"] for r in results})
    slices = [r["slice"] for r in results if r["mode"] == modes[0]]
    fig = Figure(60 + 300 * 3, 40 + 220 * 2 * len(modes), "Reduction by time slice")
    xlim = (0.5, run.horizon + 0.5)
    for r in results:
        i, j = modes.index(r["mode"]), slices.index(r["slice"])
        row, col = 2 * i + j // 3, j % 3
        s = r["series"]
        p = fig.panel(70 + 300 * col, 60 + 220 * row, 240, 150, xlim, limits(s.values),
                      title=f"{r['mode']} {r['slice']}", ylabel="reduction")
        p.line(s.days, s.values, PALETTE[modes.index(r["mode"]) % len(PALETTE)], 1.5)
        for b in r["segmentation"]["breaks"]:
            p.vline(b, PALETTE[1])
    return fig


def fig4(run) -> Figure:
    """Survey series as given, next to the subway reduction."""
    fig = Figure(900, 320, "Survey responses and subway reduction")
    xlim = (0.5, run.horizon + 0.5)
    survey = run.data.survey
    pts = {m: ([run.cal.day_index(d) for d, _ in v], [x for _, x in v])
           for m, v in survey.items()}
    p = fig.panel(70, 50, 330, 200, xlim,
                  limits(*(v for _, v in pts.values()), include_zero=True),
                  title="Survey (as given)", xlabel="day", ylabel="share")
    for k, (metric, (xs, ys)) in enumerate(sorted(pts.items())):
        color = PALETTE[(k + 2) % len(PALETTE)]
        p.points(xs, ys, color, r=3.0, shape=MARKERS[k % len(MARKERS)])
        fig.add_legend(metric, color)
    mode = "subway" if "subway" in run.reductions else sorted(run.reductions)[0]
    red = run.reductions[mode]
    q = fig.panel(480, 50, 330, 200, xlim, limits(red.values, include_zero=True),
                  title=f"{mode} reduction", xlabel="day", ylabel="reduction")
    _phase_bands(q, run.timeline)
    q.line(red.days, red.values, PALETTE[0], 1.8)
    fig.add_legend(f"{mode} reduction", PALETTE[0])
    return fig


def figS1(run) -> Figure:
    """Government response and mobility restriction indices."""
    idx = run.indices
    fig = Figure(900, 320, "Policy indices")
    p = fig.panel(70, 50, 700, 200, (0.5, run.horizon + 0.5), (0.0, 100.0),
                  title="OxCGRT-style indices", xlabel="day", ylabel="index")
    p.line(idx.days, idx.government_response, PALETTE[0], 2.0)
    p.line(idx.days, idx.mobility_restriction, PALETTE[1], 2.0)
    fig.add_legend("government response", PALETTE[0])
    fig.add_legend("mobility restriction", PALETTE[1])
    return fig


def write_all(run) -> None:
    for name, build in (("fig1", fig1), ("fig2", fig2), ("fig3", fig3),
                        ("fig4", fig4), ("figS1", figS1)):
        build(run).save(run.dir / f"{name}.svg")
