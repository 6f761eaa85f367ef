"""Batch orchestration: ingest, smooth, segment, fuse, fit, index, plot.

Every run writes into a scratch directory beside the output directory and
moves the artifacts into place only after all stages succeed, so a failed
run leaves no partial bundle behind.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import hashlib
import json
import logging
import math
import platform
import shutil
import tempfile
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, figures, tables
from .changepoint import BreakConfig, bootstrap_ci, locate_break_hour, select_breaks
from .errors import EpiphaseError, SensorRejectedError
from .geo import ContactDay, momentum_series, sign_transitions
from .phases import PhaseConfig, build_timeline, fuse_transitions
from .policy import FORMULA_VERSION, index_series, load_records
from .regression import phase_fit_table, stars
from .series import (
    HOUR_PRESETS,
    MISSING_RATE_CEILING,
    DailySeries,
    HourlySeries,
    SliceSpec,
    StudyCalendar,
    hourly_reduction,
    impute_missing,
    matched_totals,
    missing_rates,
    ratio_reduction,
    rejected_sensors,
    simple_moving_average,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_IO, EXIT_SCHEMA, EXIT_ANALYSIS = 0, 2, 3, 4
MODES = ("subway", "traffic")
HOUR_NOTE = ("break_hours pairs read the parenthesised hour in day(hour) break "
             "estimates as hour of day; this reading is an interpretation")

ARTIFACTS = {
    "cpd": ("cases_sma.csv", "breaks.json"),
    "geo": ("dispersion.csv",),
    "phases": ("phases.json", "phases.csv"),
    "fit": ("phase_fits.csv", "phase_fits.json", "seasonality_breaks.json"),
    "index": ("indices.csv",),
    "plots": ("fig1.svg", "fig2.svg", "fig3.svg", "fig4.svg", "figS1.svg"),
}
STAGES_FOR = {
    "cpd": ("cpd",),
    "geo": ("geo",),
    "phases": ("cpd", "geo", "phases"),
    "fit": ("cpd", "geo", "phases", "fit"),
    "index": ("index",),
    "run": ("cpd", "geo", "phases", "fit", "index", "plots"),
}


class ConfigError(EpiphaseError):
    """Unknown key or unparsable value in a pipeline config."""


class StageError(EpiphaseError):
    """A pipeline stage failed; ``cause`` keeps the original exception."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")


@dataclass
class PipelineConfig:
    cases: Path | None = None
    contacts: Path | None = None
    subway: Path | None = None
    traffic: Path | None = None
    survey: Path | None = None
    holidays: Path | None = None
    policy: Path | None = None
    out: Path = Path("output")
    seed: int = 0
    sma_window: int = 7
    smooth_order: str = "reduce-then-smooth"
    max_breaks: int = 8
    min_segment: int = 7
    criterion: str = "LWZ"
    bootstrap_reps: int = 1000
    ci_level: float = 0.95
    ssr_floor: float = 1e-12
    merge_window: int = 4
    lookahead: int = 14
    slope_t_threshold: float = 2.0
    geo_min_run: int = 7
    planar: bool = False
    commute_preset: str = "commute"
    missing_ceiling: float = MISSING_RATE_CEILING
    lag: int = 0
    regressor: str = "sma"
    source: str = field(default="", repr=False, compare=False)

    def __post_init__(self):
        if self.smooth_order not in ("reduce-then-smooth", "smooth-then-reduce"):
            raise ConfigError(f"smooth_order must be reduce-then-smooth or "
                              f"smooth-then-reduce, got {self.smooth_order!r}")
        if self.regressor not in ("sma", "raw"):
            raise ConfigError("regressor must be sma or raw")
        if self.commute_preset not in ("commute", "commute-table"):
            raise ConfigError("commute_preset must be commute or commute-table")
        if self.bootstrap_reps < 100:
            raise ConfigError("bootstrap_reps must be at least 100")
        try:
            self.break_config()
        except EpiphaseError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_text(cls, text: str, base_dir=".", overrides=None) -> "PipelineConfig":
        """Parse flat ``key = value`` lines; ``#`` starts a comment.

        Relative paths resolve against ``base_dir``; ``overrides`` (already
        split into key/value strings) win over the file.
        """
        values = {}
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {ln}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
        values.update(overrides or {})
        kwargs = {}
        types = {f.name: f.type for f in dataclasses.fields(cls) if f.name != "source"}
        for key, value in values.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _convert(key, value, types[key], Path(base_dir))
        echo = text if not overrides else text + "".join(
            f"# override\n{k} = {v}\n" for k, v in sorted(overrides.items()))
        return cls(**kwargs, source=echo)

    @classmethod
    def load(cls, path, overrides=None) -> "PipelineConfig":
        path = Path(path)
        return cls.from_text(path.read_text(encoding="utf-8"), path.parent, overrides)

    def break_config(self, seed_offset: int = 0) -> BreakConfig:
        return BreakConfig(self.max_breaks, self.min_segment, self.criterion,
                           self.bootstrap_reps, self.ci_level, self.seed + seed_offset,
                           self.ssr_floor)

    def phase_config(self, horizon: int) -> PhaseConfig:
        return PhaseConfig(horizon, self.min_segment, self.slope_t_threshold,
                           self.lookahead, self.merge_window)

    def resolved(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            if f.name == "source":
                continue
            v = getattr(self, f.name)
            out[f.name] = str(v) if isinstance(v, Path) else v
        return out


def _convert(key, value, typ, base: Path):
    typ = str(typ)
    try:
        if "Path" in typ:
            if value in ("", "none"):
                return None
            p = Path(value)
            return p if p.is_absolute() else base / p
        if typ == "bool":
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if typ == "int":
            return int(value)
        if typ == "float":
            return float(value)
        return value
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {value!r} as {typ}") from None


# ---------------------------------------------------------------- ingest


@dataclass
class Inputs:
    cal: StudyCalendar
    cases: DailySeries | None = None
    contacts: list = field(default_factory=list)
    duplicate_points: int = 0
    subway: HourlySeries | None = None
    traffic: HourlySeries | None = None
    survey: dict = field(default_factory=dict)
    findings: list = field(default_factory=list)


@dataclass
class ValidationReport:
    ok: bool
    datasets: dict
    missing_rates: dict
    rejected_sensors: dict
    duplicates: list
    findings: list

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def lines(self) -> list[str]:
        out = ["ok" if self.ok else "problems found"]
        for name, info in sorted(self.datasets.items()):
            out.append(f"{name}: {info['rows']} rows, {info['first']} .. {info['last']}")
        for sid, rate in sorted(self.missing_rates.items()):
            mark = " (rejected)" if sid in self.rejected_sensors else ""
            out.append(f"missing rate {sid}: {rate:.4%}{mark}")
        out += [f"duplicate: {d}" for d in self.duplicates]
        out += [f"note: {f}" for f in self.findings]
        return out


def _calendar(cfg: PipelineConfig) -> StudyCalendar:
    if cfg.holidays is None:
        return StudyCalendar()
    return StudyCalendar(holiday_map=tables.read_holidays(cfg.holidays))


def _hourly(path, kind, cal):
    rows = tables.read_hourly(path, kind)
    return HourlySeries.from_records(
        (cal.day_index(d), h, sid, math.nan if v is None else v) for d, h, sid, v in rows
    ), rows


def load_inputs(cfg: PipelineConfig) -> tuple[Inputs, ValidationReport]:
    """Read and check every configured input.

    ``OSError`` and ``SchemaError`` propagate; softer findings (dates
    outside the window, collapsed duplicate points, sensors above the
    missing-rate ceiling) land in the report.
    """
    cal = _calendar(cfg)
    data = Inputs(cal)
    datasets, duplicates, findings = {}, [], data.findings

    def span(name, dates, rows):
        datasets[name] = {"rows": rows,
                          "first": min(dates).isoformat() if dates else "",
                          "last": max(dates).isoformat() if dates else ""}

    if cfg.cases is not None:
        rows = tables.read_cases(cfg.cases)
        span("cases", [d for d, _ in rows], len(rows))
        inside = [(cal.day_index(d), c) for d, c in rows if cal.in_window(d)]
        if len(inside) < len(rows):
            findings.append(f"cases: {len(rows) - len(inside)} rows outside the study window ignored")
        if inside:
            data.cases = DailySeries([d for d, _ in inside], [c for _, c in inside], "cases")

    if cfg.contacts is not None:
        rows = tables.read_contacts(cfg.contacts)
        span("contacts", [r[0] for r in rows], len(rows))
        by_day = defaultdict(list)
        for d, _, lat, lon in rows:
            if cal.in_window(d):
                by_day[cal.day_index(d)].append((lat, lon))
        for day in sorted(by_day):
            cd = ContactDay(day, np.array(by_day[day]))
            if cd.duplicates:
                duplicates.append(f"contacts day {day}: {cd.duplicates} duplicate point(s) collapsed")
            data.duplicate_points += cd.duplicates
            data.contacts.append(cd)

    rates, rejected = {}, {}
    for kind in MODES:
        path = getattr(cfg, kind)
        if path is None:
            continue
        grid, rows = _hourly(path, kind, cal)
        span(kind, [r[0] for r in rows], len(rows))
        if kind == "traffic":
            rates = missing_rates(grid)
            rejected = rejected_sensors(grid, cfg.missing_ceiling)
            for sid in sorted(rejected, key=str):
                findings.append(f"traffic: sensor {sid} missing {rates[sid]:.2%} of cells, "
                                f"above the {cfg.missing_ceiling:.2%} ceiling; excluded")
        setattr(data, kind, grid)

    if cfg.survey is not None:
        data.survey = tables.read_survey(cfg.survey)
        dates = [d for series in data.survey.values() for d, _ in series]
        span("survey", dates, len(dates))

    report = ValidationReport(True, datasets, rates, rejected, duplicates, list(findings))
    return data, report


def validate_inputs(cfg: PipelineConfig) -> ValidationReport:
    return load_inputs(cfg)[1]


# ---------------------------------------------------------------- analysis


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def _require(value, what, stage):
    if value is None:
        raise StageError(stage, EpiphaseError(f"config does not name a {what} input"))
    return value


def _segment(series: DailySeries, cfg: PipelineConfig, seed_offset: int):
    """Break selection plus bootstrap intervals, with max_breaks capped to
    what the series length allows."""
    y = series.dropna()
    bc = cfg.break_config(seed_offset)
    cap = min(bc.max_breaks, bc.feasible_max_breaks(len(y)))
    if cap < bc.max_breaks:
        bc = dataclasses.replace(bc, max_breaks=cap)
    result = select_breaks(y, bc)
    result = bootstrap_ci(y, result, bc)
    if cap < cfg.max_breaks:
        result.notes.append(f"max_breaks capped at {cap} for {len(y)} points")
    return result


def _mode_reduction(grid, slice_spec, cfg, cal, mode):
    v20, v19 = matched_totals(grid, slice_spec, cal)
    label = f"{mode}:{slice_spec.name}"
    if cfg.smooth_order == "smooth-then-reduce":
        return ratio_reduction(simple_moving_average(v20, cfg.sma_window),
                               simple_moving_average(v19, cfg.sma_window), label)
    return simple_moving_average(ratio_reduction(v20, v19, label), cfg.sma_window)


def _slices(cfg):
    commute = HOUR_PRESETS[cfg.commute_preset]
    return (
        SliceSpec("all-week", HOUR_PRESETS["all"], "all-week/all-hours"),
        SliceSpec("all-week", HOUR_PRESETS["afternoon"], "all-week/afternoon"),
        SliceSpec("all-week", HOUR_PRESETS["nighttime"], "all-week/nighttime"),
        SliceSpec("weekday", HOUR_PRESETS["all"], "weekday/all-hours"),
        SliceSpec("weekday", commute, "weekday/commute"),
        SliceSpec("weekend", HOUR_PRESETS["all"], "weekend/all-hours"),
    )


class Run:
    """State shared across stages of one pipeline invocation."""

    def __init__(self, cfg: PipelineConfig, data: Inputs, report: ValidationReport,
                 workdir: Path):
        self.cfg, self.data, self.report, self.dir = cfg, data, report, workdir
        self.cal = data.cal
        self.horizon = self.cal.horizon
        self.done: set[str] = set()

    def _write_csv(self, name, header, rows):
        tables.write_csv(self.dir / name, header, rows)

    def _write_json(self, name, obj):
        tables.write_json(self.dir / name, obj)

    def cpd(self):
        with _Stage("cpd"):
            cases = _require(self.data.cases, "cases", "cpd")
            full = cases.reindex(np.arange(1, self.horizon + 1))
            self.cases = full
            self.cases_sma = simple_moving_average(full, self.cfg.sma_window)
            self.case_breaks = _segment(self.cases_sma, self.cfg, 0)
            sma = self.cases_sma.reindex(full.days)
            self._write_csv("cases_sma.csv", ("day", "date", "cases", "cases_sma"), (
                (int(d), self.cal.date_of(int(d)).isoformat(), c, v)
                for d, c, v in zip(full.days, full.values, sma.values)
            ))

    def geo(self):
        with _Stage("geo"):
            if not self.data.contacts:
                raise StageError("geo", EpiphaseError("no contact locations in the study window"))
            self.momentum = momentum_series(self.data.contacts, self.cfg.sma_window,
                                            self.cfg.planar)
            self.geo_transitions = sign_transitions(self.momentum.smoothed,
                                                    self.cfg.geo_min_run)
            self._write_csv(
                "dispersion.csv",
                ("day", "d_g_km", "d_h_km", "momentum_km", "momentum_sma_km", "regime"),
                self.momentum.rows(),
            )

    def phases(self):
        with _Stage("phases"):
            pc = self.cfg.phase_config(self.horizon)
            self.fused = fuse_transitions(self.case_breaks.breaks, self.geo_transitions,
                                          pc.merge_window)
            self.timeline = build_timeline(self.fused, self.cases_sma,
                                           self.momentum.smoothed, pc)
            records = self.timeline.to_records(self.cal)
            self._write_json("phases.json", records)
            keys = ("name", "kind", "wave", "start_day", "end_day", "start_date", "end_date")
            self._write_csv("phases.csv", keys, ([r[k] for k in keys] for r in records))
            self._write_json("breaks.json", {
                "cases_sma": self.case_breaks.to_dict(),
                "geo_transitions": self.geo_transitions,
                "fused_transitions": self.fused,
                "phase_events": self.timeline.events,
                "undefined_dispersion_days": self.momentum.undefined_days,
            })

    def _write_breaks_only(self):
        self._write_json("breaks.json", {"cases_sma": self.case_breaks.to_dict()})

    def mobility(self):
        grids = {}
        if self.data.subway is not None:
            grids["subway"] = self.data.subway
        if self.data.traffic is not None:
            grid = self.data.traffic
            bad = rejected_sensors(grid, self.cfg.missing_ceiling)
            if bad:
                log.info("dropping traffic sensors %s", sorted(bad, key=str))
                grid = grid.drop_ids(bad)
            try:
                grids["traffic"] = impute_missing(grid, self.cfg.missing_ceiling)
            except SensorRejectedError as exc:  # pragma: no cover - dropped above
                raise StageError("fit", exc) from exc
        if not grids:
            raise StageError("fit", EpiphaseError("config names neither subway nor traffic input"))
        self.grids = grids

    def fit(self):
        with _Stage("fit"):
            self.mobility()
            slices = _slices(self.cfg)
            self.reductions = {
                mode: _mode_reduction(grid, slices[0], self.cfg, self.cal, mode)
                for mode, grid in self.grids.items()
            }
            x = self.cases_sma if self.cfg.regressor == "sma" else self.cases
            self.fits = phase_fit_table(self.reductions, x, self.timeline, self.cfg.lag)
            self._write_fits()

            self.seasonal = []
            offset = 1
            for mode, grid in sorted(self.grids.items()):
                for sl in slices:
                    series = _mode_reduction(grid, sl, self.cfg, self.cal, mode)
                    result = _segment(series, self.cfg, offset)
                    offset += 1
                    hd, hh, hv = hourly_reduction(grid, sl, self.cal)
                    hours = [locate_break_hour(hd, hh, hv, b) for b in result.breaks]
                    self.seasonal.append({
                        "mode": mode,
                        "slice": sl.name,
                        "day_filter": sl.day_filter,
                        "hours": sorted(sl.hours),
                        "segmentation": result.to_dict(),
                        "break_hours": [list(p) if p else None for p in hours],
                        "series": series,
                    })
            self._write_json("seasonality_breaks.json", {
                "interpretation": HOUR_NOTE,
                "smooth_order": self.cfg.smooth_order,
                "results": [{k: v for k, v in r.items() if k != "series"}
                            for r in self.seasonal],
            })

    def _write_fits(self):
        header = ("phase", "mode", "start_day", "end_day", "n", "term", "estimate",
                  "std_error", "t", "p_value", "significance", "r2", "adj_r2", "f",
                  "significance_f", "exact_fit", "note")
        rows, full = [], []
        for row in self.fits.rows:
            f = row.fit
            lead = (row.phase, row.mode, row.start_day, row.end_day, row.n_usable)
            if f is None:
                for term in ("intercept", "cases"):
                    rows.append(lead + (term,) + (None,) * 10 + (row.note,))
                full.append({"phase": row.phase, "mode": row.mode, "fit": None,
                             "note": row.note, "n": row.n_usable})
                continue
            shared = (f.r2, f.adj_r2, f.f_stat, f.sig_f, f.exact_fit, row.note)
            rows.append(lead + ("intercept", f.beta0, f.se0, f.t0, f.p0, stars(f.p0)) + shared)
            rows.append(lead + ("cases", f.beta1, f.se1, f.t1, f.p1, stars(f.p1)) + shared)
            full.append({"phase": row.phase, "mode": row.mode, "fit": f.to_dict(),
                         "note": row.note, "n": row.n_usable,
                         "start_day": row.start_day, "end_day": row.end_day})
        self._write_csv("phase_fits.csv", header, rows)
        self._write_json("phase_fits.json", {"lag": self.cfg.lag,
                                             "regressor": self.cfg.regressor, "fits": full})

    def index(self):
        with _Stage("index"):
            records = load_records(self.cfg.policy)
            self.indices = index_series(records, self.horizon)
            self._write_csv(
                "indices.csv",
                ("day", "government_response_index", "mobility_restriction_index"),
                self.indices.rows(),
            )

    def plots(self):
        with _Stage("plots"):
            figures.write_all(self)


def _hash_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _manifest(run: Run, command: str, written: list[str]) -> dict:
    cfg = run.cfg
    canonical = json.dumps(cfg.resolved(), sort_keys=True)
    return {
        "command": command,
        "config_text": cfg.source,
        "config": cfg.resolved(),
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "versions": {
            "epiphase": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "policy_formula": FORMULA_VERSION,
        "ci_method": "bootstrap-percentile",
        "files": {name: _hash_file(run.dir / name) for name in sorted(written)},
        "findings": run.report.findings,
        "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
    }


def run_pipeline(cfg: PipelineConfig, command: str = "run") -> dict:
    """Run the stages behind ``command`` and return the manifest.

    Artifacts land in ``cfg.out`` only when every stage succeeds.
    """
    if command not in STAGES_FOR:
        raise ConfigError(f"unknown command {command!r}")
    stages = STAGES_FOR[command]
    with _Stage("ingest"):
        data, report = load_inputs(cfg)

    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    work = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        run = Run(cfg, data, report, work)
        for stage in stages:
            getattr(run, stage)()
        if command == "cpd":
            run._write_breaks_only()
        written = sorted(p.name for p in work.iterdir())
        manifest = _manifest(run, command, written)
        tables.write_json(work / "manifest.json", manifest)
        out.mkdir(parents=True, exist_ok=True)
        for p in sorted(work.iterdir()):
            p.replace(out / p.name)
    finally:
        shutil.rmtree(work, ignore_errors=True)
    return manifest
