"""Epidemic phases from case counts, contact locations and mobility volumes.

The package detects mean shifts in daily series, measures how new contact
locations sit relative to earlier ones, fuses both signals into labeled
epidemic phases, fits per-phase mobility models and scores policy
stringency. ``epiphase.pipeline`` ties the stages into a batch run.
"""

__version__ = "0.1.0"

from .changepoint import (  # noqa: E402
    BreakConfig,
    SegmentationResult,
    bootstrap_ci,
    optimal_partition,
    select_breaks,
)
from .errors import EpiphaseError  # noqa: E402
from .geo import (  # noqa: E402
    ContactDay,
    GeoPoint,
    directed_hausdorff,
    grouped_distance,
    haversine_km,
    momentum_series,
    sign_transitions,
)
from .phases import PhaseConfig, PhaseTimeline, build_timeline, fuse_transitions  # noqa: E402
from .policy import composite_index, index_series, load_records  # noqa: E402
from .regression import OlsFit, ols_fit, phase_fit_table  # noqa: E402
from .series import (  # noqa: E402
    DailySeries,
    HourlySeries,
    SliceSpec,
    StudyCalendar,
    match_day,
    reduction,
    simple_moving_average,
)

__all__ = [
    "BreakConfig", "ContactDay", "DailySeries", "EpiphaseError", "GeoPoint",
    "HourlySeries", "OlsFit", "PhaseConfig", "PhaseTimeline", "SegmentationResult",
    "SliceSpec", "StudyCalendar", "bootstrap_ci", "build_timeline", "composite_index",
    "directed_hausdorff", "fuse_transitions", "grouped_distance", "haversine_km",
    "index_series", "load_records", "match_day", "momentum_series", "ols_fit",
    "optimal_partition", "phase_fit_table", "reduction", "select_breaks",
    "sign_transitions", "simple_moving_average",
]
