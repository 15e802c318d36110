"""Sweeps, simulated time tags, run persistence, and the CLI."""

from .config import (
    CoincidenceSettings,
    InferSettings,
    QkdSettings,
    RunConfig,
    TagSettings,
    load_config,
    parse_config,
)
from .figures import FIGURES, available_figures, reproduce_figure
from .manifest import RunRecorder, new_run_dir
from .sweeps import SweepAxis, SweepSpec, SweepResult, run_sweep
from .tables import render_table, sha256_file, write_table
from .timetags import (
    CoincidenceConfig,
    OutcomeCounts,
    TimeTagStream,
    count_coincidences,
    default_coincidence_config,
    read_tag_csv,
    simulate_pattern_counts,
    simulate_timetags,
    write_tag_csv,
)

__all__ = [
    "CoincidenceConfig",
    "CoincidenceSettings",
    "FIGURES",
    "InferSettings",
    "OutcomeCounts",
    "QkdSettings",
    "RunConfig",
    "RunRecorder",
    "SweepAxis",
    "SweepResult",
    "SweepSpec",
    "TagSettings",
    "TimeTagStream",
    "available_figures",
    "count_coincidences",
    "default_coincidence_config",
    "load_config",
    "new_run_dir",
    "parse_config",
    "read_tag_csv",
    "render_table",
    "reproduce_figure",
    "run_sweep",
    "sha256_file",
    "simulate_pattern_counts",
    "simulate_timetags",
    "write_tag_csv",
    "write_table",
]
