"""Models of an amplifier-less, DLDO-style potentiostat control loop.

Comparator -> up/down counter -> current DAC -> RC working electrode:
linearized z-domain stability analysis, recommended sampling windows,
describing-function limit-cycle prediction and a cycle-accurate nonlinear
simulator to check the predictions against.
"""

from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.1.0"

from .compare_harness import (ComparisonRow, ComparisonSummary, default_r_sweep, gm_r_sweep,
                              run_comparison, unsaturated_r_range)
from .describing_function import (LimitCyclePrediction, UnstableRegimeError,
                                  comparator_describing_gain, predict_limit_cycle)
from .electrode_model import ElectrodeLoad, load_pole, step_update, tau, zoh_load_tf
from .linear_analysis import (FrequencyResponsePoint, LoopConfig, NoCrossoverError, StabilityReport,
                              freq_response, loop_gain_split, open_loop_tf, phase_margin,
                              stability_check)
from .op_conditions import (OperatingWindow, TableEntry, TargetUnreachableError, format_table,
                            fs_range_for_pm, pm_at, reference_table, table_report)
from .root_locus import (LocusSweep, RootPair, boundary_root, breakaway_gain, closed_loop_roots,
                         locus_sweep, stability_limit)
from .time_sim import (InsufficientPeriodsError, LimitCycleMeasurement, SimConfig, SimTrace,
                       StepMetrics, extract_limit_cycle, simulate, step_metrics)
from .transfer import DiscreteRationalTF

__all__ = [
    "ComparisonRow", "ComparisonSummary", "DiscreteRationalTF", "ElectrodeLoad",
    "FrequencyResponsePoint", "InsufficientPeriodsError", "LimitCycleMeasurement",
    "LimitCyclePrediction", "LocusSweep", "LoopConfig", "NoCrossoverError", "OperatingWindow",
    "RootPair", "SimConfig", "SimTrace", "StabilityReport", "StepMetrics", "TableEntry",
    "TargetUnreachableError", "UnstableRegimeError", "boundary_root", "breakaway_gain",
    "closed_loop_roots", "comparator_describing_gain", "default_r_sweep", "extract_limit_cycle",
    "format_table", "freq_response", "fs_range_for_pm", "gm_r_sweep", "load_pole",
    "locus_sweep", "loop_gain_split", "open_loop_tf", "phase_margin", "pm_at",
    "predict_limit_cycle", "reference_table", "run_comparison", "simulate", "stability_check",
    "stability_limit", "step_metrics", "step_update", "table_report", "tau",
    "unsaturated_r_range", "zoh_load_tf",
]
