"""Describing-function predictions versus the nonlinear simulator.

Sweeps the electrode resistance, predicts the limit cycle for each value
and measures it on a simulated trace. Relative errors use the simulated
value as the reference.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .describing_function import UnstableRegimeError, predict_limit_cycle
from .electrode_model import ElectrodeLoad, load_pole
from .linear_analysis import LoopConfig
from .root_locus import boundary_root, root_angle
from .time_sim import InsufficientPeriodsError, SimConfig, extract_limit_cycle, simulate

CSV_COLUMNS = ("r_we_ohm", "a_pred_V", "a_meas_V", "f_pred_Hz", "f_meas_Hz", "err_a", "err_f")

#: Setup of the limit-cycle verification: 10-bit DAC, 125 pA LSB, 1 kHz clock.
REFERENCE_CONFIG = LoopConfig(i_lsb=125e-12, fs=1e3, dac_bits=10, v_ref=0.6, v_dd=1.2)
REFERENCE_C_WE = 10e-9

# settled-transient allowance, in electrode time constants
_SETTLE_TAUS = 20.0
# headroom factor on the predicted counter swing when picking the default sweep
_SWING_MARGIN = 1.5


@dataclass(frozen=True)
class ComparisonRow:
    r_we: float
    predicted_a: float
    measured_a: float
    predicted_omega: float
    measured_omega: float
    err_a: float
    err_omega: float
    n_periods: int = 0
    status: str = "ok"
    duration: float = float("nan")

    @property
    def valid(self) -> bool:
        return self.status == "ok"

    @property
    def predicted_freq_hz(self) -> float:
        return self.predicted_omega / (2 * math.pi)

    @property
    def measured_freq_hz(self) -> float:
        return self.measured_omega / (2 * math.pi)


@dataclass(frozen=True)
class ComparisonSummary:
    rows: tuple[ComparisonRow, ...]
    max_err_a: float
    max_err_omega: float
    n_valid_rows: int

    def to_json(self) -> str:
        return json.dumps(summary_dict(self), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS + ("status",))
        for r in self.rows:
            w.writerow((repr(r.r_we), repr(r.predicted_a), repr(r.measured_a),
                        repr(r.predicted_freq_hz), repr(r.measured_freq_hz),
                        repr(r.err_a), repr(r.err_omega), r.status))
        return buf.getvalue()


def summary_dict(s: ComparisonSummary) -> dict:
    return {"max_err_a": s.max_err_a, "max_err_omega": s.max_err_omega,
            "n_valid_rows": s.n_valid_rows, "rows": [asdict(r) for r in s.rows]}


def predicted_code_swing(load: ElectrodeLoad, cfg: LoopConfig) -> float:
    """Counter-code amplitude implied by the predicted limit cycle.

    A +/-1 comparator square wave has fundamental ``4/pi``; the accumulator
    divides it by ``|exp(j theta) - 1|`` at the predicted frequency.
    """
    theta = root_angle(boundary_root(load_pole(load, cfg.fs)))
    return (4 / math.pi) / (2 * math.sin(theta / 2))


def equilibrium_code(load: ElectrodeLoad, cfg: LoopConfig) -> float:
    return cfg.v_ref / (cfg.i_lsb * load.r_we)


def unsaturated_r_range(cfg: LoopConfig, c_we: float, margin: float = _SWING_MARGIN) -> tuple[float, float]:
    """Resistance range whose predicted oscillation fits inside the counter range.

    Below the lower end the oscillating code would exceed full scale; above
    the upper end it would be clipped at zero. Outside this range the relay
    loop cannot develop the describing-function limit cycle.
    """
    full = cfg.full_scale_code

    def top(log_r):
        load = ElectrodeLoad(math.exp(log_r), c_we)
        return equilibrium_code(load, cfg) + margin * predicted_code_swing(load, cfg) - full

    def bottom(log_r):
        load = ElectrodeLoad(math.exp(log_r), c_we)
        return equilibrium_code(load, cfg) - margin * predicted_code_swing(load, cfg)

    a = math.log(cfg.v_ref / (cfg.i_lsb * full))
    b = math.log(1.0 / cfg.gm_lsb)
    r_lo = _first_sign_change(top, a, b)
    r_hi = _first_sign_change(bottom, a, b)
    if r_lo is None or r_hi is None or not r_lo < r_hi:
        raise ValueError("no resistance keeps the predicted oscillation inside the counter range")
    return r_lo, r_hi


def _first_sign_change(fn, a, b, n=512):
    grid = np.linspace(a, b, n)
    vals = [fn(x) for x in grid]
    for x0, x1, v0, v1 in zip(grid, grid[1:], vals, vals[1:]):
        if v0 > 0 >= v1:
            return math.exp(brentq(fn, x0, x1, xtol=1e-12))
    return None


def default_r_sweep(cfg: LoopConfig = REFERENCE_CONFIG, c_we: float = REFERENCE_C_WE,
                    n: int = 10) -> np.ndarray:
    """``n`` log-spaced resistances across :func:`unsaturated_r_range`."""
    lo, hi = unsaturated_r_range(cfg, c_we)
    return np.geomspace(lo, hi, n)


def gm_r_sweep(cfg: LoopConfig, gm_r_lo: float = 0.05, gm_r_hi: float = 0.8, n: int = 10) -> np.ndarray:
    """``n`` resistances with ``gm R_WE`` log-spaced over ``[gm_r_lo, gm_r_hi]``."""
    return np.geomspace(gm_r_lo, gm_r_hi, n) / cfg.gm_lsb


def required_duration(load: ElectrodeLoad, cfg: LoopConfig, omega_pred: float,
                      discard_fraction: float = 0.5, min_periods: int = 8) -> float:
    """Simulation length that settles and still leaves enough periods to measure."""
    ramp = max(equilibrium_code(load, cfg), 1.0) / cfg.fs
    settle = (ramp + _SETTLE_TAUS * load.tau) / discard_fraction
    periods = (min_periods + 4) * 2 * math.pi / omega_pred / (1 - discard_fraction)
    return max(settle, periods)


def compare_one(r_we: float, c_we: float, cfg: LoopConfig, sim_duration: Optional[float] = None,
                discard_fraction: float = 0.5, min_periods: int = 8) -> ComparisonRow:
    nan = float("nan")
    load = ElectrodeLoad(r_we, c_we)
    try:
        pred = predict_limit_cycle(load, cfg)
    except UnstableRegimeError:
        return ComparisonRow(r_we, nan, nan, nan, nan, nan, nan, status="unstable-regime")
    duration = max(sim_duration or 0.0,
                   required_duration(load, cfg, pred.omega, discard_fraction, min_periods))
    trace = simulate(SimConfig(load, cfg, duration))
    try:
        meas = extract_limit_cycle(trace, discard_fraction, min_periods)
    except InsufficientPeriodsError as exc:
        a = nan if exc.amplitude is None else exc.amplitude
        return ComparisonRow(r_we, pred.amplitude, a, pred.omega, nan, nan, nan,
                             n_periods=exc.n_periods, status="insufficient-periods", duration=duration)
    err_a = abs(pred.amplitude - meas.amplitude) / meas.amplitude if meas.amplitude > 0 else math.inf
    err_w = abs(pred.omega - meas.omega) / meas.omega
    return ComparisonRow(r_we, pred.amplitude, meas.amplitude, pred.omega, meas.omega,
                         err_a, err_w, meas.n_periods, "ok", duration)


def _compare_args(args):
    return compare_one(*args)


def run_comparison(r_values: Sequence[float], c_we: float = REFERENCE_C_WE,
                   cfg: LoopConfig = REFERENCE_CONFIG, sim_duration: Optional[float] = None,
                   discard_fraction: float = 0.5, min_periods: int = 8,
                   workers: int = 1) -> ComparisonSummary:
    """Compare predicted and simulated limit cycles over ``r_values``.

    ``sim_duration`` is a lower bound; each run is lengthened as needed to
    settle and to cover ``min_periods`` periods after the discarded part.
    Rows are sorted by resistance; rows that cannot be measured carry a
    non-``"ok"`` status and are excluded from the maxima.
    """
    r_sorted = sorted(float(r) for r in r_values)
    if not r_sorted:
        raise ValueError("r_values must not be empty")
    jobs = [(r, c_we, cfg, sim_duration, discard_fraction, min_periods) for r in r_sorted]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_compare_args, jobs))
    else:
        rows = [_compare_args(j) for j in jobs]
    valid = [r for r in rows if r.valid]
    max_a = max((r.err_a for r in valid), default=float("nan"))
    max_w = max((r.err_omega for r in valid), default=float("nan"))
    return ComparisonSummary(tuple(rows), max_a, max_w, len(valid))
