"""Cycle-accurate nonlinear simulation of the comparator/counter/DAC/RC loop.

Per clock period ``n`` (``t = n Ts``):

1. the DAC drives ``code[n] * I_LSB`` into the electrode for the whole
   period (ZOH) and the voltage is advanced with the exact RC solution;
2. the comparator samples ``V_RE(t)`` and decides ``s = +1`` if
   ``V_RE < V_REF`` else ``-1`` (ties count down);
3. the counter register loads ``clamp(code[n] + s, 0, 2**bits - 1)``,
   which the DAC applies from the next period on.

The register between comparator decision and DAC is the one-sample
latency of the ``1/(z-1)`` accumulator in the open-loop model; with it the
linear-mode run reproduces ``G_OL / (1 + G_OL)`` exactly.

``linear=True`` replaces the comparator by a unity-gain error amplifier and
the counter by a real-valued accumulator (saturation kept). That mode exists
to tie the simulator to the linear model.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Optional, TextIO, Union

import numpy as np

from .electrode_model import ElectrodeLoad
from .linear_analysis import COUNTER_LSB_VOLT, LoopConfig

logger = logging.getLogger(__name__)

TRACE_CSV_HEADER = ("t_s", "v_re_V", "code", "i_dac_A")


class InsufficientPeriodsError(ValueError):
    """Too few steady-state oscillation periods to measure a limit cycle."""

    def __init__(self, msg, amplitude=None, n_periods=0):
        super().__init__(msg)
        self.amplitude = amplitude
        self.n_periods = n_periods


@dataclass(frozen=True)
class SimConfig:
    load: ElectrodeLoad
    loop_cfg: LoopConfig
    duration: float
    v_re_initial: float = 0.0
    counter_initial: float = 0
    seed: int = 0  # unused; the simulation is deterministic
    linear: bool = False

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration!r}")
        full = self.loop_cfg.full_scale_code
        if not 0 <= self.counter_initial <= full:
            raise ValueError(f"counter_initial must lie in [0, {full}], got {self.counter_initial!r}")
        if not self.linear and int(self.counter_initial) != self.counter_initial:
            raise ValueError("counter_initial must be an integer code")
        if self.duration < 10 * self.load.tau:
            warnings.warn(f"duration {self.duration:g} s is shorter than 10*tau = {10 * self.load.tau:g} s; "
                          "the trace may not reach steady state", stacklevel=3)

    @property
    def n_samples(self) -> int:
        return max(1, int(round(self.duration * self.loop_cfg.fs)))


@dataclass(frozen=True)
class SimTrace:
    """Sampled record of one run.

    ``v_re[n]`` is the electrode voltage at ``t = n Ts`` (what the comparator
    sees); ``counter_code[n]`` and ``i_dac[n]`` are the code and current the
    DAC holds over ``[n Ts, (n+1) Ts)``.
    """

    sample_times: np.ndarray
    v_re: np.ndarray
    counter_code: np.ndarray
    i_dac: np.ndarray
    fs: float = field(default=float("nan"))

    def __len__(self):
        return len(self.v_re)

    def to_csv(self, dest: Union[str, os.PathLike, TextIO]) -> None:
        """Write ``t_s,v_re_V,code,i_dac_A`` rows with round-trip exact floats."""
        if isinstance(dest, (str, os.PathLike)):
            with open(dest, "w", newline="") as fh:
                self.to_csv(fh)
            return
        w = csv.writer(dest, lineterminator="\n")
        w.writerow(TRACE_CSV_HEADER)
        integral = np.issubdtype(self.counter_code.dtype, np.integer)
        for t, v, c, i in zip(self.sample_times, self.v_re, self.counter_code, self.i_dac):
            w.writerow((repr(float(t)), repr(float(v)), int(c) if integral else repr(float(c)),
                        repr(float(i))))

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, src: Union[str, os.PathLike, TextIO], fs: Optional[float] = None) -> "SimTrace":
        if isinstance(src, (str, os.PathLike)):
            with open(src, newline="") as fh:
                return cls.from_csv(fh, fs)
        r = csv.reader(src)
        header = tuple(next(r))
        if header != TRACE_CSV_HEADER:
            raise ValueError(f"unexpected trace header {header!r}")
        rows = [row for row in r if row]
        t = np.array([float(x[0]) for x in rows])
        v = np.array([float(x[1]) for x in rows])
        try:
            code = np.array([int(x[2]) for x in rows], dtype=np.int64)
        except ValueError:
            code = np.array([float(x[2]) for x in rows])
        i = np.array([float(x[3]) for x in rows])
        if fs is None and len(t) > 1:
            fs = 1.0 / (t[1] - t[0])
        return cls(t, v, code, i, float("nan") if fs is None else fs)


@dataclass(frozen=True)
class StepMetrics:
    overshoot_fraction: float
    settling_time: float
    settled: bool


@dataclass(frozen=True)
class LimitCycleMeasurement:
    amplitude: float
    omega: float
    n_periods: int
    mean: float = float("nan")

    @property
    def freq_hz(self) -> float:
        return self.omega / (2 * math.pi)


def simulate(cfg: SimConfig) -> SimTrace:
    """Run the loop for ``cfg.duration`` seconds and return the sampled trace."""
    lc = cfg.loop_cfg
    load = cfg.load
    n = cfg.n_samples
    ts = lc.ts
    p = math.exp(-ts / load.tau)
    i_lsb = lc.i_lsb
    r_we = load.r_we
    v_ref = lc.v_ref
    top = lc.full_scale_code

    v = float(cfg.v_re_initial)
    v_out = np.empty(n)
    if cfg.linear:
        code = float(cfg.counter_initial)
        codes = np.empty(n)
        for k in range(n):
            v_out[k] = v
            codes[k] = code
            v_inf = code * i_lsb * r_we
            v_next = v_inf + (v - v_inf) * p
            code = min(max(code + (v_ref - v) / COUNTER_LSB_VOLT, 0.0), float(top))
            v = v_next
    else:
        code = int(cfg.counter_initial)
        codes = np.empty(n, dtype=np.int64)
        for k in range(n):
            v_out[k] = v
            codes[k] = code
            v_inf = code * i_lsb * r_we
            v_next = v_inf + (v - v_inf) * p
            if v < v_ref:
                if code < top:
                    code += 1
            elif code > 0:
                code -= 1
            v = v_next
        steps = np.abs(np.diff(codes))
        assert steps.size == 0 or steps.max() <= 1, "counter moved by more than one LSB"
        assert codes.min() >= 0 and codes.max() <= top, "counter left its range"

    times = np.arange(n) * ts
    return SimTrace(times, v_out, codes, codes * i_lsb, lc.fs)


def step_metrics(trace: SimTrace, v_ref: float, band: float = 0.02) -> StepMetrics:
    """Overshoot and settling time of a trace that starts below ``v_ref``.

    Settling time is the first sample time after which ``v_re`` stays within
    ``+/- band * v_ref`` for the rest of the trace.
    """
    v = np.asarray(trace.v_re, dtype=float)
    if v.size == 0:
        raise ValueError("empty trace")
    overshoot = max(0.0, (float(v.max()) - v_ref) / v_ref)
    outside = np.nonzero(np.abs(v - v_ref) > band * abs(v_ref))[0]
    if outside.size == 0:
        return StepMetrics(overshoot, float(trace.sample_times[0]), True)
    last = int(outside[-1])
    if last == v.size - 1:
        return StepMetrics(overshoot, float("nan"), False)
    return StepMetrics(overshoot, float(trace.sample_times[last + 1]), True)


def _upward_crossings(seg: np.ndarray, level: float) -> np.ndarray:
    """Fractional sample indices where ``seg`` crosses ``level`` going up."""
    below = seg[:-1] < level
    idx = np.nonzero(below & (seg[1:] >= level))[0]
    frac = (level - seg[idx]) / (seg[idx + 1] - seg[idx])
    return idx + frac


def extract_limit_cycle(trace: SimTrace, discard_fraction: float = 0.5,
                        min_periods: int = 8) -> LimitCycleMeasurement:
    """Amplitude and frequency of the steady-state oscillation.

    The first ``discard_fraction`` of the trace is dropped. On the rest the
    amplitude is half the peak-to-peak excursion and the period is the mean
    spacing of upward crossings of the segment mean (linearly interpolated
    between samples).

    Raises
    ------
    InsufficientPeriodsError
        Fewer than ``min_periods`` full periods in the retained segment.
    """
    if not 0.0 <= discard_fraction < 1.0:
        raise ValueError(f"discard_fraction must lie in [0, 1), got {discard_fraction!r}")
    v = np.asarray(trace.v_re, dtype=float)
    start = int(math.floor(discard_fraction * v.size))
    seg = v[start:]
    if seg.size < 3:
        raise InsufficientPeriodsError("trace too short", amplitude=None)
    amplitude = 0.5 * float(seg.max() - seg.min())
    mean = float(seg.mean())
    ups = _upward_crossings(seg, mean)
    n_periods = max(0, ups.size - 1)
    if n_periods < min_periods:
        raise InsufficientPeriodsError(
            f"only {n_periods} oscillation periods after discarding {discard_fraction:.0%} "
            f"of the trace; need {min_periods}", amplitude=amplitude, n_periods=n_periods)
    period = (ups[-1] - ups[0]) / n_periods / trace.fs
    return LimitCycleMeasurement(amplitude, 2 * math.pi / period, n_periods, mean)
