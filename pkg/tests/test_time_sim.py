import io
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import signal

from potentiostat_loop.electrode_model import ElectrodeLoad, load_pole
from potentiostat_loop.linear_analysis import LoopConfig
from potentiostat_loop.op_conditions import REFERENCE_CONFIG, REFERENCE_ROWS, fs_range_for_pm
from potentiostat_loop.root_locus import closed_loop_roots
from potentiostat_loop.time_sim import (TRACE_CSV_HEADER, InsufficientPeriodsError, SimConfig,
                                        SimTrace, extract_limit_cycle, simulate, step_metrics)

LOAD_50M = ElectrodeLoad(50e6, 1e-9)


def cfg_125p(fs):
    return LoopConfig.from_gm(125e-12, fs)


def synthetic(v, fs=1e3):
    v = np.asarray(v, dtype=float)
    code = np.zeros(v.size, dtype=np.int64)
    return SimTrace(np.arange(v.size) / fs, v, code, code * 1e-9, fs)


def test_pinned_at_zero_without_reference():
    # LoopConfig refuses v_ref = 0, so force it onto a valid instance; every
    # comparison is then a tie, which counts down into the bottom of the counter
    cfg = LoopConfig(i_lsb=1e-9, fs=1e3)
    object.__setattr__(cfg, "v_ref", 0.0)
    tr = simulate(SimConfig(ElectrodeLoad(1e6, 1e-9), cfg, 0.1))
    assert np.all(tr.counter_code == 0)
    assert np.all(tr.v_re == 0.0)


def test_first_samples_follow_the_register_latency():
    cfg = cfg_125p(1e3)
    tr = simulate(SimConfig(LOAD_50M, cfg, 1.0))
    p = load_pole(LOAD_50M, 1e3)
    assert list(tr.counter_code[:4]) == [0, 1, 2, 3]
    assert tr.v_re[0] == 0.0 and tr.v_re[1] == 0.0
    assert tr.v_re[2] == pytest.approx(cfg.i_lsb * LOAD_50M.r_we * (1 - p), rel=1e-14)


def test_deterministic():
    cfg = SimConfig(LOAD_50M, cfg_125p(1e3), 1.0, seed=7)
    a, b = simulate(cfg), simulate(cfg)
    for name in ("sample_times", "v_re", "counter_code", "i_dac"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


@settings(max_examples=30, deadline=None)
@given(st.floats(1e5, 5e8), st.floats(1e-11, 1e-7), st.floats(10, 1e4),
       st.integers(1, 12), st.integers(0, 4095))
def test_trace_invariants(r, c, fs, bits, start):
    cfg = LoopConfig(i_lsb=1e-9, fs=fs, dac_bits=bits)
    start = min(start, cfg.full_scale_code)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr = simulate(SimConfig(ElectrodeLoad(r, c), cfg, 300 / fs, counter_initial=start))
    codes = tr.counter_code
    assert codes[0] == start
    assert np.all(np.abs(np.diff(codes)) <= 1)
    assert codes.min() >= 0 and codes.max() <= cfg.full_scale_code
    assert np.array_equal(tr.i_dac, codes * cfg.i_lsb)
    np.testing.assert_allclose(np.diff(tr.sample_times), 1 / fs, rtol=1e-9)


def test_tie_counts_down():
    cfg = LoopConfig(i_lsb=1e-9, fs=1e3)
    tr = simulate(SimConfig(ElectrodeLoad(1e6, 1e-9), cfg, 0.01, v_re_initial=0.6, counter_initial=5))
    assert tr.counter_code[1] == 4


def test_config_validation():
    cfg = cfg_125p(1e3)
    with pytest.raises(ValueError):
        SimConfig(LOAD_50M, cfg, 0.0)
    with pytest.raises(ValueError):
        SimConfig(LOAD_50M, cfg, 1.0, counter_initial=1024)
    with pytest.raises(ValueError):
        SimConfig(LOAD_50M, cfg, 1.0, counter_initial=-1)
    with pytest.raises(ValueError):
        SimConfig(LOAD_50M, cfg, 1.0, counter_initial=2.5)
    with pytest.warns(UserWarning, match="10\\*tau"):
        SimConfig(LOAD_50M, cfg, 0.1)


def test_slow_clock_reaches_bounded_oscillation():
    tr = simulate(SimConfig(LOAD_50M, cfg_125p(1e3), 2.0))
    tail = tr.v_re[tr.v_re.size // 2:]
    assert abs(tail.mean() - 0.6) < 0.01
    assert 0 < tail.max() - tail.min() < 0.05
    meas = extract_limit_cycle(tr)
    assert meas.n_periods >= 8


def test_overshoot_grows_with_fs():
    m1 = step_metrics(simulate(SimConfig(LOAD_50M, cfg_125p(1e3), 1.0)), 0.6)
    m10 = step_metrics(simulate(SimConfig(LOAD_50M, cfg_125p(1e4), 1.0)), 0.6)
    assert m10.overshoot_fraction > m1.overshoot_fraction
    assert m10.settling_time < m1.settling_time


def test_unstable_gain_is_bounded_only_by_saturation():
    load = ElectrodeLoad(200e6, 1e-9)
    cfg = LoopConfig.from_gm(10e-9, 1e3)
    assert not closed_loop_roots(load_pole(load, 1e3), 2 * (1 - load_pole(load, 1e3))).stable
    # linear loop started next to equilibrium: the error envelope grows
    tr = simulate(SimConfig(load, cfg, 2.0, v_re_initial=0.59, counter_initial=0.3, linear=True))
    env = [np.abs(tr.v_re[i:i + 50] - 0.6).max() for i in range(0, 1000, 50)]
    assert env[10] > 2.5 * env[0]
    tail = tr.counter_code[1000:]
    assert tail.min() == 0.0
    # the relay loop also leans on the bottom of the counter in steady state
    relay = simulate(SimConfig(load, cfg, 2.0))
    assert (relay.counter_code[1000:] == 0).sum() > 100


def test_linear_mode_matches_closed_loop_step():
    fs, load = 20.0, ElectrodeLoad(60e6, 1e-9)
    cfg = LoopConfig.from_gm(10e-9, fs)
    n = 200
    tr = simulate(SimConfig(load, cfg, n / fs, linear=True))
    top = cfg.full_scale_code
    assert tr.counter_code[1:].min() > 0 and tr.counter_code.max() < top
    p = load_pole(load, fs)
    k = cfg.gm_lsb * load.r_we * (1 - p)
    _, (y,) = signal.dstep(([k], [1.0, -(1 + p), p + k], 1 / fs), n=n)
    expected = cfg.v_ref * y[:, 0]
    np.testing.assert_allclose(tr.v_re[2:], expected[2:], rtol=1e-6)
    assert tr.v_re[0] == expected[0] == 0.0


def test_csv_round_trip(tmp_path):
    tr = simulate(SimConfig(LOAD_50M, cfg_125p(1e3), 0.6))
    text = tr.to_csv_string()
    assert text.splitlines()[0] == ",".join(TRACE_CSV_HEADER)
    back = SimTrace.from_csv(io.StringIO(text))
    path = tmp_path / "trace.csv"
    tr.to_csv(path)
    back2 = SimTrace.from_csv(path)
    for other in (back, back2):
        assert np.array_equal(other.v_re, tr.v_re)
        assert np.array_equal(other.counter_code, tr.counter_code)
        assert np.array_equal(other.i_dac, tr.i_dac)
        assert np.array_equal(other.sample_times, tr.sample_times)
        assert other.fs == pytest.approx(1e3)


def test_csv_rejects_foreign_header():
    with pytest.raises(ValueError):
        SimTrace.from_csv(io.StringIO("a,b,c,d\n1,2,3,4\n"))


def test_step_metrics_synthetic():
    m = step_metrics(synthetic([0, 0.9, 0.6, 0.6, 0.6]), 0.6)
    assert m.overshoot_fraction == pytest.approx(0.5)
    assert m.settled and m.settling_time == pytest.approx(2e-3)


def test_step_metrics_monotone_and_unsettled():
    mono = step_metrics(synthetic(np.linspace(0, 0.6, 50)), 0.6)
    assert mono.overshoot_fraction == 0.0
    assert mono.settled
    never = step_metrics(synthetic([0, 0.1, 0.2]), 0.6)
    assert not never.settled and math.isnan(never.settling_time)
    with pytest.raises(ValueError):
        step_metrics(synthetic([]), 0.6)


@pytest.mark.parametrize("f0", [7.3, 31.0, 113.7])
def test_extract_sinusoid(f0):
    fs, n = 1e3, 20_000
    t = np.arange(n) / fs
    amp, mean = 0.02, 0.6
    meas = extract_limit_cycle(synthetic(mean + amp * np.sin(2 * np.pi * f0 * t + 0.3), fs))
    w0 = 2 * np.pi * f0
    assert abs(meas.amplitude - amp) <= amp * (1 - math.cos(w0 / fs))
    assert abs(meas.omega - w0) <= 2 * np.pi * fs / n
    assert meas.freq_hz == pytest.approx(f0, rel=1e-3)
    assert meas.mean == pytest.approx(mean, abs=1e-4)


def test_extract_constant_trace():
    with pytest.raises(InsufficientPeriodsError) as err:
        extract_limit_cycle(synthetic(np.full(1000, 0.6)))
    assert err.value.amplitude == 0.0
    assert err.value.n_periods == 0


def test_extract_validates_discard():
    with pytest.raises(ValueError):
        extract_limit_cycle(synthetic(np.zeros(100)), discard_fraction=1.0)


def _settling(load, cfg, fs):
    tr = simulate(SimConfig(load, cfg.with_fs(fs), max(60 * load.tau, 200 / fs)))
    m = step_metrics(tr, cfg.v_ref)
    return m.settling_time if m.settled else math.inf


@pytest.mark.parametrize("row", REFERENCE_ROWS, ids=lambda r: f"R{r[0][1]:g}-C{r[0][2]:g}")
def test_doubling_fs_never_slows_settling(row):
    (_, r, c), band = row
    load = ElectrodeLoad(r, c)
    cfg = LoopConfig(fs=1.0, **REFERENCE_CONFIG)
    win = fs_range_for_pm(load, cfg, *band)
    grid = win.fs_low * 2.0 ** np.arange(7)
    times = [_settling(load, cfg, fs) for fs in grid]
    assert all(b <= a for a, b in zip(times, times[1:]))
