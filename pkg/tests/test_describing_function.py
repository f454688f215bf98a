import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from potentiostat_loop.describing_function import (UnstableRegimeError, comparator_describing_gain,
                                                   predict_limit_cycle)
from potentiostat_loop.electrode_model import ElectrodeLoad, load_pole
from potentiostat_loop.linear_analysis import LoopConfig
from potentiostat_loop.root_locus import closed_loop_roots, stability_limit

LOAD_50M = ElectrodeLoad(50e6, 1e-9)
CFG_125P = LoopConfig.from_gm(125e-12, 1e3)


@pytest.mark.parametrize("a, n, expected", [
    (1.0, 1.0, 4 / math.pi),
    (4 / math.pi, 1.0, 1.0),
    (0.5, 2.0, 16 / math.pi),
])
def test_describing_gain_values(a, n, expected):
    assert comparator_describing_gain(a, n) == pytest.approx(expected, rel=1e-15)


def numeric_first_harmonic(a, n=1.0, m=200_000):
    # Fourier coefficient of sign(a sin x) divided by a
    x = (np.arange(m) + 0.5) * 2 * np.pi / m
    y = n * np.sign(a * np.sin(x))
    return 2 * np.mean(y * np.sin(x)) / a


@pytest.mark.parametrize("a", [1e-3, 0.1, 2.5])
def test_describing_gain_matches_fourier_series(a):
    assert comparator_describing_gain(a) == pytest.approx(numeric_first_harmonic(a), rel=1e-8)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_describing_gain_rejects_bad_amplitude(bad):
    with pytest.raises(ValueError):
        comparator_describing_gain(bad)


def test_amplitude_125p_50meg():
    pred = predict_limit_cycle(LOAD_50M, CFG_125P)
    # mpmath: 4 * 125e-12 * 50e6 / pi
    assert pred.amplitude == pytest.approx(0.00795774715459477, rel=1e-14)
    assert pred.amplitude == pytest.approx(7.96e-3, abs=0.01e-3)


@settings(max_examples=200)
@given(st.floats(0.01, 0.99), st.floats(1e-3, 50.0))
def test_amplitude_is_a_fixed_point(gmr, ts_over_tau):
    fs, c = 1e3, 1e-9
    r = 1 / (fs * c * ts_over_tau)
    load = ElectrodeLoad(r, c)
    pred = predict_limit_cycle(load, LoopConfig.from_gm(gmr / r, fs))
    p = load_pole(load, fs)
    k_eff = gmr * comparator_describing_gain(pred.amplitude) * (1 - p)
    assert k_eff == pytest.approx(stability_limit(p), rel=1e-12)
    assert abs(pred.root_at_boundary) == pytest.approx(1.0, abs=1e-12)
    assert pred.root_at_boundary == closed_loop_roots(p, stability_limit(p)).r1


def test_amplitude_independent_of_fs_and_capacitance():
    base = predict_limit_cycle(LOAD_50M, CFG_125P).amplitude
    for fs in (10.0, 1e3, 1e5):
        for c in (1e-12, 1e-9, 1e-6):
            got = predict_limit_cycle(ElectrodeLoad(50e6, c), CFG_125P.with_fs(fs)).amplitude
            assert got == base


def test_frequency_matches_root_angle():
    pred = predict_limit_cycle(LOAD_50M, CFG_125P)
    p = load_pole(LOAD_50M, 1e3)
    assert pred.omega == pytest.approx(1e3 * math.acos((1 + p) / 2), rel=1e-12)
    assert pred.freq_hz == pytest.approx(pred.omega / (2 * math.pi))
    assert 0 < pred.freq_hz < 1e3 / 2


def test_frequency_grows_with_fs():
    omegas = [predict_limit_cycle(LOAD_50M, CFG_125P.with_fs(fs)).omega for fs in np.geomspace(1, 1e6, 40)]
    assert all(b > a for a, b in zip(omegas, omegas[1:]))


def test_frequency_tends_to_geometric_mean_for_fast_clock():
    # for Ts << tau the boundary angle is about sqrt(Ts/tau)
    fs = 1e6
    pred = predict_limit_cycle(LOAD_50M, CFG_125P.with_fs(fs))
    assert pred.omega == pytest.approx(math.sqrt(fs / LOAD_50M.tau), rel=1e-3)


@pytest.mark.parametrize("r", [8e9, 9e9, 1e10])
def test_unstable_regime(r):
    with pytest.raises(UnstableRegimeError, match="gm\\*R_WE"):
        predict_limit_cycle(ElectrodeLoad(r, 1e-9), CFG_125P)
