import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from potentiostat_loop.electrode_model import (ElectrodeLoad, load_pole, step_update, tau,
                                               zoh_load_tf)

resistances = st.floats(1e3, 1e10)
capacitances = st.floats(1e-12, 1e-6)
frequencies = st.floats(1e-1, 1e6)


def rk4_rc(v0, i_in, r, c, dt, n=10_000):
    """Fine-step explicit RK4 integration of C dv/dt = i - v/R."""
    h = dt / n
    f = lambda v: (i_in - v / r) / c
    v = v0
    for _ in range(n):
        k1 = f(v)
        k2 = f(v + 0.5 * h * k1)
        k3 = f(v + 0.5 * h * k2)
        k4 = f(v + h * k3)
        v += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


@pytest.mark.parametrize("r, c, expected", [
    (60e6, 1e-9, 0.06),
    (1.0, 1.0, 1.0),
    (12e6, 10e-9, 0.12),
])
def test_tau(r, c, expected):
    assert tau(ElectrodeLoad(r, c)) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("r, c", [(0, 1e-9), (-1, 1e-9), (1e6, 0), (1e6, -1e-9), (math.inf, 1e-9)])
def test_load_rejects_nonpositive(r, c):
    with pytest.raises(ValueError):
        ElectrodeLoad(r, c)


def test_zoh_load_tf_reference_values():
    tf = zoh_load_tf(ElectrodeLoad(60e6, 1e-9), 1e3)
    # high-precision reference: mpmath exp(-1/60) and 60e6*(1 - exp(-1/60))
    assert tf.load_pole == pytest.approx(0.98347145382161748947, rel=1e-15)
    assert tf.denominator == (1.0, -tf.load_pole)
    assert tf.numerator[0] == pytest.approx(991712.77070295063158, rel=1e-12)


def test_zoh_load_tf_settled_limit():
    load = ElectrodeLoad(1e3, 1e-9)
    tf = zoh_load_tf(load, 1.0)  # Ts/tau = 1e6
    assert tf.load_pole == 0.0
    assert tf.numerator[0] == load.r_we


@settings(max_examples=200)
@given(resistances, capacitances, frequencies)
def test_dc_gain_is_r_we(r, c, fs):
    load = ElectrodeLoad(r, c)
    tf = zoh_load_tf(load, fs)
    assert tf.dc_gain() == pytest.approx(r, rel=4 * np.finfo(float).eps)


def test_pole_moves_toward_one_with_fs():
    load = ElectrodeLoad(60e6, 1e-9)
    poles = [load_pole(load, fs) for fs in np.geomspace(1, 1e6, 50)]
    assert all(b > a for a, b in zip(poles, poles[1:]))


def test_step_update_equilibrium_and_final_value():
    load = ElectrodeLoad(60e6, 1e-9)
    assert step_update(0.6, 10e-9, load, 1e-3) == pytest.approx(0.6, rel=1e-15)
    assert step_update(0.0, 10e-9, load, 1e3) == pytest.approx(0.6, rel=1e-12)


def test_step_update_one_time_constant():
    load = ElectrodeLoad(60e6, 1e-9)
    v = step_update(0.0, 10e-9, load, 0.06)
    assert v == pytest.approx(rk4_rc(0.0, 10e-9, 60e6, 1e-9, 0.06), rel=1e-6)
    assert v == pytest.approx(0.37927233529713460704, rel=1e-12)


def test_step_update_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        step_update(0.0, 1e-9, ElectrodeLoad(1e6, 1e-9), 0.0)


@settings(max_examples=200)
@given(st.floats(-1, 2), st.floats(0, 1e-6), resistances, capacitances,
       st.floats(1e-3, 3), st.floats(1e-3, 3))
def test_step_update_semigroup(v0, i_in, r, c, a, b):
    load = ElectrodeLoad(r, c)
    t1, t2 = a * load.tau, b * load.tau
    two = step_update(step_update(v0, i_in, load, t1), i_in, load, t2)
    one = step_update(v0, i_in, load, t1 + t2)
    scale = max(abs(one), abs(v0), abs(i_in * r), 1e-300)
    assert abs(two - one) <= 1e-12 * scale
