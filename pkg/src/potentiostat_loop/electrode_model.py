"""Working-electrode RC load and its zero-order-hold discretization.

The working electrode is modelled as ``R_WE`` in parallel with ``C_WE``,
driven by the DAC current source. With a piecewise-constant (ZOH) current,
the voltage across the pair between two updates follows the exact
first-order exponential, and the sampled load becomes::

    Z_load(z) = R_WE (1 - p) / (z - p),   p = exp(-Ts / tau),  tau = R_WE C_WE

All quantities are SI: ohms, farads, seconds, hertz, volts, amperes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .transfer import DiscreteRationalTF


@dataclass(frozen=True)
class ElectrodeLoad:
    """Parallel RC model of the working electrode / solution interface.

    Parameters
    ----------
    r_we : float
        Faradaic (charge-transfer) resistance in ohms.
    c_we : float
        Double-layer capacitance in farads.
    """

    r_we: float
    c_we: float

    def __post_init__(self):
        if not (self.r_we > 0 and math.isfinite(self.r_we)):
            raise ValueError(f"r_we must be a positive finite resistance, got {self.r_we!r}")
        if not (self.c_we > 0 and math.isfinite(self.c_we)):
            raise ValueError(f"c_we must be a positive finite capacitance, got {self.c_we!r}")

    @property
    def tau(self) -> float:
        return self.r_we * self.c_we


def tau(load: ElectrodeLoad) -> float:
    """Time constant ``R_WE * C_WE`` in seconds."""
    return load.tau


def load_pole(load: ElectrodeLoad, fs: float) -> float:
    """Discrete pole ``exp(-Ts/tau)`` of the sampled load."""
    if not fs > 0:
        raise ValueError(f"fs must be positive, got {fs!r}")
    return math.exp(-1.0 / (fs * load.tau))


def one_minus_pole(load: ElectrodeLoad, fs: float) -> float:
    """``1 - p``, formed from the rounded pole itself.

    Subtracting the stored pole (exact for ``p >= 0.5``) keeps gains and
    poles consistent, so ``Z_load(1) == R_WE`` and ``K / K1 == gm R_WE``.
    """
    return 1.0 - load_pole(load, fs)


def zoh_load_tf(load: ElectrodeLoad, fs: float) -> DiscreteRationalTF:
    """ZOH-equivalent load impedance ``R_WE (1-p) / (z-p)``.

    The returned transfer function has unit DC gain relative to ``R_WE``:
    evaluated at ``z = 1`` it gives ``R_WE``.
    """
    p = load_pole(load, fs)
    return DiscreteRationalTF((load.r_we * (1.0 - p),), (1.0, -p), fs,
                              load_pole=p)


def step_update(v0: float, i_in: float, load: ElectrodeLoad, dt: float) -> float:
    """Advance the electrode voltage over ``dt`` with constant current ``i_in``.

    Exact solution of ``C dv/dt = i_in - v/R``::

        v(dt) = i_in R + (v0 - i_in R) exp(-dt/tau)
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    v_inf = i_in * load.r_we
    return v_inf + (v0 - v_inf) * math.exp(-dt / load.tau)
