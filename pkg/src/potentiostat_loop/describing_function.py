"""Describing-function model of the comparator and limit-cycle prediction.

An ideal comparator with output levels +/-N driven by a sinusoid of
amplitude ``a`` has first-harmonic gain ``K_eq(a) = 4N / (pi a)``. Inserting
it into the loop gives ``K' = gm R_WE K_eq(a) (1-p)``; the oscillation
sustains itself where the closed-loop roots sit on the unit circle,
``K' = K1 = 1-p``. That fixes the amplitude, ``a = 4 N gm R_WE / pi``, and
the frequency is the angle of the boundary root times ``fs``.

The printed form of the frequency formula takes the imaginary part of
``log(|r|)``, which is identically zero. The angle ``Im(log r) = arg r``
is used instead (``z = exp(j omega Ts)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .electrode_model import ElectrodeLoad, load_pole
from .linear_analysis import LoopConfig
from .root_locus import boundary_root, root_angle

#: Comparator output level in normalized counter-LSB volts.
COMPARATOR_LEVEL = 1.0


class UnstableRegimeError(ValueError):
    """``gm R_WE >= 1``: no bounded limit cycle is predicted."""


@dataclass(frozen=True)
class LimitCyclePrediction:
    amplitude: float
    omega: float
    root_at_boundary: complex

    @property
    def freq_hz(self) -> float:
        return self.omega / (2 * math.pi)


def comparator_describing_gain(a: float, n_level: float = COMPARATOR_LEVEL) -> float:
    """First-harmonic gain ``4 N / (pi a)`` of an ideal relay."""
    if not a > 0:
        raise ValueError(f"sinusoid amplitude must be positive, got {a!r}")
    if not n_level > 0:
        raise ValueError(f"relay level must be positive, got {n_level!r}")
    return 4.0 * n_level / (math.pi * a)


def predict_limit_cycle(load: ElectrodeLoad, cfg: LoopConfig,
                        n_level: float = COMPARATOR_LEVEL) -> LimitCyclePrediction:
    """Limit-cycle amplitude (V at the comparator input) and frequency (rad/s)."""
    gmr = cfg.gm_lsb * load.r_we
    if gmr >= 1.0:
        raise UnstableRegimeError(
            f"gm*R_WE = {gmr:.6g} >= 1: small-signal loop unstable, no bounded limit cycle predicted")
    p = load_pole(load, cfg.fs)
    r = boundary_root(p)
    return LimitCyclePrediction(amplitude=4.0 * n_level * gmr / math.pi,
                                omega=cfg.fs * root_angle(r),
                                root_at_boundary=r)
