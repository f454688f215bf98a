"""Linearized loop model: open-loop transfer function, Bode data, phase margin.

The comparator is treated as a unity-gain block, the up/down counter as a
discrete-time accumulator ``1/(z-1)`` and the current DAC as a ZOH with
transconductance ``gm_lsb = I_LSB / 1 V``. Together with the sampled
electrode load this gives::

    G_OL(z) = gm R_WE (1-p) / ((z-1)(z-p)) = K * L(z)

with ``K = gm R_WE (1-p)`` and ``L(z) = 1/((z-1)(z-p))``. The closed loop
is stable while ``K <= K1 = 1-p``, i.e. ``gm R_WE <= 1``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .electrode_model import ElectrodeLoad, load_pole
from .transfer import DiscreteRationalTF

__all__ = [
    "LoopConfig", "DiscreteRationalTF", "FrequencyResponsePoint", "StabilityReport",
    "NoCrossoverError", "open_loop_tf", "loop_gain_split", "freq_response",
    "phase_margin", "stability_check",
]

#: Counter LSB normalization used to turn I_LSB into a transconductance.
COUNTER_LSB_VOLT = 1.0

_GAIN_TOL = 1e-12


class NoCrossoverError(ValueError):
    """The loop gain never crosses 0 dB inside (0, fs/2)."""


@dataclass(frozen=True)
class LoopConfig:
    """Controller / DAC parameters of the loop.

    ``gm_lsb`` may be omitted; it is then derived as ``i_lsb / 1 V``. When
    both are given they must agree.
    """

    i_lsb: float
    fs: float
    dac_bits: int = 10
    v_ref: float = 0.6
    v_dd: float = 1.2
    gm_lsb: Optional[float] = None

    def __post_init__(self):
        if not self.i_lsb > 0:
            raise ValueError(f"i_lsb must be positive, got {self.i_lsb!r}")
        if not self.fs > 0:
            raise ValueError(f"fs must be positive, got {self.fs!r}")
        if int(self.dac_bits) != self.dac_bits or not 1 <= self.dac_bits <= 32:
            raise ValueError(f"dac_bits must be an integer in [1, 32], got {self.dac_bits!r}")
        if not 0 < self.v_ref < self.v_dd:
            raise ValueError(f"need 0 < v_ref < v_dd, got v_ref={self.v_ref!r}, v_dd={self.v_dd!r}")
        derived = self.i_lsb / COUNTER_LSB_VOLT
        if self.gm_lsb is None:
            object.__setattr__(self, "gm_lsb", derived)
        elif not math.isclose(self.gm_lsb, derived, rel_tol=1e-12):
            raise ValueError(f"gm_lsb={self.gm_lsb!r} S is inconsistent with i_lsb={self.i_lsb!r} A / 1 V")
        object.__setattr__(self, "dac_bits", int(self.dac_bits))

    @classmethod
    def from_gm(cls, gm_lsb: float, fs: float, **kw) -> "LoopConfig":
        return cls(i_lsb=gm_lsb * COUNTER_LSB_VOLT, fs=fs, **kw)

    @property
    def ts(self) -> float:
        return 1.0 / self.fs

    @property
    def full_scale_code(self) -> int:
        return 2 ** self.dac_bits - 1

    def with_fs(self, fs: float) -> "LoopConfig":
        return LoopConfig(self.i_lsb, fs, self.dac_bits, self.v_ref, self.v_dd)


@dataclass(frozen=True)
class FrequencyResponsePoint:
    freq_hz: float
    magnitude_db: float
    phase_deg: float


@dataclass(frozen=True)
class StabilityReport:
    """Closed-form stability verdict for one (load, config) pair."""

    k: float
    k1: float
    gm_r_product: float
    stable: bool
    phase_margin_deg: Optional[float] = None
    crossover_hz: Optional[float] = None


def open_loop_tf(load: ElectrodeLoad, cfg: LoopConfig) -> DiscreteRationalTF:
    """``G_OL(z) = gm R_WE (1-p) / ((z-1)(z-p))``."""
    p = load_pole(load, cfg.fs)
    gain = cfg.gm_lsb * load.r_we * (1.0 - p)
    return DiscreteRationalTF((gain,), (1.0, -(1.0 + p), p), cfg.fs, load_pole=p)


def loop_gain_split(load: ElectrodeLoad, cfg: LoopConfig) -> tuple[float, DiscreteRationalTF]:
    """Split ``G_OL`` into the scalar gain ``K`` and ``L(z) = 1/((z-1)(z-p))``."""
    p = load_pole(load, cfg.fs)
    k = cfg.gm_lsb * load.r_we * (1.0 - p)
    return k, DiscreteRationalTF((1.0,), (1.0, -(1.0 + p), p), cfg.fs, load_pole=p)


def _start_phase(phase_rad: float) -> float:
    # first point maps into (-2*pi, 0]
    ph = math.fmod(phase_rad, 2 * math.pi)
    if ph > 0:
        ph -= 2 * math.pi
    return ph


def freq_response(tf: DiscreteRationalTF, freqs: Sequence[float]) -> list[FrequencyResponsePoint]:
    """Evaluate ``tf`` on the unit circle at the given frequencies (Hz).

    Frequencies must be ascending and inside ``(0, fs/2)``. The phase is
    unwrapped from the lowest frequency, whose phase is placed in
    ``(-360, 0]`` degrees.
    """
    f = np.asarray(freqs, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("freqs must be a non-empty 1-D sequence")
    nyq = tf.fs / 2
    if np.any(f <= 0) or np.any(f >= nyq):
        raise ValueError(f"frequencies must lie in (0, fs/2) = (0, {nyq:g}) Hz; "
                         "anything else aliases")
    if np.any(np.diff(f) <= 0):
        raise ValueError("freqs must be strictly ascending")
    h = tf(np.exp(2j * np.pi * f / tf.fs))
    phase = np.unwrap(np.angle(h))
    phase += _start_phase(phase[0]) - phase[0]
    mag_db = 20 * np.log10(np.abs(h))
    return [FrequencyResponsePoint(float(fi), float(m), float(p))
            for fi, m, p in zip(f, mag_db, np.degrees(phase))]


def _crossover_theta(tf: DiscreteRationalTF, points_per_decade: int, decades: float):
    """Bracket the first 0 dB crossing in normalized angular frequency."""
    n = int(math.ceil(points_per_decade * decades)) + 1
    theta = np.logspace(math.log10(math.pi) - decades, math.log10(math.pi), n)
    theta[-1] = math.pi * (1 - 1e-12)
    h = tf(np.exp(1j * theta))
    logmag = np.log(np.abs(h))
    phase = np.unwrap(np.angle(h))
    phase += _start_phase(phase[0]) - phase[0]
    idx = np.nonzero(np.sign(logmag[:-1]) != np.sign(logmag[1:]))[0]
    if idx.size == 0:
        return None
    i = int(idx[0])
    return theta[i], theta[i + 1], phase[i]


def phase_margin(tf: DiscreteRationalTF, points_per_decade: int = 64,
                 rel_tol: float = 1e-12) -> tuple[float, float]:
    """Phase margin (degrees) and gain-crossover frequency (Hz).

    The crossover is bracketed on a logarithmic grid spanning ten decades
    below Nyquist and then refined by bisection in log-frequency. Working
    in normalized frequency ``theta = 2 pi f / fs`` keeps the result a
    function of the dimensionless loop parameters only.

    Raises
    ------
    NoCrossoverError
        If ``|tf|`` does not cross 0 dB inside ``(0, fs/2)``.
    """
    if points_per_decade < 64:
        raise ValueError("points_per_decade must be at least 64")
    bracket = _crossover_theta(tf, points_per_decade, decades=10.0)
    if bracket is None:
        raise NoCrossoverError("loop gain does not cross 0 dB below Nyquist; phase margin undefined")
    lo, hi, phase_lo = bracket

    def logmag(th):
        return math.log(abs(complex(tf(cmath.exp(1j * th)))))

    s_lo = math.copysign(1.0, logmag(lo))
    a, b = math.log(lo), math.log(hi)
    while b - a > rel_tol:
        mid = 0.5 * (a + b)
        if math.copysign(1.0, logmag(math.exp(mid))) == s_lo:
            a = mid
        else:
            b = mid
    theta_c = math.exp(0.5 * (a + b))
    ph = cmath.phase(complex(tf(cmath.exp(1j * theta_c))))
    # pick the branch nearest the unwrapped phase at the bracket start
    ph += 2 * math.pi * round((phase_lo - ph) / (2 * math.pi))
    pm = 180.0 + math.degrees(ph)
    return pm, theta_c * tf.fs / (2 * math.pi)


def stability_check(load: ElectrodeLoad, cfg: LoopConfig) -> StabilityReport:
    """Closed-form stability test ``gm R_WE <= 1`` plus phase margin when defined."""
    k, _ = loop_gain_split(load, cfg)
    k1 = 1.0 - load_pole(load, cfg.fs)
    gmr = cfg.gm_lsb * load.r_we
    stable = gmr <= 1.0 + _GAIN_TOL
    try:
        pm, fc = phase_margin(open_loop_tf(load, cfg))
    except NoCrossoverError:
        pm = fc = None
    return StabilityReport(k=k, k1=k1, gm_r_product=gmr, stable=stable,
                           phase_margin_deg=pm, crossover_hz=fc)
