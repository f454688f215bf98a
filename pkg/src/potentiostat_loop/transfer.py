"""Rational transfer functions in the z domain."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


def _trim(coeffs: Sequence[float]) -> tuple[float, ...]:
    c = [float(x) for x in coeffs]
    while len(c) > 1 and c[0] == 0.0:
        c.pop(0)
    return tuple(c)


@dataclass(frozen=True)
class DiscreteRationalTF:
    """Ratio of two polynomials in z, coefficients in descending powers.

    Parameters
    ----------
    numerator, denominator : sequence of float
        Polynomial coefficients, highest power first.
    fs : float
        Sampling frequency in Hz (``Ts = 1/fs``).
    load_pole : float, optional
        The electrode pole ``p = exp(-Ts/tau)`` when the transfer function
        was built from an electrode load. Carried so that downstream code
        does not recompute it.
    """

    numerator: tuple[float, ...]
    denominator: tuple[float, ...]
    fs: float
    load_pole: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        num = _trim(self.numerator)
        den = _trim(self.denominator)
        if den[0] == 0.0:
            raise ValueError("leading denominator coefficient must be nonzero")
        if len(num) > len(den):
            raise ValueError("transfer function must be proper")
        if not self.fs > 0:
            raise ValueError(f"fs must be positive, got {self.fs}")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @property
    def ts(self) -> float:
        return 1.0 / self.fs

    def __call__(self, z):
        """Evaluate at complex point(s) ``z``."""
        z = np.asarray(z, dtype=complex)
        return np.polyval(self.numerator, z) / np.polyval(self.denominator, z)

    def poles(self) -> np.ndarray:
        return np.roots(self.denominator)

    def zeros(self) -> np.ndarray:
        return np.roots(self.numerator)

    def dc_gain(self) -> float:
        return float(np.real(self(1.0)))

    def scaled(self, gain: float) -> "DiscreteRationalTF":
        return DiscreteRationalTF(tuple(gain * c for c in self.numerator),
                                  self.denominator, self.fs, self.load_pole)

    def __mul__(self, other):
        if isinstance(other, DiscreteRationalTF):
            if other.fs != self.fs:
                raise ValueError("cannot multiply transfer functions with different fs")
            return DiscreteRationalTF(tuple(np.polymul(self.numerator, other.numerator)),
                                      tuple(np.polymul(self.denominator, other.denominator)),
                                      self.fs, self.load_pole or other.load_pole)
        return self.scaled(float(other))

    __rmul__ = __mul__
