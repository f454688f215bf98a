"""Closed-loop roots of the second-order characteristic equation.

Closing the loop ``K' L(z)`` with ``L(z) = 1/((z-1)(z-p))`` gives::

    z**2 - (1+p) z + (p + K') = 0

Everything here is expressed in the dimensionless pair ``(p, K')`` so the
same code serves the linear model (``K' = K``) and the describing-function
model (``K' = K * K_eq(a)``).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

# discriminants within this band are treated as a repeated root
DISCRIMINANT_DEADBAND = 1e-14


@dataclass(frozen=True)
class RootPair:
    """The two closed-loop poles at one gain.

    ``r1`` is the larger real root, or the root with positive imaginary
    part on the complex branch.
    """

    r1: complex
    r2: complex
    k_effective: float
    p: float

    @property
    def is_complex(self) -> bool:
        return self.r1.imag != 0.0

    @property
    def max_modulus(self) -> float:
        return max(abs(self.r1), abs(self.r2))

    @property
    def stable(self) -> bool:
        return self.max_modulus < 1.0


@dataclass(frozen=True)
class LocusSweep:
    pairs: tuple[RootPair, ...]
    p: float
    breakaway_gain: float
    stability_limit: float

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)


def _check_pole(p: float):
    # p == 0 is the fully settled load (exp underflow), still a valid loop
    if not 0.0 <= p < 1.0:
        raise ValueError(f"pole p must lie in [0, 1), got {p!r}")


def discriminant(p: float, k_prime: float) -> float:
    """``(1+p)**2 - 4(p+K')``, evaluated as ``(1-p)**2 - 4K'`` to avoid cancellation."""
    return (1.0 - p) ** 2 - 4.0 * k_prime


def closed_loop_roots(p: float, k_prime: float) -> RootPair:
    """Roots ``(1+p)/2 +/- sqrt((1+p)**2 - 4(p+K'))/2``."""
    _check_pole(p)
    if k_prime < 0:
        raise ValueError(f"k_prime must be non-negative, got {k_prime!r}")
    centre = 0.5 * (1.0 + p)
    disc = discriminant(p, k_prime)
    if abs(disc) <= DISCRIMINANT_DEADBAND:
        r = complex(centre, 0.0)
        return RootPair(r, r, k_prime, p)
    if disc > 0:
        half = 0.5 * math.sqrt(disc)
        # larger root first; the smaller one from Vieta avoids cancellation
        r1 = centre + half
        r2 = (p + k_prime) / r1
        return RootPair(complex(r1, 0.0), complex(r2, 0.0), k_prime, p)
    half = 0.5 * math.sqrt(-disc)
    return RootPair(complex(centre, half), complex(centre, -half), k_prime, p)


def breakaway_gain(p: float) -> float:
    """Gain at which the two real roots meet: ``((1-p)/2)**2``."""
    _check_pole(p)
    return (0.5 * (1.0 - p)) ** 2


def stability_limit(p: float) -> float:
    """Gain ``K1 = 1-p`` that places both roots on the unit circle."""
    _check_pole(p)
    return 1.0 - p


def locus_sweep(p: float, k_grid: Sequence[float]) -> LocusSweep:
    """Closed-loop roots along an ascending gain grid."""
    _check_pole(p)
    ks = [float(k) for k in k_grid]
    if not ks:
        raise ValueError("k_grid must not be empty")
    if any(b < a for a, b in zip(ks, ks[1:])):
        raise ValueError("k_grid must be ascending")
    pairs = tuple(closed_loop_roots(p, k) for k in ks)
    return LocusSweep(pairs, p, breakaway_gain(p), stability_limit(p))


def boundary_root(p: float) -> complex:
    """Upper closed-loop root at ``K' = K1``; lies on the unit circle."""
    r = closed_loop_roots(p, stability_limit(p)).r1
    return r if r.imag >= 0 else r.conjugate()


def root_angle(r: complex) -> float:
    """``Im(log r)``, the normalized angular frequency of a z-plane root."""
    return cmath.phase(r)
