"""
Closed-loop root locus
======================

Closing the loop gives ``z**2 - (1 + p) z + (p + K) = 0``. As the gain
``K`` rises from zero the poles at 1 and p move together, meet at the
breakaway gain ``((1 - p) / 2)**2`` and then leave the real axis. They
reach the unit circle at ``K1 = 1 - p``.
"""

import numpy as np

from _common import plt, save
from potentiostat_loop import ElectrodeLoad, load_pole, locus_sweep

load = ElectrodeLoad(60e6, 1e-9)

fig, ax = plt.subplots(figsize=(6, 6))
theta = np.linspace(0, 2 * np.pi, 400)
ax.plot(np.cos(theta), np.sin(theta), color="0.7", lw=0.8)

for fs in (20.0, 100.0, 1e3):
    p = load_pole(load, fs)
    sweep = locus_sweep(p, np.linspace(0, 1.5 * (1 - p), 600))
    upper = np.array([pair.r1 for pair in sweep])
    lower = np.array([pair.r2 for pair in sweep])
    line, = ax.plot(upper.real, upper.imag, ".", ms=2, label=f"fs = {fs:g} Hz (p = {p:.3f})")
    ax.plot(lower.real, lower.imag, ".", ms=2, color=line.get_color())
    print(f"fs = {fs:6g} Hz: breakaway K = {sweep.breakaway_gain:.3e}, "
          f"unit circle at K1 = {sweep.stability_limit:.3e}")

ax.set_aspect("equal")
ax.set_xlim(-0.2, 1.3)
ax.set_ylim(-1.1, 1.1)
ax.set_xlabel("Re z")
ax.set_ylabel("Im z")
ax.legend(fontsize=8, loc="lower left")
save(fig, "02_root_locus.png")

