"""
Limit cycles: describing function versus simulation
===================================================

Replacing the comparator by its describing function ``4 / (pi a)`` turns
the loop gain into ``K(a)``. The cycle settles where the closed-loop roots
touch the unit circle, which gives ``a = 4 gm R / pi`` and a frequency
equal to the angle of the boundary root times fs.

The prediction only makes sense while the oscillating counter stays inside
its range. This script compares prediction and simulation across the
resistance range where that holds, and shows what happens outside it.
"""

import numpy as np

from _common import plt, save
from potentiostat_loop.compare_harness import (REFERENCE_C_WE, REFERENCE_CONFIG, default_r_sweep,
                                               gm_r_sweep, run_comparison, unsaturated_r_range)

lo, hi = unsaturated_r_range(REFERENCE_CONFIG, REFERENCE_C_WE)
print(f"counter stays in range for R between {lo / 1e6:.2f} and {hi / 1e6:.2f} MOhm")

inside = run_comparison(default_r_sweep())
print(f"inside that range: max amplitude error {inside.max_err_a:.1%}, "
      f"max frequency error {inside.max_err_omega:.1%}")

fig, (ax_a, ax_f) = plt.subplots(1, 2, figsize=(10, 4))
r = np.array([row.r_we for row in inside.rows])
ax_a.loglog(r, [row.predicted_a for row in inside.rows], "o-", label="predicted")
ax_a.loglog(r, [row.measured_a for row in inside.rows], "s--", label="simulated")
ax_f.loglog(r, [row.predicted_freq_hz for row in inside.rows], "o-", label="predicted")
ax_f.loglog(r, [row.measured_freq_hz for row in inside.rows], "s--", label="simulated")
ax_a.set_ylabel("amplitude [V]")
ax_f.set_ylabel("frequency [Hz]")
for ax in (ax_a, ax_f):
    ax.set_xlabel("R_WE [ohm]")
    ax.legend()
save(fig, "05_limit_cycle.png")

# %%
# With gm R between 0.05 and 0.8 the equilibrium code is at most a dozen
# LSBs, far below the predicted swing. The counter sits on zero for most
# of each cycle and the errors are large.
outside = run_comparison(gm_r_sweep(REFERENCE_CONFIG, 0.05, 0.8, 5))
for row in outside.rows:
    print(f"gm R = {row.r_we * REFERENCE_CONFIG.gm_lsb:.2f}: amplitude error {row.err_a:.3g}, "
          f"frequency error {row.err_omega:.2f}")
