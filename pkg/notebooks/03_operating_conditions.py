"""
Choosing the sampling frequency
===============================

Since the phase margin falls monotonically with fs, a target band of
margins maps to a window of clock frequencies. This script recomputes the
recommended operating table and shows how the window tracks the electrode
time constant.
"""

import numpy as np

from _common import plt, save
from potentiostat_loop import ElectrodeLoad, LoopConfig, format_table, pm_at, reference_table

entries = reference_table()
print(format_table(entries))

# %%
# Phase margin versus fs for the three capacitances of the 60 MOhm rows.
# Each curve is the previous one shifted by a decade.
cfg = LoopConfig(i_lsb=10e-9, fs=1.0)
fig, ax = plt.subplots(figsize=(7, 4))
fs_grid = np.geomspace(0.1, 1e5, 300)
for c in (0.1e-9, 1e-9, 10e-9):
    load = ElectrodeLoad(60e6, c)
    ax.semilogx(fs_grid, [pm_at(load, cfg, f) for f in fs_grid], label=f"C = {c * 1e9:g} nF")
ax.axhspan(20.4, 29.2, color="tab:green", alpha=0.15, label="target band")
ax.set_xlabel("fs [Hz]")
ax.set_ylabel("phase margin [deg]")
ax.legend()
save(fig, "03_pm_vs_fs.png")
