"""
Loop gain, Bode plot and phase margin
=====================================

The comparator, counter and DAC look like an integrator with gain
``gm_LSB = I_LSB / 1 V`` driving the electrode's parallel RC. Sampled
with a zero-order hold, the open-loop transfer function is

    G_OL(z) = gm R (1 - p) / ((z - 1)(z - p)),   p = exp(-Ts / tau)

This script draws its Bode plot for three clock rates and reads off the
phase margin.
"""

import numpy as np

from _common import plt, save
from potentiostat_loop import ElectrodeLoad, LoopConfig, freq_response, open_loop_tf, phase_margin

# A 60 MOhm / 1 nF electrode (tau = 60 ms) with a 10 nA DAC step.
load = ElectrodeLoad(r_we=60e6, c_we=1e-9)

fig, (ax_mag, ax_ph) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
for fs in (1e3, 1e4, 1e5):
    cfg = LoopConfig(i_lsb=10e-9, fs=fs)
    tf = open_loop_tf(load, cfg)
    freqs = np.geomspace(1e-2, 0.49 * fs, 800)
    pts = freq_response(tf, freqs)
    pm, fc = phase_margin(tf)
    label = f"fs = {fs / 1e3:g} kHz, PM = {pm:.2f} deg"
    print(label, f"(crossover {fc:.3g} Hz)")
    ax_mag.semilogx(freqs, [p.magnitude_db for p in pts], label=label)
    ax_ph.semilogx(freqs, [p.phase_deg for p in pts])

# The RC pole sits at 1 / (2 pi tau), about 2.65 Hz; the integrator adds
# the first -90 degrees.
ax_mag.axvline(1 / (2 * np.pi * load.tau), color="0.6", ls=":")
ax_mag.axhline(0, color="0.6", lw=0.8)
ax_ph.axhline(-180, color="0.6", lw=0.8)
ax_mag.set_ylabel("|G_OL| [dB]")
ax_ph.set_ylabel("phase [deg]")
ax_ph.set_xlabel("frequency [Hz]")
ax_mag.legend(fontsize=8)
save(fig, "01_bode.png")

# %%
# Stability itself does not depend on the clock: the loop is stable
# whenever gm R <= 1. Only the margin shrinks as fs grows.
from potentiostat_loop import stability_check  # noqa: E402

for r in (60e6, 100e6, 150e6):
    rep = stability_check(ElectrodeLoad(r, 1e-9), LoopConfig(i_lsb=10e-9, fs=1e3))
    print(f"R = {r / 1e6:5.0f} MOhm  gm R = {rep.gm_r_product:.2f}  stable = {rep.stable}")
