"""
Start-up transient of the nonlinear loop
========================================

The cycle-accurate simulator runs the real comparator (one bit per
clock), a saturating up/down counter and the DAC into the RC load. A
faster clock settles sooner but overshoots more.
"""

from _common import OUTPUT_DIR, plt, save
from potentiostat_loop import ElectrodeLoad, LoopConfig, SimConfig, simulate, step_metrics

load = ElectrodeLoad(50e6, 1e-9)

fig, (ax_v, ax_c) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
for fs in (1e3, 1e4):
    cfg = LoopConfig(i_lsb=125e-12, fs=fs)
    trace = simulate(SimConfig(load, cfg, duration=1.0))
    m = step_metrics(trace, cfg.v_ref)
    label = f"fs = {fs / 1e3:g} kHz: overshoot {100 * m.overshoot_fraction:.0f}%, settles in {m.settling_time:.2f} s"
    print(label)
    ax_v.plot(trace.sample_times, trace.v_re, label=label)
    ax_c.plot(trace.sample_times, trace.counter_code)

ax_v.axhline(0.6, color="0.6", lw=0.8)
ax_v.set_ylabel("V_RE [V]")
ax_c.set_ylabel("counter code")
ax_c.set_xlabel("time [s]")
ax_v.legend(fontsize=8)
save(fig, "04_transient.png")

# %%
# Traces export to CSV with exact round-trip precision.
trace.to_csv(OUTPUT_DIR / "04_trace_10kHz.csv")
