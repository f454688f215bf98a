"""Sampling-frequency windows that keep the phase margin inside a target band.

For a fixed load and DAC LSB the phase margin falls monotonically as the
sampling frequency rises, so each band edge is found by bisection on
``log(fs)``. Since the margin depends only on ``gm R_WE`` and ``Ts/tau``,
scaling the electrode time constant by ten scales both window edges by a
tenth.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .electrode_model import ElectrodeLoad
from .linear_analysis import LoopConfig, NoCrossoverError, open_loop_tf, phase_margin

FS_SEARCH_MIN = 1e-3
FS_SEARCH_MAX = 1e9

TABLE_COLUMNS = ("i_meas_nA", "r_we_Mohm", "c_we_nF", "fs_low_Hz", "fs_high_Hz",
                 "pm_high_deg", "pm_low_deg")

#: Load rows of the recommended-operating-conditions table: (I_meas, R_WE, C_WE)
#: with their phase-margin bands (lower edge, upper edge) in degrees.
REFERENCE_ROWS = (
    ((10e-9, 60e6, 0.1e-9), (20.4, 29.2)),
    ((10e-9, 60e6, 1e-9), (20.4, 29.2)),
    ((10e-9, 60e6, 10e-9), (20.4, 29.2)),
    ((50e-9, 12e6, 0.1e-9), (20.8, 31.3)),
    ((50e-9, 12e6, 1e-9), (20.8, 31.3)),
    ((50e-9, 12e6, 10e-9), (20.8, 31.3)),
)

#: Printed sampling-frequency windows for REFERENCE_ROWS, Hz.
REFERENCE_FS_WINDOWS = (
    (150.0, 350.0), (15.0, 35.0), (1.5, 3.5),
    (17e3, 40e3), (1.7e3, 4e3), (170.0, 400.0),
)

#: DAC setting the table was computed for.
REFERENCE_CONFIG = dict(i_lsb=10e-9, dac_bits=10, v_ref=0.6, v_dd=1.2)


class TargetUnreachableError(ValueError):
    """No sampling frequency in the search range attains the requested margin."""


@dataclass(frozen=True)
class OperatingWindow:
    load: ElectrodeLoad
    measured_current: float
    fs_low: float
    fs_high: float
    pm_at_fs_low: float
    pm_at_fs_high: float


@dataclass(frozen=True)
class TableEntry:
    """One table row; ``window`` is None when the search failed."""

    i_meas: float
    r_we: float
    c_we: float
    window: Optional[OperatingWindow]
    error: Optional[str] = None


def pm_at(load: ElectrodeLoad, cfg: LoopConfig, fs: float) -> float:
    return phase_margin(open_loop_tf(load, cfg.with_fs(fs)))[0]


def _solve_fs(load, cfg, target, rel_tol):
    def pm(log_fs):
        try:
            return pm_at(load, cfg, math.exp(log_fs))
        except NoCrossoverError:
            return float("nan")

    a, b = math.log(FS_SEARCH_MIN), math.log(FS_SEARCH_MAX)
    pm_a, pm_b = pm(a), pm(b)
    if not (pm_a >= target >= pm_b):
        raise TargetUnreachableError(
            f"PM of {target:g} deg not reachable for fs in [{FS_SEARCH_MIN:g}, {FS_SEARCH_MAX:g}] Hz "
            f"(PM spans {pm_b:.4g} .. {pm_a:.4g} deg)")
    tol = math.log1p(rel_tol)
    while b - a > tol:
        mid = 0.5 * (a + b)
        if pm(mid) >= target:
            a = mid
        else:
            b = mid
    return math.exp(0.5 * (a + b))


def fs_range_for_pm(load: ElectrodeLoad, cfg_base: LoopConfig, pm_min: float, pm_max: float,
                    rel_tol: float = 1e-6) -> OperatingWindow:
    """Sampling-frequency window whose phase margin stays within ``[pm_min, pm_max]``.

    ``fs_low`` gives ``pm_max`` and ``fs_high`` gives ``pm_min``. ``cfg_base.fs``
    is ignored.
    """
    if not 0 < pm_min < pm_max < 90:
        raise ValueError(f"need 0 < pm_min < pm_max < 90, got {pm_min!r}, {pm_max!r}")
    gmr = cfg_base.gm_lsb * load.r_we
    if gmr >= 1:
        raise TargetUnreachableError(f"gm*R_WE = {gmr:.4g} >= 1: loop is unstable at every fs")
    fs_low = _solve_fs(load, cfg_base, pm_max, rel_tol)
    fs_high = _solve_fs(load, cfg_base, pm_min, rel_tol)
    return OperatingWindow(load=load, measured_current=cfg_base.v_ref / load.r_we,
                           fs_low=fs_low, fs_high=fs_high,
                           pm_at_fs_low=pm_at(load, cfg_base, fs_low),
                           pm_at_fs_high=pm_at(load, cfg_base, fs_high))


def table_report(rows: Sequence[tuple[float, float, float]], cfg_base: LoopConfig,
                 pm_band: Union[tuple[float, float], Sequence[tuple[float, float]]]) -> list[TableEntry]:
    """Operating windows for a list of ``(i_meas, r_we, c_we)`` rows.

    ``pm_band`` is either one ``(pm_min, pm_max)`` pair for all rows or one
    pair per row. A failing row is reported in its entry and does not stop
    the others.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to report")
    if len(pm_band) == 2 and all(isinstance(x, (int, float)) for x in pm_band):
        bands = [tuple(pm_band)] * len(rows)
    else:
        bands = [tuple(b) for b in pm_band]
        if len(bands) != len(rows):
            raise ValueError("need one pm band per row")
    out = []
    for (i_meas, r_we, c_we), (lo, hi) in zip(rows, bands):
        implied = cfg_base.v_ref / r_we
        if not math.isclose(implied, i_meas, rel_tol=0.05):
            warnings.warn(f"row I={i_meas:g} A, R={r_we:g} ohm: V_REF/R_WE = {implied:g} A differs "
                          "by more than 5%", stacklevel=2)
        try:
            win = fs_range_for_pm(ElectrodeLoad(r_we, c_we), cfg_base, lo, hi)
            out.append(TableEntry(i_meas, r_we, c_we, win))
        except (TargetUnreachableError, ValueError) as exc:
            out.append(TableEntry(i_meas, r_we, c_we, None, str(exc)))
    return out


def reference_table() -> list[TableEntry]:
    cfg = LoopConfig(fs=1.0, **REFERENCE_CONFIG)
    return table_report([r for r, _ in REFERENCE_ROWS], cfg, [b for _, b in REFERENCE_ROWS])


def _row_values(e: TableEntry):
    w = e.window
    base = (e.i_meas * 1e9, e.r_we * 1e-6, e.c_we * 1e9)
    if w is None:
        return base + (None,) * 4
    return base + (w.fs_low, w.fs_high, w.pm_at_fs_low, w.pm_at_fs_high)


def table_to_csv(entries: Sequence[TableEntry]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS + ("error",))
    for e in entries:
        w.writerow(tuple("" if x is None else repr(float(x)) for x in _row_values(e)) + (e.error or "",))
    return buf.getvalue()


def format_table(entries: Sequence[TableEntry]) -> str:
    """Aligned plain-text table in the column layout of the reference table."""
    head = ("I [nA]", "R_WE [MOhm]", "C_WE [nF]", "fs [Hz]", "PM [deg]")
    lines = []
    for e in entries:
        i, r, c, fl, fh, pl, ph = _row_values(e)
        if fl is None:
            fs_txt, pm_txt = "n/a", e.error or "n/a"
        else:
            fs_txt = f"{_eng(fl)}-{_eng(fh)}"
            pm_txt = f"{pl:.1f}-{ph:.1f}"
        lines.append((f"{i:g}", f"{r:g}", f"{c:g}", fs_txt, pm_txt))
    widths = [max(len(h), *(len(l[k]) for l in lines)) for k, h in enumerate(head)]
    fmt = " | ".join("{:>%d}" % w for w in widths)
    sep = "-+-".join("-" * w for w in widths)
    return "\n".join([fmt.format(*head), sep] + [fmt.format(*l) for l in lines])


def _eng(x: float) -> str:
    if x >= 1e3:
        return f"{x / 1e3:.3g}k"
    return f"{x:.3g}"
