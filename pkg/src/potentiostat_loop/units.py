"""SI-prefix parsing and formatting for command-line values."""

from __future__ import annotations

import re

SI_PREFIXES = {
    "f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "μ": 1e-6,
    "m": 1e-3, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12,
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([a-zA-Zµμ]?)\s*$")


def parse_si(text) -> float:
    """Parse ``"60M"``, ``"125p"``, ``"1.5k"`` or a bare number into a float.

    Prefixes are case-sensitive (``m`` is milli, ``M`` is mega). A bare
    number is taken in base SI units.
    """
    if isinstance(text, (int, float)):
        return float(text)
    m = _NUMBER.match(str(text))
    if not m:
        raise ValueError(f"cannot parse {text!r} as a number with optional SI prefix")
    value, prefix = m.groups()
    if prefix and prefix not in SI_PREFIXES:
        raise ValueError(f"unknown SI prefix {prefix!r} in {text!r}")
    return float(value) * SI_PREFIXES.get(prefix, 1.0)


def format_si(x: float, digits: int = 4) -> str:
    if x == 0:
        return "0"
    ladder = [(p, s) for p, s in SI_PREFIXES.items() if p not in "µμ"] + [("", 1.0)]
    for prefix, scale in sorted(ladder, key=lambda kv: -kv[1]):
        if abs(x) >= scale:
            return f"{x / scale:.{digits}g}{prefix}"
    return f"{x:.{digits}g}"
