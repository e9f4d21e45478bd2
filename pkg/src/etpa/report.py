"""Key-value report format.

Machine form, one quantity per line after ``# schema=1``::

    key [unit] = value
    key [unit] = value +- uncertainty

Floats are written with 10 significant digits, integers plainly, booleans
as true/false.
Dimensionless quantities use the unit ``1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_LINE = "# schema=1"


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9e}"
    return str(v)


@dataclass
class Report:
    title: str
    entries: list = field(default_factory=list)  # (key, unit, value, err)
    notes: list = field(default_factory=list)

    def add(self, key, value, unit="1", err=None):
        self.entries.append((key, unit, value, err))

    def note(self, text):
        self.notes.append(text)

    def __getitem__(self, key):
        for k, _, v, _ in self.entries:
            if k == key:
                return v
        raise KeyError(key)

    def err(self, key):
        for k, _, _, e in self.entries:
            if k == key:
                return e
        raise KeyError(key)

    def keys(self):
        return [k for k, *_ in self.entries]

    def to_text(self):
        lines = [SCHEMA_LINE, f"# report={self.title}"]
        for key, unit, value, err in self.entries:
            line = f"{key} [{unit}] = {_fmt(value)}"
            if err is not None:
                line += f" +- {_fmt(err)}"
            lines.append(line)
        lines += [f"# note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"

    def to_human(self):
        width = max((len(k) for k, *_ in self.entries), default=0)
        out = [self.title, "-" * len(self.title)]
        for key, unit, value, err in self.entries:
            if isinstance(value, (float, np.floating)):
                s = f"{value:.4g}"
                if err is not None and math.isfinite(err):
                    s += f" ± {err:.2g}"
            else:
                s = _fmt(value)
            unit_s = "" if unit == "1" else f" {unit}"
            out.append(f"  {key:<{width}}  {s}{unit_s}")
        out += [f"  note: {n}" for n in self.notes]
        return "\n".join(out) + "\n"


def parse_report(text):
    """``{key: (value, err, unit)}`` from the machine form."""
    out = {}
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        lhs, rhs = line.split(" = ", 1)
        key, unit = lhs.split(" [", 1)
        unit = unit.rstrip("]")
        if " +- " in rhs:
            v, e = rhs.split(" +- ")
            out[key] = (_value(v), _value(e), unit)
        else:
            out[key] = (_value(rhs), None, unit)
    return out


def _value(s):
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s
