"""Measurement CSV: ``# schema=1`` on line 1, a header on line 2, then rows.

The first header column names the x quantity and its unit
(``pump_power_w``, ``attenuated_power_w`` or ``flux_per_s``). Counts are
totals over ``duration_s``; ``dark_counts`` is the background expected in
the same window. ``singles_a`` / ``singles_b`` are optional count totals
used by the Klyshko analysis.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .errors import ValidationError

SCHEMA_LINE = "# schema=1"
X_KINDS = {
    "pump_power_w": ("pump power", "W"),
    "attenuated_power_w": ("attenuated power", "W"),
    "flux_per_s": ("flux", "s^-1"),
}
REQUIRED = ("counts", "duration_s", "attenuation", "dark_counts")
OPTIONAL = ("singles_a", "singles_b")
ALIASES = {"coincidences": "counts"}


@dataclass(frozen=True)
class Row:
    x: float
    counts: float
    duration_s: float
    attenuation: float = 1.0
    dark_counts: float = 0.0
    singles_a: float | None = None
    singles_b: float | None = None


@dataclass(frozen=True)
class MeasurementTable:
    x_kind: str
    rows: tuple

    @property
    def x_unit(self):
        return X_KINDS[self.x_kind][1]

    @property
    def has_singles(self):
        return bool(self.rows) and all(r.singles_a is not None and r.singles_b is not None
                                       for r in self.rows)


def _num(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError
    return v


def parse_table(text, source="<csv>"):
    lines = text.splitlines()
    if not lines or lines[0].strip() != SCHEMA_LINE:
        raise ValidationError([f"{source}: line 1: expected '{SCHEMA_LINE}'"])
    if len(lines) < 2:
        raise ValidationError([f"{source}: line 2: missing header"])
    reader = csv.reader(io.StringIO("\n".join(lines[1:])))
    header = [h.strip() for h in next(reader)]
    header = [ALIASES.get(h, h) for h in header]
    errors = []
    if not header or header[0] not in X_KINDS:
        errors.append(f"{source}: line 2: first column must be one of {', '.join(X_KINDS)}")
    for col in REQUIRED:
        if col not in header:
            errors.append(f"{source}: line 2: missing column {col!r}")
    for col in header[1:]:
        if col not in REQUIRED + OPTIONAL:
            errors.append(f"{source}: line 2: unknown column {col!r}")
    if len(set(header)) != len(header):
        errors.append(f"{source}: line 2: duplicate column")
    if errors:
        raise ValidationError(errors)

    rows = []
    for lineno, cells in enumerate(reader, start=3):
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            errors.append(f"{source}: line {lineno}: expected {len(header)} cells, got {len(cells)}")
            continue
        values, ok = {}, True
        for col, cell in zip(header, cells):
            try:
                values[col] = _num(cell.strip())
            except ValueError:
                errors.append(f"{source}: line {lineno}, column {col!r}: not a number: {cell!r}")
                ok = False
        if not ok:
            continue
        x = values.pop(header[0])
        checks = [(x > 0, header[0], "must be > 0"),
                  (values["duration_s"] > 0, "duration_s", "must be > 0"),
                  (0 < values["attenuation"] <= 1, "attenuation", "must lie in (0, 1]"),
                  (values["counts"] >= 0, "counts", "must be >= 0"),
                  (values["dark_counts"] >= 0, "dark_counts", "must be >= 0")]
        checks += [(values[c] >= 0, c, "must be >= 0") for c in OPTIONAL if c in values]
        for good, col, msg in checks:
            if not good:
                errors.append(f"{source}: line {lineno}, column {col!r}: {msg}")
                ok = False
        if ok:
            rows.append(Row(x, **values))
    if errors:
        raise ValidationError(errors)
    return MeasurementTable(header[0], tuple(rows))


def read_table(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_table(fh.read(), str(path))


def format_table(table):
    cols = [table.x_kind, *REQUIRED]
    if table.has_singles:
        cols += list(OPTIONAL)
    out = io.StringIO()
    out.write(SCHEMA_LINE + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(cols)
    for r in table.rows:
        vals = [r.x, r.counts, r.duration_s, r.attenuation, r.dark_counts]
        if table.has_singles:
            vals += [r.singles_a, r.singles_b]
        w.writerow([repr(float(v)) for v in vals])
    return out.getvalue()
