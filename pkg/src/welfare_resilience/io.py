"""Reading long-format panel files and writing result tables.

Input files are comma-separated with a header row:

* panel: ``unit,time,value``
* aliases: ``source_unit,target_unit,time_from,time_to``
* covariates: ``unit,name,value``

An alias row copies the source unit's observations with
``time_from <= time <= time_to`` into the target unit (e.g. a dissolved
state's history into each successor). Alias sources are dropped from the
panel afterwards unless ``keep_alias_sources=True``.
"""

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from .exceptions import DuplicateObservation, NonContiguousSeries, ParseError, SeriesTooShort
from .series import LevelSeries

__all__ = [
    "Alias",
    "PanelInput",
    "ingest",
    "read_panel",
    "read_aliases",
    "read_covariates",
    "format_number",
    "to_csv",
    "to_json",
    "write_atomic",
    "MAX_INTERPOLATED_GAP",
]

MAX_INTERPOLATED_GAP = 2

PANEL_HEADER = ("unit", "time", "value")
ALIAS_HEADER = ("source_unit", "target_unit", "time_from", "time_to")
COVARIATE_HEADER = ("unit", "name", "value")


@dataclass(frozen=True)
class Alias:
    source_unit: str
    target_unit: str
    time_from: int
    time_to: int


@dataclass(frozen=True)
class PanelInput:
    series: Dict[str, LevelSeries]
    covariates: Dict[str, Dict[str, float]] = field(default_factory=dict)
    aliases: Tuple[Alias, ...] = ()
    interpolated: Dict[str, Tuple[int, ...]] = field(default_factory=dict)
    # units that cannot form a series (a single observation), with the reason
    invalid: Dict[str, str] = field(default_factory=dict)

    @property
    def unit_ids(self):
        return sorted(set(self.series) | set(self.invalid))


def _rows(path, header):
    """Yield ``(line_number, record)`` for each data row, checking the header."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            found = next(reader)
        except StopIteration:
            raise ParseError("file is empty", path=path, line=1) from None
        found = tuple(h.strip() for h in found)
        if found != header:
            raise ParseError(f"expected header {','.join(header)}, got {','.join(found)}", path=path, line=1)
        for record in reader:
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, got {len(record)}", path=path, line=reader.line_num
                )
            yield reader.line_num, dict(zip(header, (c.strip() for c in record)))


def _parse(kind, text, path, line, column):
    try:
        value = kind(text)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as {kind.__name__}", path, line, column) from None
    if kind is float and not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r}", path, line, column)
    return value


def read_panel(path):
    """Observations as ``{unit: {time: value}}``; blank values count as missing."""
    data: Dict[str, Dict[int, float]] = {}
    for line, rec in _rows(path, PANEL_HEADER):
        unit = rec["unit"]
        if not unit:
            raise ParseError("empty unit id", path, line, "unit")
        t = _parse(int, rec["time"], path, line, "time")
        obs = data.setdefault(unit, {})
        if t in obs:
            raise DuplicateObservation(f"{path}:{line}: duplicate observation for {unit!r} at {t}")
        if rec["value"] == "":
            obs[t] = math.nan
            continue
        obs[t] = _parse(float, rec["value"], path, line, "value")
    return data


def read_aliases(path):
    out = []
    for line, rec in _rows(path, ALIAS_HEADER):
        lo = _parse(int, rec["time_from"], path, line, "time_from")
        hi = _parse(int, rec["time_to"], path, line, "time_to")
        if lo > hi:
            raise ParseError(f"time_from {lo} is after time_to {hi}", path, line, "time_from")
        out.append(Alias(rec["source_unit"], rec["target_unit"], lo, hi))
    return tuple(out)


def read_covariates(path):
    out: Dict[str, Dict[str, float]] = {}
    for line, rec in _rows(path, COVARIATE_HEADER):
        row = out.setdefault(rec["unit"], {})
        if rec["name"] in row:
            raise DuplicateObservation(f"{path}:{line}: duplicate covariate {rec['name']!r} for {rec['unit']!r}")
        if rec["value"] == "":
            continue
        row[rec["name"]] = _parse(float, rec["value"], path, line, "value")
    return out


def _splice(data, aliases):
    spliced = {u: dict(obs) for u, obs in data.items()}
    for a in aliases:
        source = data.get(a.source_unit)
        if source is None:
            raise ParseError(f"alias source {a.source_unit!r} is not in the panel")
        target = spliced.setdefault(a.target_unit, {})
        for t, v in source.items():
            if a.time_from <= t <= a.time_to:
                if t in target:
                    raise DuplicateObservation(
                        f"alias {a.source_unit!r} -> {a.target_unit!r} overlaps existing observation at {t}"
                    )
                target[t] = v
    return spliced


def _contiguous(unit, obs, interpolate):
    """Sorted (times, values) with gaps filled or rejected."""
    present = {t: v for t, v in obs.items() if not math.isnan(v)}
    if not present:
        raise NonContiguousSeries(f"unit {unit!r} has no observed values")
    times = sorted(present)
    filled = []
    for a, b in zip(times[:-1], times[1:]):
        missing = b - a - 1
        if missing == 0:
            continue
        if not interpolate or missing > MAX_INTERPOLATED_GAP:
            raise NonContiguousSeries(
                f"unit {unit!r} has a gap of {missing} period(s) between {a} and {b}"
                + ("" if interpolate else "; pass interpolation to bridge short gaps")
            )
        filled.extend(range(a + 1, b))
    full = np.arange(times[0], times[-1] + 1)
    values = np.interp(full, times, [present[t] for t in times])
    return full, values, tuple(filled)


def ingest(panel_file, alias_file=None, covariate_file=None, interpolate=False, keep_alias_sources=False):
    """Load a panel into per-unit :class:`LevelSeries`.

    Gaps of at most two periods are linearly interpolated when
    ``interpolate`` is set; longer gaps always raise
    :class:`NonContiguousSeries`.
    """
    data = read_panel(panel_file)
    aliases = read_aliases(alias_file) if alias_file else ()
    if aliases:
        data = _splice(data, aliases)
        if not keep_alias_sources:
            targets = {a.target_unit for a in aliases}
            for src in {a.source_unit for a in aliases} - targets:
                data.pop(src, None)
    series = {}
    interpolated = {}
    invalid = {}
    for unit in sorted(data):
        times, values, filled = _contiguous(unit, data[unit], interpolate)
        try:
            series[unit] = LevelSeries(unit, times, values)
        except SeriesTooShort as exc:
            invalid[unit] = str(exc)
            continue
        if filled:
            interpolated[unit] = filled
    covariates = read_covariates(covariate_file) if covariate_file else {}
    return PanelInput(series, covariates, aliases, interpolated, invalid)


def format_number(x):
    """Ten significant digits; ``inf``/``-inf``/``nan`` spelled out."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.10g}"
    return str(x)


def to_csv(columns, rows):
    """Render rows (mappings) as CSV text with LF line endings."""
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for c in columns:
            cell = format_number(row.get(c))
            if any(ch in cell for ch in ',"\n'):
                cell = '"' + cell.replace('"', '""') + '"'
            cells.append(cell)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.10g}")
    return x


def to_json(columns, rows):
    records = [{c: _json_value(row.get(c)) for c in columns} for row in rows]
    return json.dumps(records, indent=2, allow_nan=False) + "\n"


def write_atomic(directory, files):
    """Write ``{filename: text}`` so that either every file appears or none changes."""
    os.makedirs(directory, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=directory)
            staged.append((tmp, os.path.join(directory, name)))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)
    return [final for _, final in staged]
