"""Flight-log CSV ingestion and export.

Schema (version 1), one header row then one row per frame:

    t,p,q,dx,dy,rpm,coll,thr,amps,volts,tas[,pdot,qdot]

Rate columns may carry a unit tag, e.g. ``p[deg/s]`` or ``pdot[deg/s^2]``;
degrees are converted to radians on ingest.  Optional columns may be left
empty, which reads as NaN.  The trailing ``pdot,qdot`` pair holds measured
angular accelerations when available.
"""

from __future__ import annotations

import csv
import math
import re
from pathlib import Path

import numpy as np

from .csvutil import write_csv
from .errors import NonMonotoneTime, SchemaMismatch
from .sysid import FlightLog

SCHEMA = ("t", "p", "q", "dx", "dy", "rpm", "coll", "thr", "amps", "volts", "tas")
ACCEL_COLUMNS = ("pdot", "qdot")
_FIELD = {"t": "t", "p": "p", "q": "q", "dx": "delta_x", "dy": "delta_y", "rpm": "rpm",
          "coll": "collective_cmd", "thr": "throttle", "amps": "current", "volts": "voltage",
          "tas": "airspeed"}
_REQUIRED = ("t", "p", "q", "dx", "dy")
_ANGULAR = ("p", "q", "pdot", "qdot")
_UNITS = {"rad/s": 1.0, "deg/s": math.pi / 180.0,
          "rad/s^2": 1.0, "deg/s^2": math.pi / 180.0}
_TAG = re.compile(r"^\s*([A-Za-z_]+)\s*(?:\[\s*([^\]]+?)\s*\])?\s*$")


def _parse_header(row: list[str]) -> tuple[list[str], list[float]]:
    names, scales = [], []
    for cell in row:
        m = _TAG.match(cell)
        if not m:
            raise SchemaMismatch(f"unreadable header cell {cell!r}")
        name, unit = m.group(1), m.group(2)
        scale = 1.0
        if unit is not None:
            if name not in _ANGULAR or unit not in _UNITS:
                raise SchemaMismatch(f"unsupported unit {unit!r} on column {name!r}")
            scale = _UNITS[unit]
        names.append(name)
        scales.append(scale)
    if tuple(names) not in (SCHEMA, SCHEMA + ACCEL_COLUMNS):
        raise SchemaMismatch(
            f"header {','.join(names)} does not match {','.join(SCHEMA)}[,pdot,qdot]")
    return names, scales


def ingest_log(path) -> FlightLog:
    """Read and validate a log CSV; rates come back in rad/s."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(c.strip() for c in header):
            raise SchemaMismatch(f"{path}: empty file")
        names, scales = _parse_header(header)
        rows = []
        for row in reader:
            if not row or not any(c.strip() for c in row):
                continue
            if len(row) != len(names):
                raise SchemaMismatch(
                    f"{path}:{reader.line_num}: expected {len(names)} fields, got {len(row)}")
            vals = []
            for name, cell in zip(names, row):
                cell = cell.strip()
                if cell == "":
                    if name in _REQUIRED:
                        raise SchemaMismatch(f"{path}:{reader.line_num}: column {name} is empty")
                    vals.append(math.nan)
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise SchemaMismatch(
                        f"{path}:{reader.line_num}: {name}={cell!r} is not a number") from None
            rows.append((reader.line_num, vals))
    if not rows:
        raise SchemaMismatch(f"{path}: no data rows")

    data = np.array([v for _, v in rows], dtype=float) * np.array(scales)
    t = data[:, 0]
    for k in range(1, len(t)):
        if not t[k] > t[k - 1]:
            raise NonMonotoneTime(rows[k][0], f"{path}:{rows[k][0]}: time {t[k]} "
                                  f"does not increase past {t[k - 1]}")
    cols = {_FIELD[n]: data[:, i] for i, n in enumerate(names) if n in _FIELD}
    accel = {n: data[:, i] for i, n in enumerate(names) if n in ACCEL_COLUMNS}
    return FlightLog(cols, accel.get("pdot"), accel.get("qdot"))


def write_log(path, log: FlightLog, include_accel: bool | None = None) -> None:
    """Write a log in schema form (SI units, rates in rad/s)."""
    if include_accel is None:
        include_accel = log.p_dot is not None and log.q_dot is not None
    header = list(SCHEMA) + (list(ACCEL_COLUMNS) if include_accel else [])
    cols = [getattr(log, _FIELD[n]) for n in SCHEMA]
    if include_accel:
        cols += [log.p_dot, log.q_dot]

    def cell(x):
        return "" if math.isnan(x) else x

    write_csv(path, header, ([cell(float(c[i])) for c in cols] for i in range(len(log))))
