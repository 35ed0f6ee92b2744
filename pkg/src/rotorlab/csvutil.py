"""Deterministic CSV writing shared by all exporters."""

from __future__ import annotations

import csv
from typing import Iterable, Sequence


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool,)):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".12g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
