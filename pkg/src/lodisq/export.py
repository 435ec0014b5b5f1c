"""CSV and JSON serialization of point sets and reports."""

from __future__ import annotations

import csv
import io
import json
from typing import IO, Iterable, Sequence

import numpy as np

from .points import PointSet

SCHEMA_VERSION = 1


def fmt(x) -> str:
    """Decimal with 17 significant digits (round-trips a double)."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(rows: Iterable[Sequence], out: IO[str], header: Sequence[str] | None = None) -> None:
    writer = csv.writer(out, lineterminator="\n")
    if header:
        writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])


def csv_text(rows: Iterable[Sequence], header: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    write_csv(rows, buf, header)
    return buf.getvalue()


def read_points_csv(src: IO[str]) -> np.ndarray:
    """Rows of floats; a first row that does not parse is taken as a header."""
    rows = []
    for i, row in enumerate(csv.reader(src)):
        if not row or not any(cell.strip() for cell in row):
            continue
        try:
            rows.append([float(cell) for cell in row])
        except ValueError:
            if i == 0 and not rows:
                continue
            raise ValueError(f"malformed CSV row {i + 1}: {row}") from None
    if not rows:
        raise ValueError("CSV holds no points")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("CSV rows have differing lengths")
    return np.array(rows, dtype=np.float64)


def exact_json(points: PointSet) -> dict:
    """``(numerator, depth)`` per coordinate, each with minimal depth, over ``points.base``."""
    if not points.exact or points.base is None or points.denominator != _power(points.base, points.denominator):
        raise ValueError("exact export needs a point set over a power of its base")
    b = points.base
    depth0 = 0
    while b**depth0 < points.denominator:
        depth0 += 1
    rows = []
    for row in points.numerators:
        coords = []
        for x in row:
            x, depth = int(x), depth0
            while depth and x % b == 0:
                x //= b
                depth -= 1
            coords.append([x, depth if x else 0])
        rows.append(coords)
    return {"schema_version": SCHEMA_VERSION, "base": b, "dim": points.dim, "points": rows}


def _power(b: int, den: int) -> int:
    p = 1
    while p < den:
        p *= b
    return p


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)
