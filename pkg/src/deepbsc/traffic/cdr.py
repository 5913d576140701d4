"""Milan-style call-detail-record ingestion and spatio-temporal aggregation."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ArgumentError, ParseError, RangeError
from .series import TrafficSeries


@dataclass(frozen=True)
class CdrSchema:
    """Column positions (0-based) and grid-id range of a delimited CDR file.

    ``delimiter=None`` picks tab when the line contains one, comma otherwise.
    """

    grid_col: int = 0
    time_col: int = 1
    value_col: int = 2
    delimiter: str | None = None
    grid_base: int = 1
    n_grids: int = 10000
    header: bool = False


# squareid, timeinterval, countrycode, smsin, smsout, callin, callout, internet
MILAN_SCHEMA = CdrSchema(grid_col=0, time_col=1, value_col=7, delimiter="\t")


@dataclass(frozen=True)
class CdrRecords:
    cell: np.ndarray  # zero-based micro-grid index
    time_ms: np.ndarray
    value: np.ndarray

    def __len__(self):
        return len(self.cell)

    @property
    def total(self):
        return float(self.value.sum())


def parse_line(line, schema, lineno=None):
    delim = schema.delimiter or ("\t" if "\t" in line else ",")
    fields = line.rstrip("\r\n").split(delim)
    need = max(schema.grid_col, schema.time_col, schema.value_col)
    if len(fields) <= need:
        # absent trailing fields mean an absent measurement only for the value column
        if len(fields) <= max(schema.grid_col, schema.time_col):
            raise ParseError(f"expected at least {need + 1} fields, got {len(fields)}", lineno)
        fields = fields + [""] * (need + 1 - len(fields))
    try:
        grid = int(fields[schema.grid_col])
        t = int(float(fields[schema.time_col]))
        raw = fields[schema.value_col].strip()
        value = float(raw) if raw else 0.0
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None
    if not np.isfinite(value) or value < 0:
        raise ParseError(f"invalid traffic value {value}", lineno)
    if not schema.grid_base <= grid < schema.grid_base + schema.n_grids:
        raise RangeError(f"line {lineno}: unknown grid id {grid}")
    return grid, t, value


def load_cdr(path, schema=CdrSchema()):
    """Parse a delimited CDR file into arrays; missing values count as zero traffic."""
    cells, times, values = [], [], []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if schema.header and lineno == 1:
                continue
            if not line.strip():
                continue
            grid, t, v = parse_line(line, schema, lineno)
            cells.append(grid - schema.grid_base)
            times.append(t)
            values.append(v)
    return CdrRecords(
        np.array(cells, dtype=np.int64), np.array(times, dtype=np.int64), np.array(values, dtype=np.float64)
    )


def aggregate(
    records,
    micro_shape=(100, 100),
    spatial_factor=10,
    temporal_factor=3,
    source_slot_minutes=10,
    start_ms=None,
    n_source_slots=None,
):
    """Sum records into coarse grid cells and coarse time slots.

    Micro-grid ``cell`` maps to ``(cell // cols, cell % cols)``. The time range
    defaults to the span of the records; a trailing partial window is kept.
    """
    rows, cols = micro_shape
    if rows % spatial_factor or cols % spatial_factor:
        raise ArgumentError(f"micro grid {micro_shape} not divisible by {spatial_factor}")
    if temporal_factor < 1:
        raise ArgumentError("temporal factor must be at least 1")
    if len(records) == 0:
        raise ArgumentError("no records to aggregate")
    if (records.cell < 0).any() or (records.cell >= rows * cols).any():
        raise RangeError("record outside the micro grid")
    slot_ms = source_slot_minutes * 60_000
    if start_ms is None:
        start_ms = int(records.time_ms.min())
    src = (records.time_ms - start_ms) // slot_ms
    if n_source_slots is None:
        n_source_slots = int(src.max()) + 1
    if (records.time_ms < start_ms).any() or (src >= n_source_slots).any():
        raise RangeError("record outside the declared time range")
    T = -(-n_source_slots // temporal_factor)
    out = np.zeros((T, rows // spatial_factor, cols // spatial_factor))
    gx = (records.cell // cols) // spatial_factor
    gy = (records.cell % cols) // spatial_factor
    np.add.at(out, (src // temporal_factor, gx, gy), records.value)
    return TrafficSeries(
        out,
        start_slot=int(start_ms // (slot_ms * temporal_factor)),
        slot_minutes=source_slot_minutes * temporal_factor,
    )
