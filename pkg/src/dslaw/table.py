"""Firm tables: records of (firm_id, sales, labor) plus their log coordinates.

CSV schema (both directions): header exactly ``firm_id,Y,L``; one row per
firm; Y and L positive reals.  Values are written with shortest round-trip
float formatting, so write -> ingest reproduces them bit for bit.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllRowsRejectedError,
    EmptySourceError,
    MalformedHeaderError,
)
from .model import ReferenceScales

CSV_HEADER = "firm_id,Y,L"


@dataclass
class FirmTable:
    """Immutable columnar table of firms with derived log coordinates."""

    firm_id: np.ndarray
    sales: np.ndarray
    labor: np.ndarray
    scales: ReferenceScales = field(default_factory=ReferenceScales)
    rejected: int = 0

    def __post_init__(self):
        self.firm_id = np.asarray(self.firm_id, dtype=np.int64)
        self.sales = np.asarray(self.sales, dtype=float)
        self.labor = np.asarray(self.labor, dtype=float)
        if not (self.firm_id.size == self.sales.size == self.labor.size):
            raise ValueError("firm_id, sales, labor must have equal length")
        if self.sales.size and (
            not np.all(np.isfinite(self.sales))
            or not np.all(np.isfinite(self.labor))
            or np.any(self.sales <= 0)
            or np.any(self.labor <= 0)
        ):
            raise ValueError("sales and labor must be positive and finite")
        self.y = np.log(self.sales / self.scales.y0)
        self.l = np.log(self.labor / self.scales.l0)
        self.c = self.y - self.l
        for arr in (self.firm_id, self.sales, self.labor, self.y, self.l, self.c):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.sales.size

    def __len__(self) -> int:
        return self.n

    def with_scales(self, scales: ReferenceScales) -> "FirmTable":
        """Same records, log coordinates re-anchored to other scales."""
        return FirmTable(self.firm_id, self.sales, self.labor, scales, self.rejected)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            self.write_csv_to(fh)

    def write_csv_to(self, fh) -> None:
        fh.write(CSV_HEADER + "\n")
        for fid, sv, lv in zip(self.firm_id, self.sales, self.labor):
            fh.write(f"{int(fid)},{float(sv)!r},{float(lv)!r}\n")


def ingest_csv(source, scales: ReferenceScales | None = None) -> FirmTable:
    """Read a firm table, dropping and counting invalid rows.

    A row is rejected when it does not have exactly three fields, any field
    fails to parse, or Y/L are nonpositive or non-finite.  Raises
    MalformedHeaderError, EmptySourceError (no data rows at all), or
    AllRowsRejectedError.
    """
    scales = scales or ReferenceScales()
    if hasattr(source, "read"):
        return _ingest(source, scales, getattr(source, "name", "<stream>"))
    with open(source, "r", newline="") as fh:
        return _ingest(fh, scales, str(source))


def _ingest(fh: io.TextIOBase, scales: ReferenceScales, name: str) -> FirmTable:
    header = fh.readline()
    if header.strip() != CSV_HEADER:
        raise MalformedHeaderError(
            f"{name}: expected header {CSV_HEADER!r}, got {header.strip()!r}"
        )
    ids: list[int] = []
    sales: list[float] = []
    labor: list[float] = []
    total = 0
    rejected = 0
    for line in fh:
        line = line.strip()
        if not line:
            continue
        total += 1
        parts = line.split(",")
        if len(parts) != 3:
            rejected += 1
            continue
        try:
            fid = int(parts[0])
            sv = float(parts[1])
            lv = float(parts[2])
        except ValueError:
            rejected += 1
            continue
        if not (np.isfinite(sv) and np.isfinite(lv) and sv > 0 and lv > 0):
            rejected += 1
            continue
        ids.append(fid)
        sales.append(sv)
        labor.append(lv)
    if total == 0:
        raise EmptySourceError(f"{name}: no data rows")
    if not ids:
        raise AllRowsRejectedError(f"{name}: all {total} rows rejected")
    return FirmTable(
        np.array(ids, dtype=np.int64),
        np.array(sales, dtype=float),
        np.array(labor, dtype=float),
        scales,
        rejected=rejected,
    )
