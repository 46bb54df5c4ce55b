"""Report and series-file plumbing: atomic writes, digests, JSON assembly.

Series CSVs are written with shortest round-trip float formatting and LF
line endings, so a run with fixed seeds is byte-reproducible; every emitted
file lands in the report manifest with its SHA-256 digest.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from datetime import datetime, timezone

import numpy as np


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _format_cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_series_csv(path, header: list[str], columns: list) -> None:
    """Write parallel columns as a comma-separated series file."""
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise ValueError("header and column counts differ")
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(_format_cell(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


class RunReport:
    """Accumulates one run's results and emitted-file manifest."""

    def __init__(self, command: str, config: dict, out_dir):
        from . import __version__

        self.out_dir = str(out_dir)
        os.makedirs(self.out_dir, exist_ok=True)
        self.doc: dict = {
            "command": command,
            "version": __version__,
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "config": config,
            "results": {},
            "warnings": [],
            "manifest": [],
        }

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def add_series(self, name: str, header: list[str], columns: list) -> str:
        p = self.path(name)
        write_series_csv(p, header, columns)
        self._manifest(name)
        return p

    def add_file(self, name: str) -> None:
        """Record an already-written file in the manifest."""
        self._manifest(name)

    def _manifest(self, name: str) -> None:
        p = self.path(name)
        self.doc["manifest"].append(
            {"path": name, "sha256": sha256_of(p), "bytes": os.path.getsize(p)}
        )

    def warn(self, message: str) -> None:
        self.doc["warnings"].append(message)

    def write(self, name: str = "report.json") -> str:
        p = self.path(name)
        atomic_write_text(p, json.dumps(self.doc, indent=2, default=_jsonable) + "\n")
        return p


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if hasattr(obj, "__dict__"):
        return vars(obj)
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")
