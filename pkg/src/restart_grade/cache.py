"""On-disk cache for potential tables: one CSV + one JSON sidecar per table.

CSV layout is ``x1,...,xd,value`` with floats written by ``repr`` so that a
cache hit reproduces the computed table bit for bit.  The sidecar carries
``{d, kind, L, method, accuracy, sha256}``; a checksum mismatch or unreadable
file is treated as a miss and the table is recomputed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
from pathlib import Path

import numpy as np
from filelock import FileLock

from .lattice import LatticeField

log = logging.getLogger(__name__)

ENV_CACHE = "RESTART_GRADE_CACHE"


def default_cache_dir():
    return Path(os.environ.get(ENV_CACHE, "./cache"))


class TableCache:
    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()

    def _stem(self, d, kind, L, method):
        return self.directory / f"{kind}_d{d}_L{L}_{method}"

    def _lock(self):
        self.directory.mkdir(parents=True, exist_ok=True)
        return FileLock(str(self.directory / ".lock"))

    def load(self, d, kind, L, method):
        """Return ``(field, meta)`` or ``None`` on a miss or a corrupt entry."""
        stem = self._stem(d, kind, L, method)
        csv_path, meta_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
        if not (csv_path.exists() and meta_path.exists()):
            return None
        with self._lock():
            raw = csv_path.read_bytes()
            try:
                meta = json.loads(meta_path.read_text())
            except (OSError, ValueError):
                log.warning("unreadable cache metadata %s; recomputing", meta_path)
                return None
        if hashlib.sha256(raw).hexdigest() != meta.get("sha256"):
            log.warning("checksum mismatch for %s; recomputing", csv_path)
            return None
        try:
            rows = list(csv.reader(io.StringIO(raw.decode())))
            body = rows[1:]
            n = 2 * L + 1
            values = np.full((n,) * d, np.nan)
            for row in body:
                idx = tuple(int(c) + L for c in row[:d])
                values[idx] = float(row[d])
        except (ValueError, IndexError):
            log.warning("malformed cache file %s; recomputing", csv_path)
            return None
        if np.isnan(values).any():
            return None
        return LatticeField(values, L), meta

    def store(self, field, d, kind, L, method, accuracy):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(d)] + ["value"])
        for point, value in field.items():
            w.writerow([*point, repr(value)])
        raw = buf.getvalue().encode()
        meta = {
            "d": d,
            "kind": kind,
            "L": L,
            "method": method,
            "accuracy": accuracy,
            "sha256": hashlib.sha256(raw).hexdigest(),
        }
        stem = self._stem(d, kind, L, method)
        with self._lock():
            stem.with_suffix(".csv").write_bytes(raw)
            stem.with_suffix(".json").write_text(json.dumps(meta, indent=1))
        return stem
