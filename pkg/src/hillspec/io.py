"""CSV readers and writers. Floats are written with 17 significant digits."""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .seqspace import CoeffSeq

__all__ = [
    "PotentialFormatError",
    "fmt",
    "write_potential",
    "ingest_potential",
    "write_matrix",
    "write_spectrum",
    "write_truncation",
    "write_localization",
    "write_asymptotics",
    "write_certificates",
    "write_rows",
]


class PotentialFormatError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if not isinstance(x, str) else x for x in row])
    return path


def write_potential(path, v: CoeffSeq) -> Path:
    return write_rows(path, ["k", "re", "im"], ((k, z.real, z.imag) for k, z in v))


def ingest_potential(path) -> CoeffSeq:
    """Read a ``k,re,im`` potential file; exact inverse of write_potential."""
    entries: dict[int, complex] = {}
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["k", "re", "im"]:
            raise PotentialFormatError(f"{path}: expected header 'k,re,im', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise PotentialFormatError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                k = int(row[0])
                re, im = float(row[1]), float(row[2])
            except ValueError as exc:
                raise PotentialFormatError(f"{path}:{lineno}: {exc}") from None
            if not (math.isfinite(re) and math.isfinite(im)):
                raise PotentialFormatError(f"{path}:{lineno}: non-finite coefficient")
            if k in entries:
                raise PotentialFormatError(f"{path}:{lineno}: duplicate index k={k}")
            entries[k] = complex(re, im)
    return CoeffSeq(entries)


def write_matrix(path, op) -> Path:
    """Debug dump of a TruncatedOperator, nonzero entries only."""
    return write_rows(path, ["k", "j", "re", "im"],
                      ((k, j, z.real, z.imag) for k, j, z in op.nonzero_entries()))


def write_spectrum(path, result, extra_meta: dict | None = None) -> tuple[Path, Path]:
    """``index,re,im,residual`` plus a ``<name>.meta`` key = value sidecar."""
    path = Path(path)
    write_rows(path, ["index", "re", "im", "residual"],
               ((i, z.real, z.imag, r) for i, (z, r) in
                enumerate(zip(result.eigenvalues.tolist(), result.residuals.tolist()))))
    meta = {
        "m": result.m,
        "K": result.K,
        "potential_digest": result.digest,
        "residual_tol": fmt(result.residual_tol),
        "tie_tol": fmt(result.tie_tol),
        "solver_path": result.path,
        **(extra_meta or {}),
    }
    side = path.with_suffix(".meta")
    side.write_text("".join(f"{k} = {v}\n" for k, v in meta.items()))
    return path, side


def write_truncation(path, study) -> Path:
    rows = []
    for row in study.rows:
        for i, z in enumerate(row.leading.tolist()):
            rows.append((row.K, i, z.real, z.imag, row.max_change))
    return write_rows(path, ["K", "index", "re", "im", "max_change"], rows)


def write_localization(path, report, summary_path) -> tuple[Path, Path]:
    write_rows(path, ["n", "dev_odd", "dev_even", "bound", "pass"],
               ((d.n, d.dev_odd, d.dev_even, d.bound, d.passed) for d in report.discs))
    write_rows(summary_path, ["cone_count", "expected", "M", "n0", "certified"],
               [(report.cone_count, report.expected_cone_count, report.M, report.n0,
                 report.certified)])
    return Path(path), Path(summary_path)


def write_asymptotics(path, ratios) -> Path:
    return write_rows(path, ["n", "ratio"], ratios)


def write_certificates(path, rows) -> Path:
    """Riesz-count rows: ``s,trace_re,trace_im,count,valid``."""
    return write_rows(path, ["s", "trace_re", "trace_im", "count", "valid"],
                      ((r.s, r.trace.real, r.trace.imag, r.count, r.valid) for r in rows))
