"""Text file formats for matrices, coordinates, spectra and run reports.

All floating-point values are written with 17 significant digits so a
write -> read -> write cycle is bit-identical.
"""

import json

import numpy as np


def _fmt(v):
    return f"{v:.17g}"


def write_matrix(path, a):
    """Dense matrix CSV with a one-line ``n=<dim>`` header."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    with open(path, "w") as fh:
        fh.write(f"n={a.shape[0]}\n")
        for row in a:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_matrix(path):
    with open(path) as fh:
        head = fh.readline().strip()
        if not head.startswith("n="):
            raise ValueError(f"{path}: missing 'n=<dim>' header")
        n = int(head[2:])
        rows = [ln.strip() for ln in fh if ln.strip()]
    if len(rows) != n:
        raise ValueError(f"{path}: expected {n} rows, found {len(rows)}")
    a = np.array([[float(v) for v in r.split(",")] for r in rows])
    if a.shape != (n, n):
        raise ValueError(f"{path}: expected {n}x{n} entries, got {a.shape}")
    return a


def write_coords(path, pts):
    """Plain CSV of point coordinates, one point per row."""
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2:
        raise ValueError("coordinates must be 2-d")
    with open(path, "w") as fh:
        for row in pts:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_coords(path):
    with open(path) as fh:
        rows = [ln.strip() for ln in fh if ln.strip()]
    if not rows:
        raise ValueError(f"{path}: empty coordinates file")
    return np.array([[float(v) for v in r.split(",")] for r in rows])


def write_spectrum(path, eigenvalues):
    """One eigenvalue per line, nonincreasing order expected."""
    with open(path, "w") as fh:
        for v in np.asarray(eigenvalues, dtype=float):
            fh.write(_fmt(v) + "\n")


def read_spectrum(path):
    with open(path) as fh:
        vals = [float(ln.strip()) for ln in fh if ln.strip()]
    return np.array(vals)


REPORT_KEYS = (
    "n",
    "m",
    "rank",
    "rho1",
    "rho2",
    "iterations",
    "R_p",
    "R_d",
    "edm_scores",
    "wall_seconds",
)


def write_report(path, report):
    """JSON run report with the stable key set :data:`REPORT_KEYS`."""
    missing = set(REPORT_KEYS) - set(report)
    extra = set(report) - set(REPORT_KEYS)
    if missing or extra:
        raise ValueError(f"report keys off-schema (missing {missing}, extra {extra})")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({k: report[k] for k in REPORT_KEYS}, fh, indent=2)
        fh.write("\n")


def read_report(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
