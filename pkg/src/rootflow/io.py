"""Plain-text serialization of states, root sets, residual grids and reports.

Floats are written with ``repr`` (shortest round-trip form), so writing the
same data twice gives identical bytes and reading it back is exact.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .measures import RadialMeasure, measure_from_json
from .radial_dynamics import RadialState, radii_view

__all__ = [
    "load_measure",
    "write_state_csv",
    "read_state_csv",
    "write_real_roots_csv",
    "write_complex_csv",
    "read_complex_csv",
    "write_residual_csv",
    "write_json",
    "read_numeric_column",
]


def _num(x) -> str:
    return repr(float(x))


def load_measure(path) -> RadialMeasure:
    """Read a measure document (see :func:`rootflow.measures.measure_from_json`)."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read measure file {path}: {exc}") from None
    return measure_from_json(doc)


def write_state_csv(path, state: RadialState) -> None:
    """Columns ``j, log_root, radius``; the first line is ``# n=..,m=..,q=..,deriv_count=..``."""
    radii = radii_view(state).radii
    with open(path, "w", newline="") as fh:
        fh.write(f"# n={state.n},m={state.m},q={state.q},deriv_count={state.deriv_count}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "log_root", "radius"])
        for j, (u, r) in enumerate(zip(state.log_roots, radii), start=1):
            w.writerow([j, _num(u), _num(r)])


def read_state_csv(path) -> RadialState:
    with open(path, newline="") as fh:
        head = fh.readline().lstrip("#").strip()
        meta = dict(item.split("=") for item in head.split(","))
        rows = list(csv.DictReader(fh))
    u = np.array([float(r["log_root"]) for r in rows])
    if u.size != int(meta["n"]):
        raise ConfigError(f"{path}: header says n={meta['n']} but found {u.size} rows")
    return RadialState(u, int(meta["m"]), int(meta["q"]), int(meta["deriv_count"]))


def write_real_roots_csv(path, roots) -> None:
    """Distinct roots with multiplicities: columns ``index, root, multiplicity``."""
    vals, counts = np.unique(np.asarray(roots, dtype=float), return_counts=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "root", "multiplicity"])
        for i, (v, c) in enumerate(zip(vals, counts), start=1):
            w.writerow([i, _num(v), int(c)])


def write_complex_csv(path, roots) -> None:
    z = np.asarray(roots, dtype=complex).ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re", "im"])
        for x in z:
            w.writerow([_num(x.real), _num(x.imag)])


def read_complex_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([complex(float(r["re"]), float(r["im"])) for r in rows])


def write_residual_csv(path, rows) -> None:
    """``rows`` are ``(t, x, residual)`` triples."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "residual"])
        for t, x, r in rows:
            w.writerow([_num(t), _num(x), _num(r)])


def write_json(path, doc) -> None:
    """Sorted keys and a trailing newline, for byte-stable output."""
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# columns tried in order when reading a sample for the Levy distance
_SAMPLE_COLUMNS = ("radius", "root", "value", "x")


def read_numeric_column(path) -> np.ndarray:
    """One-dimensional sample from a CSV file.

    Lines starting with ``#`` are skipped. With a header, the first column
    named ``radius``, ``root``, ``value`` or ``x`` is used, else the last
    column; complex ``re, im`` files give moduli. Headerless files use
    their last column.
    """
    try:
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    rows = list(csv.reader(lines))
    if not rows:
        raise ConfigError(f"{path} holds no data")
    header = [c.strip() for c in rows[0]]
    try:
        [float(c) for c in header]
        has_header = False
    except ValueError:
        has_header = True
    body = rows[1:] if has_header else rows
    try:
        table = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from None
    if table.size == 0:
        raise ConfigError(f"{path} holds no data rows")
    if has_header:
        if header[:2] == ["re", "im"]:
            return np.hypot(table[:, 0], table[:, 1])
        for name in _SAMPLE_COLUMNS:
            if name in header:
                return table[:, header.index(name)]
    return table[:, -1]
