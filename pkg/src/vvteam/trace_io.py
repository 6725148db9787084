"""Text file formats for parameters, stimuli and traces.

Numbers are written with 17 significant digits, enough to reproduce every
double exactly. Readers are strict: a malformed line is an error, never
skipped.

Parameter files hold ``name = value`` lines::

    # V-VTEAM testing device
    x_on = 1
    v_th = 1.8
    ...

Stimulus files are CSV with either a ``time_s,voltage_V`` header (uniform
samples starting at t = 0) or a ``duration_s,level_V`` header (constant
segments, expanded at a caller-supplied dt). Trace files are CSV with the
header ``time_s,voltage_V,current_A,state_x,resistance_ohm``.
"""
from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .model import PARAM_NAMES, ModelParams, validate_params
from .simulator import Stimulus, Trace, make_stimulus

TRACE_HEADER = "time_s,voltage_V,current_A,state_x,resistance_ohm"
UNIFORM_HEADER = "time_s,voltage_V"
SEGMENT_HEADER = "duration_s,level_V"
RETENTION_HEADER = "tau_s,retention_s"
HISTORY_HEADER = "iteration,error"

# Tolerated deviation of a time column from uniform spacing, relative to dt.
_UNIFORM_RTOL = 1e-6


class FormatError(ValueError):
    """Malformed or invalid file content."""


def fmt(value: float) -> str:
    return "%.17g" % value


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"{where}: cannot parse number {text.strip()!r}") from None
    if not math.isfinite(value):
        raise FormatError(f"{where}: value must be finite, got {text.strip()!r}")
    return value


def _assignments(path):
    """Yield ``(line_no, name, rhs)`` for every ``name = rhs`` line."""
    with open(path) as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            name, sep, rhs = line.partition("=")
            if not sep:
                raise FormatError(f"{path}:{line_no}: expected 'name = value', got {raw.strip()!r}")
            yield line_no, name.strip(), rhs.strip()


def read_params(path, validate: bool = True) -> ModelParams:
    """Parse a parameter file; by default also reject invalid parameter sets."""
    values: dict[str, float] = {}
    seen_at: dict[str, int] = {}
    for line_no, name, rhs in _assignments(path):
        where = f"{path}:{line_no}"
        if name not in PARAM_NAMES:
            raise FormatError(f"{where}: unknown parameter {name!r}")
        if name in values:
            raise FormatError(f"{where}: duplicate parameter {name!r} (first on line {seen_at[name]})")
        values[name] = _parse_float(rhs, where)
        seen_at[name] = line_no
    missing = [n for n in PARAM_NAMES if n not in values]
    if missing:
        raise FormatError(f"{path}: missing parameter(s) {', '.join(missing)}")
    p = ModelParams(**values)
    problems = validate_params(p) if validate else []
    if problems:
        raise FormatError(f"{path}: invalid parameters: " + "; ".join(problems))
    return p


def format_params(p: ModelParams) -> str:
    return "".join(f"{name} = {fmt(getattr(p, name))}\n" for name in PARAM_NAMES)


def write_params(p: ModelParams, path, comment: str | None = None) -> None:
    head = "".join(f"# {line}\n" for line in comment.splitlines()) if comment else ""
    atomic_write(path, head + format_params(p))


def read_bounds(path) -> dict[str, tuple[float, float]]:
    """Parse ``name = lower, upper`` lines."""
    bounds = {}
    for line_no, name, rhs in _assignments(path):
        where = f"{path}:{line_no}"
        if name in bounds:
            raise FormatError(f"{where}: duplicate bounds for {name!r}")
        parts = rhs.split(",")
        if len(parts) != 2:
            raise FormatError(f"{where}: expected 'name = lower, upper'")
        lo, hi = (_parse_float(s, where) for s in parts)
        if not lo < hi:
            raise FormatError(f"{where}: lower bound must be below upper bound for {name!r}")
        bounds[name] = (lo, hi)
    return bounds


def _read_csv(path, headers):
    """Return ``(header, rows)`` where rows is a 2-D float array."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    header = lines[0].strip()
    if header not in headers:
        raise FormatError(f"{path}:1: unknown header {header!r}; expected one of {list(headers)}")
    ncol = header.count(",") + 1
    rows = []
    for line_no, line in enumerate(lines[1:], 2):
        where = f"{path}:{line_no}"
        cells = line.split(",")
        if len(cells) != ncol:
            raise FormatError(f"{where}: expected {ncol} columns, got {len(cells)}")
        rows.append([_parse_float(c, where) for c in cells])
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return header, np.array(rows, dtype=float)


def _check_uniform(path, t: np.ndarray) -> float:
    if t.size < 2:
        raise FormatError(f"{path}: need at least 2 samples to fix the time step")
    dt = float(t[1] - t[0])
    if not dt > 0:
        raise FormatError(f"{path}: time must be strictly increasing")
    expected = t[0] + np.arange(t.size) * dt
    bad = np.flatnonzero(np.abs(t - expected) > _UNIFORM_RTOL * dt)
    if bad.size:
        raise FormatError(f"{path}:{bad[0] + 2}: nonuniform time base (expected spacing {fmt(dt)})")
    return dt


def read_stimulus(path, dt: float | None = None) -> Stimulus:
    header, rows = _read_csv(path, (UNIFORM_HEADER, SEGMENT_HEADER))
    if header == SEGMENT_HEADER:
        if dt is None:
            raise FormatError(f"{path}: segment-form stimulus needs a time step (dt)")
        try:
            return make_stimulus(map(tuple, rows), dt)
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from None
    if rows[0, 0] != 0:
        raise FormatError(f"{path}:2: uniform stimulus must start at time 0")
    file_dt = _check_uniform(path, rows[:, 0])
    if dt is not None and abs(file_dt - dt) > _UNIFORM_RTOL * dt:
        raise FormatError(f"{path}: file time step {fmt(file_dt)} differs from requested dt {fmt(dt)}")
    return Stimulus(file_dt, rows[:, 1])


def format_stimulus(stim: Stimulus) -> str:
    lines = [UNIFORM_HEADER]
    lines += [f"{fmt(t)},{fmt(v)}" for t, v in zip(stim.times, stim.samples)]
    return "\n".join(lines) + "\n"


def write_stimulus(stim: Stimulus, path) -> None:
    atomic_write(path, format_stimulus(stim))


def write_segments(segments, path) -> None:
    lines = [SEGMENT_HEADER] + [f"{fmt(d)},{fmt(v)}" for d, v in segments]
    atomic_write(path, "\n".join(lines) + "\n")


def read_trace(path) -> Trace:
    _, rows = _read_csv(path, (TRACE_HEADER,))
    if rows.shape[0] > 1:
        _check_uniform(path, rows[:, 0])
    return Trace(*rows.T.copy())


def format_trace(trace: Trace) -> str:
    lines = [TRACE_HEADER]
    lines += [",".join(map(fmt, row)) for row in trace.columns()]
    return "\n".join(lines) + "\n"


def write_trace(trace: Trace, path) -> None:
    atomic_write(path, format_trace(trace))


def format_retention(rows) -> str:
    lines = [RETENTION_HEADER]
    for tau, retention in rows:
        lines.append(f"{fmt(tau)},{retention if isinstance(retention, str) else fmt(retention)}")
    return "\n".join(lines) + "\n"


def format_history(history) -> str:
    return "\n".join([HISTORY_HEADER] + [f"{i},{fmt(e)}" for i, e in history]) + "\n"
