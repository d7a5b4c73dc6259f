"""System files, branch tables and run summaries.

System files are YAML mappings::

    M: [[1, 0], [0, 1]]      # required, row-major
    K: [[1.5, -1.5], [-1.5, 2.5]]
    C: [[...], [...]]        # optional, default zero
    w: [-1, 0]               # required
    kn: 1.5                  # required, > 0
    delta: 1.0               # required, >= 0
    f: [0.05, 0]             # optional forcing shape, default zero
    alpha: 1.0               # optional damping multiplier, default 0

Tables are comma-separated with a header row and every number written with
17 significant digits in scientific notation.
"""

import csv
import json
from importlib import resources
import math
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .model import MechanicalSystem

__all__ = ["load_system", "parse_system", "bundled_system_path", "write_table", "read_table", "write_summary"]

_REQUIRED = ("M", "K", "w", "kn", "delta")
_OPTIONAL = ("C", "f", "alpha")


def bundled_system_path(name="jiang"):
    return Path(str(resources.files("invcone") / "data" / f"{name}.yaml"))


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=where)
    if not math.isfinite(value):
        raise ConfigError("must be finite", field=where)
    return float(value)


def _vector(value, where, size=None):
    if not isinstance(value, (list, tuple)):
        raise ConfigError("expected a list of numbers", field=where)
    out = np.array([_number(v, f"{where}[{i}]") for i, v in enumerate(value)])
    if size is not None and out.shape[0] != size:
        raise ConfigError(f"expected {size} entries, got {out.shape[0]}", field=where)
    return out


def _matrix(value, where, size=None):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError("expected a non-empty list of rows", field=where)
    rows = [_vector(r, f"{where}[{i}]") for i, r in enumerate(value)]
    n = len(rows) if size is None else size
    if len(rows) != n:
        raise ConfigError(f"expected {n} rows, got {len(rows)}", field=where)
    for i, r in enumerate(rows):
        if r.shape[0] != n:
            raise ConfigError(f"expected {n} columns, got {r.shape[0]}", field=f"{where}[{i}]")
    return np.array(rows)


def parse_system(data, overrides=None):
    """Build a :class:`MechanicalSystem` from a decoded mapping.

    ``overrides`` may replace ``delta``, ``alpha`` or ``f_amp``; the latter
    rescales the forcing shape so that its largest entry has that magnitude
    (the first coordinate is loaded when the file has no forcing).
    """
    if not isinstance(data, dict):
        raise ConfigError("system file must be a mapping", field="<root>")
    unknown = sorted(set(data) - set(_REQUIRED) - set(_OPTIONAL))
    if unknown:
        raise ConfigError(f"unknown keys {unknown}", field="<root>")
    for key in _REQUIRED:
        if key not in data:
            raise ConfigError("missing required field", field=key)
    M = _matrix(data["M"], "M")
    N = M.shape[0]
    K = _matrix(data["K"], "K", N)
    C = _matrix(data["C"], "C", N) if data.get("C") is not None else None
    w = _vector(data["w"], "w", N)
    f = _vector(data["f"], "f", N) if data.get("f") is not None else np.zeros(N)
    kn = _number(data["kn"], "kn")
    delta = _number(data["delta"], "delta")
    alpha = _number(data["alpha"], "alpha") if data.get("alpha") is not None else 0.0
    overrides = overrides or {}
    if overrides.get("delta") is not None:
        delta = float(overrides["delta"])
    if overrides.get("alpha") is not None:
        alpha = float(overrides["alpha"])
    if overrides.get("f_amp") is not None:
        shape = f if np.any(f) else np.eye(N)[0]
        f = float(overrides["f_amp"]) * shape / np.max(np.abs(shape))
    return MechanicalSystem(M=M, K=K, w=w, kn=kn, delta=delta, C=C, f=f, alpha=alpha)


def load_system(path, overrides=None):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read system file: {exc}", field=str(path)) from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}", field=str(path)) from exc
    return parse_system(data, overrides)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.16e}"


def write_table(path, header, rows):
    """Write rows (sequences matching ``header``) as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            if len(r) != len(header):
                raise ValueError(f"row has {len(r)} fields, header has {len(header)}")
            wr.writerow([_fmt(v) for v in r])
    return path


def read_table(path):
    """Return ``(header, float array)`` of a table written by :func:`write_table`."""
    with Path(path).open(newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        rows = [[float(v) for v in r] for r in rd]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_summary(path, summary):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return path
