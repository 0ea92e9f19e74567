"""Space configs, distance-matrix CSV files and the CLI output formats.

Reals are written with 17 significant digits, which round-trips every
double exactly.
"""

from __future__ import annotations

import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, TextIO

import numpy as np

from .errors import ConfigError
from .spaces import KINDS, SpaceSpec, make_space


def fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:
        return "0"  # also folds -0
    return f"{x:.17g}"


# ---------------------------------------------------------------- sigma tables

def save_sigma_table(path_or_file, table) -> None:
    t = np.asarray(table, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError("sigma table must be square")
    lines = [f"n={t.shape[0]}"] + [",".join(fmt(v) for v in row) for row in t]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        Path(path_or_file).write_text(text, encoding="utf-8", newline="\n")


def load_sigma_table(path_or_file) -> np.ndarray:
    """Parse a DistanceMatrixFile; validation of symmetry happens in FiniteSigmaSpace."""
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
        where = "<stream>"
    else:
        try:
            text = Path(path_or_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read sigma table {path_or_file}: {exc}") from exc
        where = str(path_or_file)
    rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not rows or not rows[0].startswith("n="):
        raise ConfigError(f"{where}: first line must be 'n=<count>'")
    try:
        n = int(rows[0][2:])
    except ValueError:
        raise ConfigError(f"{where}: bad point count {rows[0]!r}") from None
    if n < 1 or len(rows) - 1 != n:
        raise ConfigError(f"{where}: expected {n} data rows, found {len(rows) - 1}")
    out = np.empty((n, n))
    for i, line in enumerate(rows[1:]):
        cells = line.split(",")
        if len(cells) != n:
            raise ConfigError(f"{where}: row {i + 1} has {len(cells)} values, expected {n}")
        try:
            out[i] = [float(c) for c in cells]
        except ValueError as exc:
            raise ConfigError(f"{where}: row {i + 1}: {exc}") from None
    return out


# --------------------------------------------------------------------- configs

def spec_from_dict(doc: dict, base_dir: Path | None = None) -> SpaceSpec:
    if not isinstance(doc, dict):
        raise ConfigError("space config must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown space kind {kind!r}; expected one of {KINDS}")
    params: dict[str, Any] = dict(doc.get("params", {}))
    for key, value in doc.items():
        if key not in ("kind", "dim", "params"):
            params[key] = value
    if kind == "finite":
        if "table" not in params:
            src = params.pop("csv", None) or params.pop("file", None)
            if src is None:
                raise ConfigError("finite space needs 'table' or 'csv'")
            path = Path(src)
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            if not path.exists():
                raise ConfigError(f"sigma table file {path} does not exist")
            params["table"] = load_sigma_table(path)
        dim = None
    else:
        dim = doc.get("dim")
    spec = SpaceSpec(kind, dim, params)
    spec.validate()
    return spec


def load_space(path) -> Any:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read space config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    try:
        return make_space(spec_from_dict(doc, path.parent))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from exc


# --------------------------------------------------------------------- outputs

def _clean(obj):
    """Make an object JSON-safe: arrays to lists, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return 0.0 if v == 0.0 else v
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def write_rows(out: TextIO, header: Iterable[str], rows: Iterable[Iterable[float]]) -> None:
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")


def tube_csv(sample) -> str:
    dim = sample.points.shape[1] if sample.points.ndim == 2 else 0
    buf = io.StringIO()
    rows = (list(p) + [r] for p, r in zip(sample.points, sample.residuals))
    write_rows(buf, [f"x{i + 1}" for i in range(dim)] + ["residual"], rows)
    return buf.getvalue()


def geodesic_csv(path, length: float) -> str:
    buf = io.StringIO()
    rows = (np.concatenate([[t], x]) for t, x in zip(path.params, path.nodes))
    write_rows(buf, ["tau"] + [f"x{i + 1}" for i in range(path.nodes.shape[1])], rows)
    buf.write(f"# length={fmt(length)}\n")
    return buf.getvalue()


def read_geodesic_csv(text: str) -> tuple[np.ndarray, float]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    trailer = [ln for ln in lines if ln.startswith("# length=")]
    data = [ln for ln in lines[1:] if not ln.startswith("#")]
    arr = np.array([[float(c) for c in ln.split(",")] for ln in data])
    return arr, float(trailer[-1].split("=", 1)[1])


def read_tube_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    arr = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]]).reshape(len(lines) - 1, -1)
    return arr[:, :-1], arr[:, -1]
