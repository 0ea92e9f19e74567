"""Metric fields whose components are given as expression strings."""

from __future__ import annotations

import numpy as np

from .. import expr as ex
from ..errors import ConfigError
from .metric import MetricField


def _component_table(g_spec, dim: int) -> list[list[ex.Expr]]:
    if not isinstance(g_spec, (list, tuple)) or len(g_spec) != dim:
        raise ConfigError(f"metric needs {dim} rows of component expressions")
    table: list[list[ex.Expr | None]] = [[None] * dim for _ in range(dim)]
    for i, row in enumerate(g_spec):
        if not isinstance(row, (list, tuple)):
            raise ConfigError(f"metric row {i + 1} is not a list")
        if len(row) == dim:
            cols = range(dim)
        elif len(row) == dim - i:
            cols = range(i, dim)  # upper triangle only
        else:
            raise ConfigError(
                f"metric row {i + 1} has {len(row)} entries; expected {dim} or {dim - i}"
            )
        for j, src in zip(cols, row):
            e = ex.parse(str(src), dim)
            if table[i][j] is not None and table[i][j] != e:
                raise ConfigError(f"metric component ({i + 1},{j + 1}) is not symmetric")
            table[i][j] = e
            if j != i:
                if table[j][i] is not None and table[j][i] != e:
                    raise ConfigError(f"metric component ({i + 1},{j + 1}) is not symmetric")
                table[j][i] = e
    return table  # type: ignore[return-value]


def expression_metric(g_spec, dim: int) -> MetricField:
    """Build a MetricField from row-major component strings.

    Rows may be complete or carry only the upper triangle (row i holding
    columns i..dim); the lower triangle is filled in by symmetry.
    """
    table = _component_table(g_spec, dim)

    def g(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape[:-1] + (dim, dim))
        for i in range(dim):
            for j in range(i, dim):
                v = ex.evaluate(table[i][j], x)
                out[..., i, j] = v
                out[..., j, i] = v
        return out

    sources = [[ex.to_source(table[i][j]) for j in range(dim)] for i in range(dim)]
    return MetricField(dim, g, source="expression", name="riemannian_expr", params={"g": sources})
