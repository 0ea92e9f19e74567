"""Curved metrics: geodesic world functions, sigma derivatives and collinearity cones."""

from .metric import (
    MetricField,
    christoffel,
    conformal_metric,
    constant_metric,
    metric_derivatives,
    punctured_plane_metric,
    sphere_metric,
)

__all__ = [
    "MetricField",
    "christoffel",
    "conformal_metric",
    "constant_metric",
    "metric_derivatives",
    "punctured_plane_metric",
    "sphere_metric",
]

from .cone import ConeResult, collinearity_cone
from .exprmetric import expression_metric
from .geodesic import GeodesicPath, SolverOptions, geodesic_between, riemannian_space, sigma_riemannian
from .tangent import TangentData, check_worldfunction_identities, sigma_derivatives, tangent_metric

__all__ += [
    "ConeResult",
    "GeodesicPath",
    "SolverOptions",
    "TangentData",
    "check_worldfunction_identities",
    "collinearity_cone",
    "expression_metric",
    "geodesic_between",
    "riemannian_space",
    "sigma_derivatives",
    "sigma_riemannian",
    "tangent_metric",
]
