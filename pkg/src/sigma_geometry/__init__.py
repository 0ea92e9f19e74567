"""Metric-only geometry built on the world function sigma = rho^2 / 2."""

from .core import (
    MAX_ORDER,
    FiniteSigmaSpace,
    GramResult,
    SigmaSpace,
    collinearity_residual,
    gamma,
    gamma_matrix,
    gram,
    hero_area,
    is_collinear,
    metric,
    scalar_product,
    sigma,
)
from .errors import *  # noqa: F401,F403
from .euclid import (
    Chart,
    EuclidReport,
    build_chart,
    check_conditions,
    covariant_coordinates,
    detect_dimension,
    euclid_report,
    reconstruct_sigma,
)
from .spaces import (
    IntervalKind,
    SpaceSpec,
    classify_interval,
    make_space,
    punctured_plane_sigma,
    space_from_metric,
)
from .tubes import (
    MembershipResult,
    TubeSample,
    broken_tube,
    cylinder_contains,
    ellipsoid_contains,
    sample_tube,
    segment_contains,
    sphere_contains,
    tube_contains,
    tube_through_point_contains,
)

__version__ = "0.1.0"
