"""Escape rates, Schrödinger subdivisions and exact simulation of continuous-time chains on weighted graphs."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("escape-lab")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.0.0"

from .errors import *  # noqa: F401,F403
from .graph import (  # noqa: F401
    AdaptedWeight,
    PathMetric,
    Sub,
    WeightedGraph,
    ball_and_volume,
    build_graph,
    default_adapted_weight,
    formal_laplacian,
    shortest_path_metric,
    verify_adapted,
)
from .families import FamilySpec, classify_family, make_family  # noqa: F401
from .rate import RateFunction, conservativeness_test, psi, psi_inverse, volume_profile  # noqa: F401
from .modify import design_subdivision, modify_region, subdivide, uniform_plan  # noqa: F401
from .schrodinger import build_schrodinger_pair, schrodinger_constants, verify_supersolution  # noqa: F401
from .ctmc import simulate_trajectory, time_change, local_time  # noqa: F401
