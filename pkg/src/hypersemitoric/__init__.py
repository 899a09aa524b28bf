"""Numerical laboratory for the perturbed toric family ``F_t = (J, H_t)`` on the octagon manifold.

Modules
-------
polygon
    Rational polygons, the Delzant test and the standard octagon.
ambient
    The constrained C^8 model: observables, brackets, rank of ``dF_t``.
reduced
    Closed form of ``H_t`` on the reduced spheres ``M_j`` and its critical points.
levelset
    Marching-squares level sets on ``M_j``.
classify
    Stack counts, period labels and bouquet graphs of leaves.
bifurcation
    Critical-value curves, cusps and the unfolded diagram.
scan
    Parameter scans for stacked-torus witnesses.
verify
    The acceptance checks, runnable from the command line.
export
    SVG, JSON and CSV writers.
cli
    ``hypersemitoric {verify,bifdiag,fiber,bouquet,scan}``.
"""
from .errors import ConfigError, DomainError, MalformedPolygonError, PoleError
from .polygon import DelzantPolygon, make_octagon, verify_delzant
from .ambient import PerturbationParams, dFt_rank, eval_observables, sample_fiber_point
from .reduced import critical_points_on_slice, level_intervals, reduced_H
from .levelset import level_set
from .classify import leaf_components, stack_count
from .bifurcation import critical_value_curves, unfolded_diagram

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "MalformedPolygonError",
    "PoleError",
    "DelzantPolygon",
    "make_octagon",
    "verify_delzant",
    "PerturbationParams",
    "dFt_rank",
    "eval_observables",
    "sample_fiber_point",
    "critical_points_on_slice",
    "level_intervals",
    "reduced_H",
    "level_set",
    "leaf_components",
    "stack_count",
    "critical_value_curves",
    "unfolded_diagram",
]
