"""Dynamics of dominant rational self-maps of the projective plane.

Exact polynomial arithmetic, degree growth and dynamical-degree estimates,
indeterminacy resolution by point blow-ups, towers over the plane with a
truncated projective-limit metric and shift operator, and topological-entropy
estimation from separated orbit sets.
"""

from .blowup import Atlas, LiftedSelfMap, NoLiftError, SurfPoint, find_indeterminacy_points
from .entropy import (
    BowenParams,
    EntropyReport,
    bowen_dist,
    entropy_rate,
    entropy_report,
    greedy_separated_set,
    separated_lift_check,
)
from .maps import (
    AlgebraicPointSet,
    OrbitUndefined,
    ProjPoint,
    RationalMap,
)
from .polynomials import HomoPoly, Poly, RatFunc, UniPoly, parse_poly, poly_gcd, resultant
from .scenarios import (
    build_guedj_tower,
    build_toy_tower,
    guedj_map,
    run_guedj_demo,
    run_toy_tower_demo,
    squaring_map,
)
from .tower import Tower, TowerLevel, TruncatedPoint, commutation_check, continuity_probe, identity_tower

__all__ = [
    "AlgebraicPointSet",
    "Atlas",
    "BowenParams",
    "EntropyReport",
    "HomoPoly",
    "LiftedSelfMap",
    "NoLiftError",
    "OrbitUndefined",
    "Poly",
    "ProjPoint",
    "RatFunc",
    "RationalMap",
    "SurfPoint",
    "Tower",
    "TowerLevel",
    "TruncatedPoint",
    "UniPoly",
    "bowen_dist",
    "build_guedj_tower",
    "build_toy_tower",
    "commutation_check",
    "continuity_probe",
    "entropy_rate",
    "entropy_report",
    "find_indeterminacy_points",
    "greedy_separated_set",
    "guedj_map",
    "identity_tower",
    "parse_poly",
    "poly_gcd",
    "resultant",
    "run_guedj_demo",
    "run_toy_tower_demo",
    "separated_lift_check",
    "squaring_map",
]

__version__ = "0.1.0"
