"""FTvN systems: spectral maps with a von Neumann type max inequality.

Instances, axiom checks, centers, automorphisms, majorization, doubly
stochastic maps and reduced pairs, all on plain numpy arrays.
"""
from .core import (
    DEFAULT_TOL,
    CheckReport,
    LinearMap,
    System,
    check_axioms,
    commute,
    commute_report,
    lam,
    orbit_support,
    sublinearity_gap,
    witness_a3,
)
from .instances import InstanceSpec, make_system, system

__all__ = [
    "DEFAULT_TOL",
    "CheckReport",
    "InstanceSpec",
    "LinearMap",
    "System",
    "check_axioms",
    "commute",
    "commute_report",
    "lam",
    "make_system",
    "orbit_support",
    "sublinearity_gap",
    "system",
    "witness_a3",
]

__version__ = "0.1.0"
