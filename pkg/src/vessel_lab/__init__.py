"""Boussinesq solutions from finite-dimensional vessel realizations, with identity checks."""

from .evolution import Propagator, VesselState, propagate
from .params import ALPHA, canonical_parameters, commutant, phi
from .potentials import MomentLadder, q_p
from .realization import Realization, load, random_regular, random_symmetric, save, validate
from .solitons import soliton_classic, soliton_exp

__version__ = "0.1.0"

__all__ = [
    "ALPHA",
    "MomentLadder",
    "Propagator",
    "Realization",
    "VesselState",
    "canonical_parameters",
    "commutant",
    "load",
    "phi",
    "propagate",
    "q_p",
    "random_regular",
    "random_symmetric",
    "save",
    "soliton_classic",
    "soliton_exp",
    "validate",
]
