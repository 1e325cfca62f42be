"""Weighted tent spaces on discretized metric measure spaces."""
from .atoms import Atom, AtomicDecomposition, Ball, atom_validate, covering_partition, decompose, normalized_atom
from .errors import ConfigurationError, ConvergenceError, DomainError
from .functionals import NormParams, carleson, lusin, tent_norm, whitney_average, z_norm, z_norm_dyadic
from .geometry import SpaceGrid, TimeLevels, build_region, delta_exponent, dyadic_whitney_cover
from .gridfn import GridFunction, HalfSpaceGrid, integrate, lq_norm, pairing, power, truncate, v_multiply
from .interp import (
    KCurve,
    WeightedCouple,
    gilbert_norms,
    k_curve,
    k_functional,
    k_functional_powered,
    t_z_equivalence,
    tent_interp_norms,
)

__version__ = "0.1.0"
