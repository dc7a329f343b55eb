"""Numerical verification of sharp fractional Hardy inequalities."""
from .constants import (ConvergenceError, FracParams, ParameterError, fs_constant, gamma_fn,
                        kappa, sphere_alpha_integral)
from .domains import (Ball, Box, ConvexUnion, ConvexityError, DomainError, HalfSpace, Interval,
                      IntervalUnion, OutsideDomainError, Polytope, domain_from_dict, load_domain,
                      slab)
from .energy import (EnergyResult, fullline_energy, gagliardo_direct, gagliardo_reduced,
                     lattice_energy, oneD_energy)
from .functions import (BumpSpec, GridFunction, HalfLineTrial, ResolutionError, SupportError,
                        halfline_sharpness_family, inversion_1d, sample_bump)
from .geometry import convex_weight, dir_dist, dist_to_boundary, m_weight, ray_intervals, width
from .hardy import (KindError, VerificationReport, WeightKind, fs_inequality_check, quotient,
                    remainder, sharpness_probe, verify)
from .sphere import SphereQuadrature, build_sphere_quadrature

__version__ = "0.1.0"

__all__ = [
    "Ball", "Box", "BumpSpec", "ConvergenceError", "ConvexUnion", "ConvexityError",
    "DomainError", "EnergyResult", "FracParams", "GridFunction", "HalfLineTrial", "HalfSpace",
    "Interval", "IntervalUnion", "KindError", "OutsideDomainError", "ParameterError",
    "Polytope", "ResolutionError", "SphereQuadrature", "SupportError", "VerificationReport",
    "WeightKind", "build_sphere_quadrature", "convex_weight", "dir_dist", "dist_to_boundary",
    "domain_from_dict", "fs_constant", "fs_inequality_check", "fullline_energy",
    "gagliardo_direct", "gagliardo_reduced", "gamma_fn", "halfline_sharpness_family",
    "inversion_1d", "kappa", "lattice_energy", "load_domain", "m_weight", "oneD_energy",
    "quotient", "ray_intervals", "remainder", "sample_bump", "sharpness_probe", "slab",
    "sphere_alpha_integral", "verify", "width",
]
