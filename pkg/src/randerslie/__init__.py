"""Automorphism and isometry groups of left-invariant Randers metrics on low-dimensional Lie groups."""

from .lie_core import LieAlgebra, bracket, catalog_get, validate_algebra
from .randers import (
    InnerProduct,
    RandersData,
    fundamental_tensor,
    fundamental_tensor_fd,
    randers_norm,
    scale_metric,
    validate_randers,
)
from .reports import Report
from .symmetry import (
    SubspaceBasis,
    derivation_space,
    exp_map,
    fixes_vector,
    infinitesimal_K,
    is_automorphism,
    is_orthogonal,
    randers_isometry_linear,
)

__version__ = "0.1.0"
