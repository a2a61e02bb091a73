"""Numerics for the 1/4 Cantor measure, its spectrum and the scaling unitary U."""

__version__ = "0.1.0"

from .basis import CoeffVector, GammaSet, expand, gamma_element, gamma_set, gram_matrix, parseval_defect
from .operators import (
    TruncationError,
    build_S,
    build_U,
    commutator_norms,
    eigen_residual,
    iterate_regression,
    spatial_obstruction,
)
from .sampling import IntervalQuery, empirical_char, hutchinson_residual, pushforward_mass, sample_batch
from .spectral import (
    LaurentPoly,
    atom_at_one,
    cesaro_average,
    herglotz_defect,
    isometry_residual,
    moments,
    pushforward_identity_residual,
)
from .transform import functional_eq_residual, mu_hat, mu_hat_values, truncation_depth

__all__ = [
    "CoeffVector", "GammaSet", "IntervalQuery", "LaurentPoly", "TruncationError",
    "atom_at_one", "build_S", "build_U", "cesaro_average", "commutator_norms",
    "eigen_residual", "empirical_char", "expand", "functional_eq_residual",
    "gamma_element", "gamma_set", "gram_matrix", "herglotz_defect",
    "hutchinson_residual", "isometry_residual", "iterate_regression", "moments",
    "mu_hat", "mu_hat_values", "parseval_defect", "pushforward_identity_residual",
    "pushforward_mass", "sample_batch", "spatial_obstruction", "truncation_depth",
]
