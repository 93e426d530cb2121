"""Spectral collocation for space-fractional advection-diffusion equations.

Riemann-Liouville and Caputo differentiation matrices on Legendre and
Chebyshev Gauss-Lobatto grids, 1D and 2D time steppers, and the analysis
tools (error norms, convergence sweeps, iteration-matrix spectra) used to
check them.
"""

from .errors import (
    AnchorMismatchError,
    ConvergenceError,
    DomainError,
    DuplicateNodeError,
    FracCollocError,
    PoleError,
    SingularSystemError,
)
from .fracmat import (
    DiffMatrix,
    Kind,
    caputo_left_matrix,
    caputo_right_matrix,
    diff_matrix,
    first_order_matrix,
    rl_left_matrix,
    rl_right_matrix,
)
from .grids import CollocationGrid, Family, chebyshev_lobatto, legendre_lobatto, make_grid
from .lagrange import Anchor, PowerBasisCoeffs, coeff_error_report, expand_lagrange
from .numerics import PrecisionMode, gamma_fn, gauss_jacobi_rule

__version__ = "0.1.0"

__all__ = [
    "Anchor",
    "AnchorMismatchError",
    "CollocationGrid",
    "ConvergenceError",
    "DiffMatrix",
    "DomainError",
    "DuplicateNodeError",
    "Family",
    "FracCollocError",
    "Kind",
    "PoleError",
    "PowerBasisCoeffs",
    "PrecisionMode",
    "SingularSystemError",
    "caputo_left_matrix",
    "caputo_right_matrix",
    "chebyshev_lobatto",
    "coeff_error_report",
    "diff_matrix",
    "expand_lagrange",
    "first_order_matrix",
    "gamma_fn",
    "gauss_jacobi_rule",
    "legendre_lobatto",
    "make_grid",
    "rl_left_matrix",
    "rl_right_matrix",
]
