"""Wavelet Galerkin discretisation of one- and two-dimensional fractional diffusion."""

from .assembly import (
    FractionalForm1D,
    FractionalForm2D,
    assemble_A,
    assemble_C2d,
    assemble_mass,
    highorder_generators_1d,
    load_vector_1d,
    load_vector_2d,
    mass_generators_1d,
    stiffness_generators_1d,
)
from .fractional import frac_integral_monomial, frac_integral_piecewise
from .krylov import BreakdownError, SolverConfig, SolverReport, bicgstab, gmres
from .linalg import (
    KroneckerSumOperator,
    SingularMatrixError,
    ToeplitzOperator,
    condition_number_2,
    kron_sum_matvec,
    lu_solve_doolittle,
    toeplitz_matvec_fft,
)
from .problems import ProblemSpec, l2_error, make_f1, make_f2, make_fs
from .splines import WaveletBasisSpec, bspline, eval_bspline
from .transform import TransformMatrix, fast_apply, fast_apply_transpose, multilevel_1d, multilevel_2d

__version__ = "0.1.0"
