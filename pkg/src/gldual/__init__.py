"""Discretised Ginzburg-Landau functionals and their duality principles.

Modules
-------
grid_ops    grids, Dirichlet Laplacian, quadrature, SPD solves, extremal eigenvalues
primal      the real functional J, its derivatives and a Newton critical-point search
dual        conjugates F*, G*, J*, reduced dual functionals and duality checks
complex_gl  complex energy with magnetic potential, gauge operations, its dual
cli         ``gldual verify | sweep | plotdata``
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    DomainError,
    FiniteDifferenceError,
    GLDualError,
    GridMismatchError,
    HypothesisError,
    IndefiniteOperatorError,
)
from .grid_ops import Grid, build_laplacian, choose_K, extremal_eigs, inner, spd_solve  # noqa: E402
from .primal import (  # noqa: E402
    CriticalPoint,
    GLProblem,
    HessianClass,
    classify_hessian,
    eval_J,
    find_critical_point,
    grad_J,
    hess_J,
)
from .dual import (  # noqa: E402
    DualPoint,
    GapReport,
    TheoremCase,
    build_dual_point,
    eval_Fstar,
    eval_Gstar,
    eval_Jstar,
    membership_C,
    reduced_J1,
    reduced_J2_global,
    reduced_J2_over_v1,
    reduced_Jtilde,
    verify_gap,
    verify_second_derivative_correspondence,
    weak_duality_sample,
)
