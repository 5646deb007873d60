"""Fractional q-calculus on geometric lattices and the fractional q-Sturm-Liouville problem."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    MissingExtensionError,
    NonDecayingSummandError,
    ParameterError,
    PoleError,
    QCalcError,
    SingularDeltaError,
    SpecError,
)
from .funcspec import ProblemSpec, build_function
from .lattice import (
    Lattice,
    LatticeFn,
    d_q,
    d_qinv,
    jackson_int,
    jackson_int_range,
    sample,
)
from .qcore import (
    QContext,
    phi21,
    q_beta,
    q_bracket,
    q_gamma,
    qpoch_inf,
    qpoch_n,
    qpoch_real,
)
from .qfrac import (
    RightEdgePolicy,
    caputo_left,
    caputo_right,
    dleft_rl,
    dright_rl,
    ileft,
    iright,
)
from .qfslp import (
    SLProblem,
    apply_L,
    dominant_mode,
    flux,
    greens_residual,
    lipschitz_bound,
    map_T,
    psi,
    solve_ivp,
    solve_picard,
    wronskian,
)
from .spectrum import (
    JacobiParams,
    eigenpair,
    eigenvalue,
    gram_matrix,
    jacobi_norm,
    jacobi_weight,
    little_q_jacobi,
    verify_eigenpairs,
)
