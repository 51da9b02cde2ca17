"""Linear-regulator synchronization of positive multi-agent systems.

Design a static protocol ``u_i = -rho K zeta_i`` from a linear program,
certify synchronization and positivity over graphs with bounded Laplacian
spectra, and simulate the networked closed loop.
"""
from .kernels import BACKEND
from .graphs import Graph, anderson_morley_bound, in_family, laplacian, spectral_summary
from .linalg import Trajectory, expm, integrate_linear, is_metzler, is_nonnegative, kron, sym_eigen
from .lp import LinearProgram, LpOutcome, LpStatus, solve_feasibility, solve_lp
from .protocol import (
    ProtocolConfig,
    certify_mode,
    certify_protocol,
    check_positivity,
    closed_loop_matrix,
    construct_violation_trajectory,
    make_protocol,
    validate_protocol,
)
from .regulator import (
    AgentDynamics,
    RegulatorSolution,
    build_regulator_lp,
    check_alpha_condition,
    check_e_stabilizable,
    compute_alpha,
    optimal_cost,
    solve_regulator,
)
from .simulator import SimConfig, compute_metrics, reference_trajectory, simulate

__version__ = "0.1.0"
