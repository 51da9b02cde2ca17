"""Dense real linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. Vectors are
1-D arrays and are accepted wherever an ``n x 1`` matrix is.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from .errors import ConvergenceError, DimensionError, DivergenceError, PreconditionError

JACOBI_REL_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
TAYLOR_DEGREE = 13
DEFAULT_DT = 1e-3


def as_matrix(m, name="matrix"):
    """Return ``m`` as a read-only 2-D float array, rejecting empty shapes."""
    arr = np.array(m, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got ndim={arr.ndim}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionError(f"{name} has an empty dimension {arr.shape}")
    arr.setflags(write=False)
    return arr


def as_vector(v, name="vector"):
    arr = np.array(v, dtype=np.float64)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty vector, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _square(m, name="matrix"):
    arr = as_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got {arr.shape}")
    return arr


def is_metzler(m, tol=0.0):
    """True iff every off-diagonal entry of the square matrix is >= -tol."""
    arr = _square(m)
    off = arr[~np.eye(arr.shape[0], dtype=bool)]
    return bool(np.all(off >= -tol))


def is_nonnegative(m, tol=0.0):
    """Elementwise ``m >= -tol``. The zero matrix counts as nonnegative."""
    return bool(np.all(np.asarray(m, dtype=np.float64) >= -tol))


def kron(x, y):
    return np.kron(as_matrix(x, "X"), as_matrix(y, "Y"))


def expm(m, t=1.0):
    """Matrix exponential ``e^{M t}`` by scaling and squaring.

    A degree-13 Taylor polynomial is evaluated on ``M t / 2^k`` where ``k`` is
    the smallest integer with ``||M t||_1 / 2^k <= 0.5``.
    """
    arr = _square(m)
    n = arr.shape[0]
    if t == 0.0:
        return np.eye(n)
    a = arr * t
    norm1 = np.max(np.sum(np.abs(a), axis=0))
    k = 0 if norm1 <= 0.5 else int(math.ceil(math.log2(norm1 / 0.5)))
    a = a / (2.0 ** k)
    # Horner evaluation of sum_{j<=13} a^j / j!
    result = np.eye(n)
    for j in range(TAYLOR_DEGREE, 0, -1):
        result = np.eye(n) + (a @ result) / j
    for _ in range(k):
        result = result @ result
    return result


def sym_eigen(m, tol=1e-9):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, V)`` with eigenvalues ascending and orthonormal
    eigenvectors in the columns of ``V``.

    Raises
    ------
    PreconditionError
        If ``m`` is not symmetric within ``tol``.
    ConvergenceError
        If the off-diagonal mass is still above ``1e-12 * ||M||_F`` after
        100 sweeps.
    """
    arr = _square(m)
    if np.max(np.abs(arr - arr.T)) > tol:
        raise PreconditionError("sym_eigen requires a symmetric matrix")
    sym = 0.5 * (arr + arr.T)
    diag, vecs, sweeps, converged = kernels.jacobi_eigh(sym, JACOBI_REL_TOL, JACOBI_MAX_SWEEPS)
    if not converged:
        raise ConvergenceError(f"Jacobi iteration did not converge in {sweeps} sweeps")
    order = np.argsort(diag, kind="stable")
    return diag[order], vecs[:, order]


@dataclass(frozen=True)
class Trajectory:
    """Sampled states of a linear system.

    ``states[k]`` is the full state at ``times[k]``. For networked runs the
    state is agent-major: agent ``i`` occupies ``states[:, i*n:(i+1)*n]``.
    """

    times: np.ndarray
    states: np.ndarray
    n_agents: int = 1

    @property
    def agent_dim(self):
        return self.states.shape[1] // self.n_agents

    def agent_states(self):
        """States reshaped to ``(len(times), n_agents, agent_dim)``."""
        return self.states.reshape(len(self.times), self.n_agents, self.agent_dim)


def step_count(t_end, dt):
    """Whole steps of size ``dt`` that fit in ``t_end``, tolerant to rounding."""
    ratio = t_end / dt
    n = int(round(ratio))
    if abs(ratio - n) <= 1e-9 * max(1.0, ratio):
        return n, 0.0
    n = int(math.floor(ratio))
    return n, t_end - n * dt


def run_rk4(m, x0, dt, n_steps, stride=1, t0=0.0):
    """Run the backend RK4 kernel and raise on divergence."""
    rec, bad = kernels.rk4_linear(m, x0, dt, n_steps, stride)
    if bad >= 0:
        raise DivergenceError(bad, t0 + bad * dt)
    return rec


def integrate_linear(m, x0, t_end, dt=DEFAULT_DT):
    """Fixed-step classical RK4 for ``xdot = M x``.

    States are returned at every multiple of ``dt`` plus ``t_end`` itself; if
    ``t_end`` is not a multiple of ``dt`` the last step is shortened.
    """
    arr = _square(m)
    x0 = as_vector(x0, "x0")
    if x0.size != arr.shape[0]:
        raise DimensionError(f"x0 has {x0.size} entries, matrix is {arr.shape}")
    if not (dt > 0 and t_end > 0):
        raise PreconditionError("t_end and dt must be positive")
    if dt > t_end:
        raise PreconditionError("dt must not exceed t_end")
    n_steps, rest = step_count(t_end, dt)
    rec = run_rk4(arr, x0, dt, n_steps)
    times = np.arange(n_steps + 1) * dt
    if rest > 0.0:
        tail = run_rk4(arr, rec[-1], rest, 1, t0=times[-1])
        rec = np.vstack([rec, tail[1:]])
        times = np.append(times, t_end)
    else:
        times[-1] = t_end
    return Trajectory(times=times, states=rec)
