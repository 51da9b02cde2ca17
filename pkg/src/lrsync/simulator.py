"""Simulation of the networked closed loop and synchronization metrics."""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DimensionError, HypothesisViolation, PreconditionError
from .graphs import is_connected_bfs, laplacian
from .linalg import DEFAULT_DT, Trajectory, expm, run_rk4, step_count
from .protocol import closed_loop_matrix, validate_protocol
from .serialization import fmt_float


@dataclass(frozen=True)
class SimConfig:
    """Horizon, step and initial condition of a run.

    ``x0`` (shape ``(N, n)`` or flat) overrides the random initial state,
    which is uniform on ``[0, init_scale]`` drawn from ``init_seed``.
    """

    t_end: float = 20.0
    dt: float = DEFAULT_DT
    output_stride: int = 100
    x0: object = None
    init_scale: float = 5.0
    init_seed: int = 0

    def __post_init__(self):
        if not (self.t_end > 0 and self.dt > 0):
            raise PreconditionError("t_end and dt must be positive")
        if self.dt > self.t_end:
            raise PreconditionError("dt must not exceed t_end")
        if int(self.output_stride) != self.output_stride or self.output_stride < 1:
            raise PreconditionError("output_stride must be a positive integer")


def initial_state(sim, n_agents, n):
    if sim.x0 is not None:
        x0 = np.asarray(sim.x0, dtype=np.float64).reshape(-1)
        if x0.size != n_agents * n:
            raise DimensionError(f"initial state has {x0.size} entries, expected {n_agents * n}")
        return x0
    rng = np.random.default_rng(sim.init_seed)
    return rng.uniform(0.0, sim.init_scale, size=n_agents * n)


def simulate(dyn, cfg, g, sim, validate=True):
    """RK4 simulation of ``xdot = (I_N (x) A - rho L (x) B K) x``.

    Raises ``HypothesisViolation`` when the protocol hypotheses fail and
    ``DivergenceError`` if the state becomes non-finite.
    """
    if validate:
        check = validate_protocol(dyn, cfg)
        if not check:
            raise HypothesisViolation("; ".join(check.violations))
    if not is_connected_bfs(g):
        raise PreconditionError("graph is not connected")
    x0 = initial_state(sim, g.n, dyn.n)
    M = closed_loop_matrix(dyn, cfg, g)
    n_steps, _ = step_count(sim.t_end, sim.dt)
    stride = int(sim.output_stride)
    rec = run_rk4(M, x0, sim.dt, n_steps, stride)
    times = np.arange(rec.shape[0]) * (sim.dt * stride)
    return Trajectory(times=times, states=rec, n_agents=g.n)


def reference_trajectory(dyn, x0_all, times):
    """``e^{A t}`` applied to the mean initial agent state, one row per time."""
    x0 = np.asarray(x0_all, dtype=np.float64).reshape(-1, dyn.n)
    mean = x0.mean(axis=0)
    return np.array([expm(dyn.A, float(t)) @ mean for t in times])


@dataclass(frozen=True)
class SyncMetrics:
    times: np.ndarray
    disagreement: np.ndarray
    min_coordinate: np.ndarray
    sync_error_vs_reference: np.ndarray
    half_life: float

    def as_dict(self):
        return {
            "times": self.times,
            "disagreement": self.disagreement,
            "min_coordinate": self.min_coordinate,
            "sync_error_vs_reference": self.sync_error_vs_reference,
            "half_life": self.half_life if math.isfinite(self.half_life) else None,
        }


def disagreement(traj):
    """Max over agent pairs of the inf-norm gap, via per-coordinate spread."""
    X = traj.agent_states()
    return np.max(X.max(axis=1) - X.min(axis=1), axis=1)


def half_life(times, series):
    """First recorded time at which ``series`` is at most half its initial value.

    0 when the initial value is 0; ``inf`` when never reached.
    """
    if series[0] == 0.0:
        return 0.0
    hit = np.flatnonzero(series <= 0.5 * series[0])
    return float(times[hit[0]]) if hit.size else math.inf


def compute_metrics(traj, reference):
    X = traj.agent_states()
    ref = np.asarray(reference, dtype=np.float64).reshape(len(traj.times), 1, -1)
    dis = disagreement(traj)
    return SyncMetrics(
        times=traj.times,
        disagreement=dis,
        min_coordinate=traj.states.min(axis=1),
        sync_error_vs_reference=np.max(np.abs(X - ref), axis=(1, 2)),
        half_life=half_life(traj.times, dis),
    )


def relative_measurements(g, traj):
    """``zeta_i = sum_j w_ij (x_i - x_j)`` per sample, shape ``(T, N, n)``."""
    return np.einsum("ij,tjk->tik", laplacian(g), traj.agent_states())


def input_bound_excess(dyn, cfg, g, traj):
    """Largest value of ``|u_i| - E |zeta_i|`` over samples, agents and inputs.

    Nonpositive (up to rounding) whenever the protocol respects its input bound.
    """
    zeta = relative_measurements(g, traj)
    u = -cfg.rho * zeta @ cfg.K.T
    bound = np.abs(zeta) @ dyn.E.T
    return float(np.max(np.abs(u) - bound))


def mode_projection(traj, eigenvectors):
    """Coordinates ``(V' (x) I_n) x`` in the Laplacian eigenbasis, shape ``(T, N, n)``."""
    return np.einsum("ji,tjk->tik", eigenvectors, traj.agent_states())


def write_trajectory_csv(traj, path):
    """Rows ``t,agent,coord,value`` in time-major, agent-major order."""
    X = traj.agent_states()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,agent,coord,value\n")
        for k, t in enumerate(traj.times):
            ts = f"{t:.6f}"
            fh.writelines(
                f"{ts},{i},{c},{fmt_float(X[k, i, c])}\n"
                for i in range(traj.n_agents)
                for c in range(traj.agent_dim)
            )
