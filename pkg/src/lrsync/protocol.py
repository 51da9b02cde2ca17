"""Synchronization protocol ``u_i = -rho K zeta_i`` and its certificates.

``K`` comes from the linear regulator solved with the scaled bound
``E / rho``. Each nonzero Laplacian eigenvalue ``lambda`` yields a mode
matrix ``A - lambda rho B K``. A mode is certified Hurwitz by a vector
``p >= 0`` with ``(A - lambda rho B K)' p <= -1``, which is valid because
the mode matrix is Metzler.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionFailure, HypothesisViolation, NotHurwitzError, PreconditionError
from .graphs import laplacian, spectral_summary
from .linalg import is_metzler, kron, run_rk4
from .lp import DEFAULT_TOL, solve_feasibility
from .regulator import RESIDUAL_TOL, check_alpha_condition, compute_alpha, solve_regulator

METZLER_TOL = 1e-12
EXIT_TOL = 1e-9
MAX_WITNESS_DOUBLINGS = 40


@dataclass(frozen=True)
class ProtocolConfig:
    beta: float
    gamma: float
    rho: float
    regulator: object

    @property
    def K(self):
        return self.regulator.K


def make_protocol(dyn, beta, gamma, rho=None, tol=RESIDUAL_TOL):
    """Solve the regulator with ``E / rho`` and bundle the protocol parameters.

    ``rho`` defaults to ``1 / beta``.
    """
    if not (0 < beta <= gamma):
        raise PreconditionError(f"need 0 < beta <= gamma, got beta = {beta}, gamma = {gamma}")
    rho = 1.0 / beta if rho is None else float(rho)
    reg = solve_regulator(dyn, tol=tol, rho=rho)
    return ProtocolConfig(beta=float(beta), gamma=float(gamma), rho=rho, regulator=reg)


@dataclass(frozen=True)
class ProtocolCheck:
    """Outcome of :func:`validate_protocol`; falsy when any hypothesis fails."""

    alpha: float
    violations: tuple = ()

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_protocol(dyn, cfg, tol=METZLER_TOL):
    """Check ``rho >= 1/beta``, ``A - gamma rho |B| E/rho`` Metzler and ``alpha >= gamma/beta``."""
    violations = []
    if cfg.rho < 1.0 / cfg.beta:
        violations.append(f"rho = {cfg.rho:g} is below 1/beta = {1.0 / cfg.beta:g}")
    E_tilde = dyn.E / cfg.rho
    if not is_metzler(dyn.A - cfg.gamma * cfg.rho * np.abs(dyn.B) @ E_tilde, tol):
        violations.append("A - gamma*rho*|B|*E_tilde is not Metzler")
    alpha = compute_alpha(dyn, cfg.rho)
    if not check_alpha_condition(alpha, cfg.beta, cfg.gamma):
        violations.append(f"alpha = {alpha:.6g} is below gamma/beta = {cfg.gamma / cfg.beta:.6g}")
    return ProtocolCheck(alpha=alpha, violations=tuple(violations))


def mode_matrix(dyn, cfg, lambda_i):
    return dyn.A - lambda_i * cfg.rho * dyn.B @ cfg.K


@dataclass(frozen=True)
class ModeCertificate:
    lambda_i: float
    p: np.ndarray
    margin: float


def certify_mode(dyn, cfg, lambda_i, tol=DEFAULT_TOL, check_range=True):
    """Certify that ``A - lambda_i rho B K`` is Hurwitz.

    Raises
    ------
    HypothesisViolation
        If the mode matrix is not Metzler.
    NotHurwitzError
        If no ``p >= 0`` with ``M'p <= -1`` exists.
    """
    if check_range and not (cfg.beta - tol <= lambda_i <= cfg.gamma + tol):
        raise PreconditionError(f"lambda = {lambda_i:.12g} lies outside [beta, gamma] = [{cfg.beta:g}, {cfg.gamma:g}]")
    M = mode_matrix(dyn, cfg, lambda_i)
    if not is_metzler(M, METZLER_TOL):
        raise HypothesisViolation(f"mode matrix for lambda = {lambda_i:.12g} is not Metzler")
    out = solve_feasibility(M.T, -np.ones(dyn.n), tol)
    if not out.optimal:
        raise NotHurwitzError(lambda_i)
    p = out.x
    return ModeCertificate(lambda_i=float(lambda_i), p=p, margin=float(np.min(-(M.T @ p))))


def direct_certificate_defect(dyn, cfg, alpha):
    """Infinity norm of ``(A - alpha B K)'p - ((1 - alpha) E'|B'p| - s)``.

    ``p`` is the regulator costate; the expression vanishes identically.
    """
    reg = cfg.regulator
    p = reg.p
    lhs = (dyn.A - alpha * dyn.B @ reg.K).T @ p
    rhs = (1.0 - alpha) * reg.E_tilde.T @ np.abs(dyn.B.T @ p) - dyn.s
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class Positivity:
    """``witness`` is a 0-based ``(row, col)`` of a negative entry of ``B K``."""

    guaranteed: bool
    witness: tuple | None = None


def check_positivity(dyn, cfg, tol=0.0):
    BK = dyn.B @ cfg.K
    neg = np.argwhere(BK < -tol)
    if neg.size == 0:
        return Positivity(True)
    return Positivity(False, (int(neg[0][0]), int(neg[0][1])))


def degree_condition(dyn, cfg, g):
    """Check the local Metzler condition used by the positivity argument.

    Positivity of agent ``i`` needs ``A - rho deg_i B K`` Metzler. This holds
    when ``max deg <= gamma``; it is checked directly either way.
    """
    max_deg = float(np.max(g.degrees())) if g.n > 1 else 0.0
    local_ok = all(is_metzler(dyn.A - cfg.rho * d * dyn.B @ cfg.K, METZLER_TOL) for d in set(g.degrees()))
    return {
        "max_degree": max_deg,
        "max_degree_le_gamma": max_deg <= cfg.gamma,
        "local_metzler": bool(local_ok),
        "degree_binding": max_deg > cfg.gamma,
    }


def closed_loop_matrix(dyn, cfg, g):
    """``I_N (x) A - rho L (x) B K``."""
    BK = dyn.B @ cfg.K
    return kron(np.eye(g.n), dyn.A) - cfg.rho * kron(laplacian(g), BK)


@dataclass(frozen=True)
class ProtocolCertificate:
    mode_certificates: tuple
    positivity: Positivity
    assembled: bool
    degree: dict | None = None
    notes: tuple = field(default=())

    @property
    def min_margin(self):
        return min((c.margin for c in self.mode_certificates), default=float("inf"))


def certify_protocol(dyn, cfg, g=None, tol=DEFAULT_TOL, summary=None):
    """Certify every mode of ``g`` or, without a graph, the endpoints ``beta`` and ``gamma``.

    Raises as :func:`certify_mode` on the first failing mode.
    """
    notes = []
    degree = None
    if g is not None:
        summary = summary if summary is not None else spectral_summary(g)
        if g.n > 1 and not summary.is_connected:
            raise PreconditionError("graph is not connected")
        lambdas = summary.eigenvalues[1:]
        degree = degree_condition(dyn, cfg, g)
        if degree["degree_binding"]:
            notes.append("max degree exceeds gamma; positivity rests on the direct local Metzler check")
    else:
        lambdas = np.array([cfg.beta, cfg.gamma])
        defect = max(direct_certificate_defect(dyn, cfg, lam * cfg.rho) for lam in lambdas)
        notes.append(f"direct certificate defect {defect:.3e}")
    certs = tuple(certify_mode(dyn, cfg, float(lam), tol) for lam in lambdas)
    return ProtocolCertificate(
        mode_certificates=certs,
        positivity=check_positivity(dyn, cfg),
        assembled=g is not None,
        degree=degree,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class ViolationWitness:
    x0: np.ndarray
    exit_time: float
    agent: int
    neighbor: int
    magnitude: float
    derivative: float


def construct_violation_trajectory(dyn, cfg, g, p_idx, q_idx, dt=1e-3, horizon=0.1, tol_exit=EXIT_TOL):
    """Build an initial state whose trajectory leaves the nonnegative orthant.

    Agent ``i`` (first endpoint of the first edge) starts with coordinate
    ``p_idx`` at zero while its neighbor ``j`` carries ``q_idx`` at a
    magnitude doubled from 1 until ``xdot_i(0)_p < 0``; every other
    coordinate starts at 1. The closed loop is then simulated until some
    coordinate drops below ``-tol_exit``.
    """
    BK = dyn.B @ cfg.K
    if BK[p_idx, q_idx] >= 0:
        raise PreconditionError(f"(B K)[{p_idx}, {q_idx}] = {BK[p_idx, q_idx]:g} is not negative")
    if not g.edges:
        raise PreconditionError("need a graph with at least one edge")
    n = dyn.n
    i, j, _ = g.edges[0]
    M = closed_loop_matrix(dyn, cfg, g)
    n_steps = max(1, int(round(horizon / dt)))
    magnitude = 1.0
    for _ in range(MAX_WITNESS_DOUBLINGS + 1):
        x0 = np.ones(g.n * n)
        x0[i * n + p_idx] = 0.0
        x0[j * n + q_idx] = magnitude
        deriv = float((M @ x0)[i * n + p_idx])
        if deriv < 0:
            rec = run_rk4(M, x0, dt, n_steps)
            below = np.flatnonzero(rec.min(axis=1) < -tol_exit)
            if below.size:
                return ViolationWitness(x0, float(below[0] * dt), i, j, magnitude, deriv)
        magnitude *= 2.0
    raise ConstructionFailure(
        f"no orthant exit found up to magnitude 2^{MAX_WITNESS_DOUBLINGS}; this contradicts the necessity of B K >= 0 for positivity"
    )
