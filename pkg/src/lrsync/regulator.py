"""Linear Regulator design for a positive agent.

For ``xdot = A x + B u`` with ``|u| <= E x`` and running cost ``s'x`` the
value function is linear, ``V(x0) = p'x0``, where ``p >= 0`` solves

    A'p = E'|B'p| - s,

and the optimal feedback is ``u = -K x`` with ``K = diag(sign(B'p)) E``.
The costate ``p`` is the maximizer of a linear program over ``(p, zeta)``.
Everywhere below ``E`` means the scaled bound ``E / rho`` when ``rho`` is given.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DimensionError, DomainError, NotStabilizableError, PreconditionError, VerificationError
from .linalg import as_matrix, as_vector, is_metzler, is_nonnegative
from .lp import DEFAULT_TOL, LinearProgram, solve_feasibility, solve_lp

RESIDUAL_TOL = 1e-7


@dataclass(frozen=True)
class AgentDynamics:
    """One agent ``(A, B, E, s)``: Metzler ``A``, ``E >= 0``, ``s > 0``."""

    A: np.ndarray
    B: np.ndarray
    E: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        E = as_matrix(self.E, "E")
        s = as_vector(self.s, "s")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise DimensionError(f"B has {B.shape[0]} rows, A is {n}x{n}")
        if E.shape != (B.shape[1], n):
            raise DimensionError(f"E must be {B.shape[1]}x{n}, got {E.shape}")
        if s.size != n:
            raise DimensionError(f"s must have {n} entries, got {s.size}")
        if not is_metzler(A):
            raise PreconditionError("A must be Metzler")
        if not is_nonnegative(E):
            raise PreconditionError("E must be elementwise nonnegative")
        if not np.all(s > 0):
            raise PreconditionError("s must be strictly positive")
        for name, val in (("A", A), ("B", B), ("E", E), ("s", s)):
            object.__setattr__(self, name, val)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def scaled(self, rho):
        """Copy with the input bound replaced by ``E / rho``."""
        if not rho > 0:
            raise DomainError(f"rho must be positive, got {rho}")
        return AgentDynamics(self.A, self.B, self.E / rho, self.s)


@dataclass(frozen=True)
class RegulatorSolution:
    p: np.ndarray
    zeta: np.ndarray
    K: np.ndarray
    E_tilde: np.ndarray
    lp_value: float
    residual: float

    def value(self, x0):
        return optimal_cost(self, x0)


def check_e_stabilizable(dyn, rho=1.0, tol=DEFAULT_TOL):
    """Feasibility of ``A x + B u <= -1``, ``|u| <= E x`` with ``x >= 0``.

    ``u`` is free and encoded as ``u+ - u-``; variables are ``(x, u+, u-)``.
    """
    E = dyn.E / rho
    n, m = dyn.n, dyn.m
    I = np.eye(m)
    G = np.block([
        [dyn.A, dyn.B, -dyn.B],
        [-E, I, -I],
        [-E, -I, I],
    ])
    h = np.concatenate([-np.ones(n), np.zeros(2 * m)])
    return solve_feasibility(G, h, tol).optimal


def build_regulator_lp(dyn, rho=1.0):
    """LP over ``(p, zeta) >= 0`` maximizing ``1'p`` with

        E'zeta - A'p <= s,   B'p - zeta <= 0,   -B'p - zeta <= 0.

    The first block is the relaxation ``A'p >= E'|B'p| - s`` of the regulator
    equation; at the maximizer it holds with equality.
    """
    E = dyn.E / rho
    n, m = dyn.n, dyn.m
    I = np.eye(m)
    Bt = dyn.B.T
    G = np.block([
        [-dyn.A.T, E.T],
        [Bt, -I],
        [-Bt, -I],
    ])
    h = np.concatenate([dyn.s, np.zeros(2 * m)])
    c = np.concatenate([np.ones(n), np.zeros(m)])
    return LinearProgram(c, G, h)


def regulator_residual(dyn, p, E_tilde):
    """Infinity-norm defect of ``A'p - E'|B'p| + s``."""
    return float(np.max(np.abs(dyn.A.T @ p - E_tilde.T @ np.abs(dyn.B.T @ p) + dyn.s)))


def gain_from_costate(dyn, p, E_tilde, tol=DEFAULT_TOL):
    """``K = diag(sign(B'p)) E``; components with ``|B'p| <= tol`` give a zero row."""
    bp = dyn.B.T @ p
    sign = np.where(np.abs(bp) <= tol, 0.0, np.sign(bp))
    return sign[:, None] * E_tilde


def solve_regulator(dyn, tol=RESIDUAL_TOL, rho=1.0, lp_tol=DEFAULT_TOL):
    """Solve the regulator LP and extract ``(p, zeta, K)``.

    Raises
    ------
    NotStabilizableError
        The LP is infeasible or unbounded, i.e. the agent is not
        ``E/rho``-stabilizable.
    VerificationError
        The LP maximizer misses the regulator equation by more than ``tol``.
    """
    E_tilde = dyn.E / rho
    out = solve_lp(build_regulator_lp(dyn, rho), lp_tol)
    if not out.optimal:
        raise NotStabilizableError(f"regulator LP is {out.status.value}; the agent is not E-stabilizable")
    n = dyn.n
    p = np.clip(out.x[:n], 0.0, None)
    zeta = np.clip(out.x[n:], 0.0, None)
    residual = regulator_residual(dyn, p, E_tilde)
    if residual > tol:
        raise VerificationError(residual, tol)
    K = gain_from_costate(dyn, p, E_tilde, lp_tol)
    return RegulatorSolution(p=p, zeta=zeta, K=K, E_tilde=E_tilde, lp_value=out.value, residual=residual)


def optimal_cost(sol, x0):
    x0 = as_vector(x0, "x0")
    if x0.size != sol.p.size:
        raise DimensionError(f"x0 has {x0.size} entries, expected {sol.p.size}")
    if np.any(x0 < 0):
        raise DomainError("the optimal cost p'x0 is only defined for x0 >= 0")
    return float(sol.p @ x0)


def compute_alpha(dyn, rho=1.0):
    """Largest ``tau >= 0`` keeping ``A - tau |B| E/rho`` Metzler (``inf`` if unbounded)."""
    BE = np.abs(dyn.B) @ (dyn.E / rho)
    off = ~np.eye(dyn.n, dtype=bool)
    mask = off & (BE > 0)
    if not mask.any():
        return math.inf
    return float(np.min(dyn.A[mask] / BE[mask]))


def check_alpha_condition(alpha, beta, gamma):
    if beta > gamma:
        raise PreconditionError("beta must not exceed gamma")
    return bool(alpha >= gamma / beta)
