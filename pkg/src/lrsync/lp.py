"""Two-phase primal simplex for ``max c'x  s.t.  G x <= h, x >= 0``.

Bland's rule picks both the entering and the leaving variable, which
guarantees termination; the pivot cap only guards against numerical trouble.
"""
from dataclasses import dataclass
import enum

import numpy as np

from .errors import DimensionError, SolverStallError
from .linalg import as_matrix, as_vector

DEFAULT_TOL = 1e-9
MAX_PIVOTS = 10_000


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        c = as_vector(self.c, "c")
        G = as_matrix(self.G, "G")
        h = as_vector(self.h, "h")
        if G.shape != (h.size, c.size):
            raise DimensionError(f"G is {G.shape}, expected ({h.size}, {c.size})")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    x: np.ndarray | None = None
    value: float | None = None
    pivots: int = 0

    @property
    def optimal(self):
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Dense tableau ``[T | rhs]`` kept in canonical form for ``basis``."""

    def __init__(self, T, basis, tol, budget):
        self.T = T
        self.basis = basis
        self.tol = tol
        self.budget = budget
        self.pivots = 0

    def pivot(self, row, col):
        if self.pivots >= self.budget:
            raise SolverStallError(f"simplex exceeded {self.budget} pivots")
        T = self.T
        T[row] /= T[row, col]
        for i in range(T.shape[0]):
            if i != row and T[i, col] != 0.0:
                T[i] -= T[i, col] * T[row]
        self.basis[row] = col
        self.pivots += 1

    def maximize(self, cost, allowed):
        """Run Bland-rule pivots; return True at optimum, False if unbounded."""
        tol = self.tol
        while True:
            A = self.T[:, :-1]
            reduced = cost - cost[self.basis] @ A
            entering = next((j for j in allowed if reduced[j] > tol), None)
            if entering is None:
                return True
            column = A[:, entering]
            rows = np.flatnonzero(column > tol)
            if rows.size == 0:
                return False
            ratios = self.T[rows, -1] / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + tol * (1.0 + abs(best))]
            leaving = min(tied, key=lambda i: self.basis[i])
            self.pivot(leaving, entering)


def solve_lp(lp, tol=DEFAULT_TOL, max_pivots=MAX_PIVOTS):
    """Solve ``lp`` with the two-phase simplex method.

    Raises ``SolverStallError`` if more than ``max_pivots`` pivots are needed.
    """
    c, G, h = lp.c, lp.G, lp.h
    m, nv = G.shape
    flip = h < 0
    n_art = int(flip.sum())
    n_cols = nv + m + n_art

    T = np.zeros((m, n_cols + 1))
    T[:, :nv] = G
    T[:, nv:nv + m] = np.eye(m)
    T[:, -1] = h
    T[flip] *= -1.0
    basis = [nv + i for i in range(m)]
    for k, i in enumerate(np.flatnonzero(flip)):
        T[i, nv + m + k] = 1.0
        basis[i] = nv + m + k

    tab = _Tableau(T, basis, tol, max_pivots)
    art = range(nv + m, n_cols)

    if n_art:
        cost1 = np.zeros(n_cols)
        cost1[nv + m:] = -1.0
        tab.maximize(cost1, range(n_cols))
        if -(cost1[tab.basis] @ tab.T[:, -1]) > tol:
            return LpOutcome(LpStatus.INFEASIBLE, pivots=tab.pivots)
        # Drive artificial variables out of the basis; drop redundant rows.
        keep = []
        for i in range(m):
            if tab.basis[i] in art:
                cols = [j for j in range(nv + m) if abs(tab.T[i, j]) > tol]
                if not cols:
                    continue
                tab.pivot(i, cols[0])
            keep.append(i)
        tab.T = np.delete(tab.T[keep], list(art), axis=1)
        tab.basis = [tab.basis[i] for i in keep]

    cost2 = np.zeros(nv + m)
    cost2[:nv] = c
    if not tab.maximize(cost2, range(nv + m)):
        return LpOutcome(LpStatus.UNBOUNDED, pivots=tab.pivots)

    x = np.zeros(nv + m)
    x[tab.basis] = tab.T[:, -1]
    x = x[:nv]
    return LpOutcome(LpStatus.OPTIMAL, x=x, value=float(c @ x), pivots=tab.pivots)


def solve_feasibility(G, h, tol=DEFAULT_TOL, max_pivots=MAX_PIVOTS):
    """Find any ``x >= 0`` with ``G x <= h`` (zero objective)."""
    G = as_matrix(G, "G")
    return solve_lp(LinearProgram(np.zeros(G.shape[1]), G, h), tol, max_pivots)
