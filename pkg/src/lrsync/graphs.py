"""Weighted undirected graphs, Laplacians, spectra and generators."""
from collections import deque
from dataclasses import dataclass
import hashlib

import numpy as np

from .errors import DomainError, GenerationFailure, PreconditionError
from .linalg import sym_eigen

CONNECTIVITY_TOL = 1e-7
MAX_GENERATION_ATTEMPTS = 1000


@dataclass(frozen=True)
class Graph:
    """Undirected graph on nodes ``0..n-1``.

    ``edges`` holds ``(i, j, w)`` triples with ``i < j`` and ``w > 0``, sorted.
    Use :meth:`from_edges` to normalize arbitrary input.
    """

    n: int
    edges: tuple

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("a graph needs at least one node")
        seen = set()
        for i, j, w in self.edges:
            if not (0 <= i < j < self.n):
                raise PreconditionError(f"bad edge ({i}, {j}) for n = {self.n}")
            if not w > 0:
                raise PreconditionError(f"edge ({i}, {j}) has non-positive weight {w}")
            if (i, j) in seen:
                raise PreconditionError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))

    @classmethod
    def from_edges(cls, n, edges):
        norm = []
        for e in edges:
            i, j = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else 1.0
            if i == j:
                raise PreconditionError(f"self-loop at node {i}")
            norm.append((min(i, j), max(i, j), w))
        return cls(int(n), tuple(sorted(norm)))

    @property
    def n_edges(self):
        return len(self.edges)

    def degrees(self):
        """Weighted degree of every node."""
        deg = np.zeros(self.n)
        for i, j, w in self.edges:
            deg[i] += w
            deg[j] += w
        return deg

    def neighbors(self):
        adj = [[] for _ in range(self.n)]
        for i, j, w in self.edges:
            adj[i].append((j, w))
            adj[j].append((i, w))
        return adj

    def regular_degree(self):
        """The common unweighted degree if the graph is regular with unit weights, else None."""
        if any(w != 1.0 for _, _, w in self.edges):
            return None
        deg = self.degrees()
        return int(deg[0]) if np.all(deg == deg[0]) else None

    def to_text(self):
        lines = [f"n {self.n}"]
        lines += [f"{i} {j} {w!r}" for i, j, w in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or rows[0][0] != "n" or len(rows[0]) != 2:
            raise PreconditionError("edge list must start with a header line 'n <count>'")
        edges = []
        for k, r in enumerate(rows[1:], start=2):
            if len(r) != 3:
                raise PreconditionError(f"edge line {k}: expected 'i j w', got {' '.join(r)!r}")
            edges.append((int(r[0]), int(r[1]), float(r[2])))
        return cls.from_edges(int(rows[0][1]), edges)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def digest(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    lambda2: float
    lambdaN: float
    is_connected: bool


def laplacian(g):
    L = np.zeros((g.n, g.n))
    for i, j, w in g.edges:
        L[i, j] -= w
        L[j, i] -= w
        L[i, i] += w
        L[j, j] += w
    return L


def spectral_summary(g, tol=CONNECTIVITY_TOL):
    vals, vecs = sym_eigen(laplacian(g))
    lam2 = float(vals[1]) if g.n > 1 else 0.0
    return SpectralSummary(
        eigenvalues=vals,
        eigenvectors=vecs,
        lambda2=lam2,
        lambdaN=float(vals[-1]),
        is_connected=g.n == 1 or lam2 > tol,
    )


def is_connected_bfs(g):
    """Graph-theoretic connectivity by breadth-first search."""
    adj = g.neighbors()
    seen = [False] * g.n
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v, _ in adj[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    return all(seen)


def in_family(g, beta, gamma, tol=1e-9, summary=None):
    """Membership of ``g`` in the connected graphs whose nonzero Laplacian
    eigenvalues all lie in ``[beta, gamma]``."""
    if beta > gamma:
        raise PreconditionError("beta must not exceed gamma")
    s = summary if summary is not None else spectral_summary(g)
    if not s.is_connected:
        return False
    nonzero = s.eigenvalues[1:]
    return bool(np.all(nonzero >= beta - tol) and np.all(nonzero <= gamma + tol))


def anderson_morley_bound(g):
    """``max_{(i,j) in E} (d_i + d_j)`` with weighted degrees; bounds lambda_N."""
    if not g.edges:
        raise DomainError("the bound is undefined for an edgeless graph")
    deg = g.degrees()
    return float(max(deg[i] + deg[j] for i, j, _ in g.edges))


def _check_n(n):
    if n < 2:
        raise DomainError(f"need n >= 2 nodes, got {n}")


def gen_complete(n):
    _check_n(n)
    return Graph(n, tuple((i, j, 1.0) for i in range(n) for j in range(i + 1, n)))


def gen_path(n):
    _check_n(n)
    return Graph(n, tuple((i, i + 1, 1.0) for i in range(n - 1)))


def gen_cycle(n):
    _check_n(n)
    if n == 2:
        return gen_path(2)
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def _pair_stubs(n, d, rng):
    """One configuration-model attempt.

    Stubs are shuffled and paired; pairs forming a self-loop or a repeated
    edge are rejected and their stubs re-paired. Returns None when the
    leftover stubs admit no valid pair.
    """
    edges = set()
    stubs = np.repeat(np.arange(n), d)
    while stubs.size:
        rng.shuffle(stubs)
        leftover = []
        for a, b in zip(stubs[0::2], stubs[1::2]):
            a, b = (int(a), int(b)) if a < b else (int(b), int(a))
            if a != b and (a, b) not in edges:
                edges.add((a, b))
            else:
                leftover += [a, b]
        if leftover:
            nodes = sorted(set(leftover))
            if not any(u < v and (u, v) not in edges for u in nodes for v in nodes):
                return None
        stubs = np.array(leftover, dtype=int)
    return edges


def gen_random_regular(n, d, seed):
    """Connected simple ``d``-regular graph with unit weights.

    Deterministic for a fixed ``seed``. Disconnected draws are rejected.
    """
    if d < 1 or d >= n:
        raise DomainError(f"need 1 <= d < n, got d = {d}, n = {n}")
    if (n * d) % 2:
        raise DomainError(f"n * d must be even, got n = {n}, d = {d}")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_GENERATION_ATTEMPTS):
        edges = _pair_stubs(n, d, rng)
        if edges is None:
            continue
        g = Graph.from_edges(n, edges)
        if is_connected_bfs(g):
            return g
    raise GenerationFailure(f"no connected {d}-regular graph on {n} nodes after {MAX_GENERATION_ATTEMPTS} attempts")


def gen_erdos_renyi(n, p_edge, seed):
    """G(n, p) with unit weights; connectivity is not enforced."""
    if not 0 < p_edge <= 1:
        raise DomainError(f"p_edge must lie in (0, 1], got {p_edge}")
    _check_n(n)
    rng = np.random.default_rng(seed)
    draws = rng.random(n * (n - 1) // 2)
    pairs = ((i, j) for i in range(n) for j in range(i + 1, n))
    return Graph(n, tuple((i, j, 1.0) for (i, j), u in zip(pairs, draws) if u < p_edge))
