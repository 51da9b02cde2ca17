"""Pure NumPy versions of the compiled kernels in ``_ckernels.pyx``."""
import math

import numpy as np


def _offdiag_norm(a):
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return np.linalg.norm(off)


def jacobi_eigh(a_in, rel_tol, max_sweeps):
    """Return (diag, V, sweeps, converged) for symmetric ``a_in``."""
    a = np.array(a_in, dtype=np.float64, order="C", copy=True)
    n = a.shape[0]
    v = np.eye(n)
    target = rel_tol * np.linalg.norm(a)
    sweep = 0
    while True:
        if _offdiag_norm(a) <= target:
            return np.diagonal(a).copy(), v, sweep, True
        if sweep >= max_sweeps:
            return np.diagonal(a).copy(), v, sweep, False
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.hypot(1.0, tau))
                else:
                    t = -1.0 / (-tau + math.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq


def rk4_linear(m_in, x0_in, h, n_steps, stride):
    """Classical RK4 on xdot = M x; record every ``stride`` steps.

    Returns (records, bad_step) with bad_step = -1 when every state stayed finite.
    """
    m = np.ascontiguousarray(m_in, dtype=np.float64)
    x = np.array(x0_in, dtype=np.float64)
    rec = np.empty((n_steps // stride + 1, x.size))
    rec[0] = x
    r = 0
    half = 0.5 * h
    sixth = h / 6.0
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            k1 = m @ x
            k2 = m @ (x + half * k1)
            k3 = m @ (x + half * k2)
            k4 = m @ (x + h * k3)
            x = x + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)):
                return rec, step
            if step % stride == 0:
                r += 1
                rec[r] = x
    return rec, -1
