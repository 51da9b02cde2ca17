# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: cyclic Jacobi sweeps and sparse RK4 stepping.

Mirrors ``_pykernels`` exactly in contract; see ``lrsync.kernels``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot, isfinite

cnp.import_array()


cdef double _offdiag_norm(double[:, ::1] a, Py_ssize_t n) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += a[i, j] * a[i, j]
    return sqrt(acc)


def jacobi_eigh(a_in, double rel_tol, int max_sweeps):
    """Return (diag, V, sweeps, converged) for symmetric ``a_in``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a_arr = np.array(a_in, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = a_arr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] v = v_arr
    cdef double fro = 0.0, target, apq, tau, t, c, s, x, y
    cdef Py_ssize_t i, p, q, k
    cdef int sweep = 0
    cdef bint converged = False

    for i in range(n):
        for k in range(n):
            fro += a[i, k] * a[i, k]
    target = rel_tol * sqrt(fro)

    with nogil:
        while True:
            if _offdiag_norm(a, n) <= target:
                converged = True
                break
            if sweep >= max_sweeps:
                break
            sweep += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if tau >= 0.0:
                        t = 1.0 / (tau + hypot(1.0, tau))
                    else:
                        t = -1.0 / (-tau + hypot(1.0, tau))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    for k in range(n):
                        x = a[k, p]
                        y = a[k, q]
                        a[k, p] = c * x - s * y
                        a[k, q] = s * x + c * y
                    for k in range(n):
                        x = a[p, k]
                        y = a[q, k]
                        a[p, k] = c * x - s * y
                        a[q, k] = s * x + c * y
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(n):
                        x = v[k, p]
                        y = v[k, q]
                        v[k, p] = c * x - s * y
                        v[k, q] = s * x + c * y

    return np.diagonal(a_arr).copy(), v_arr, sweep, converged


cdef inline void _csr_matvec(Py_ssize_t n, const Py_ssize_t* indptr, const Py_ssize_t* indices,
                             const double* data, const double* x, double* out) nogil:
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * x[indices[k]]
        out[i] = acc


def rk4_linear(m_in, x0_in, double h, Py_ssize_t n_steps, Py_ssize_t stride):
    """Classical RK4 on xdot = M x; record every ``stride`` steps.

    Returns (records, bad_step) with bad_step = -1 when every state stayed finite.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] m_arr = np.ascontiguousarray(m_in, dtype=np.float64)
    cdef Py_ssize_t n = m_arr.shape[0]
    rows, cols = np.nonzero(m_arr)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] indices_arr = np.ascontiguousarray(cols, dtype=np.intp)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] data_arr = np.ascontiguousarray(m_arr[rows, cols])
    cdef cnp.ndarray[cnp.intp_t, ndim=1] indptr_arr = np.zeros(n + 1, dtype=np.intp)
    indptr_arr[1:] = np.cumsum(np.bincount(rows, minlength=n))

    cdef Py_ssize_t n_rec = n_steps // stride + 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rec_arr = np.empty((n_rec, n), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] work_arr = np.empty((6, n), dtype=np.float64)
    cdef double[:, ::1] rec = rec_arr
    cdef double[:, ::1] work = work_arr
    cdef const double[::1] x0 = np.ascontiguousarray(x0_in, dtype=np.float64)

    cdef Py_ssize_t* indptr = <Py_ssize_t*> cnp.PyArray_DATA(indptr_arr)
    cdef Py_ssize_t* indices = <Py_ssize_t*> cnp.PyArray_DATA(indices_arr)
    cdef double* data = <double*> cnp.PyArray_DATA(data_arr)
    cdef double* x = &work[0, 0]
    cdef double* k1 = &work[1, 0]
    cdef double* k2 = &work[2, 0]
    cdef double* k3 = &work[3, 0]
    cdef double* k4 = &work[4, 0]
    cdef double* tmp = &work[5, 0]
    cdef double half = 0.5 * h, sixth = h / 6.0
    cdef Py_ssize_t step, i, r = 0, bad = -1
    cdef bint finite

    for i in range(n):
        x[i] = x0[i]
        rec[0, i] = x0[i]

    with nogil:
        for step in range(1, n_steps + 1):
            _csr_matvec(n, indptr, indices, data, x, k1)
            for i in range(n):
                tmp[i] = x[i] + half * k1[i]
            _csr_matvec(n, indptr, indices, data, tmp, k2)
            for i in range(n):
                tmp[i] = x[i] + half * k2[i]
            _csr_matvec(n, indptr, indices, data, tmp, k3)
            for i in range(n):
                tmp[i] = x[i] + h * k3[i]
            _csr_matvec(n, indptr, indices, data, tmp, k4)
            finite = True
            for i in range(n):
                x[i] = x[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if not isfinite(x[i]):
                    finite = False
            if not finite:
                bad = step
                break
            if step % stride == 0:
                r += 1
                for i in range(n):
                    rec[r, i] = x[i]

    return rec_arr, bad
