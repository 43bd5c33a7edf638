# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot quadrature loops in ``cpfsim._kernels_py``.

Same contracts and discretisation; see the Python module for the scheme.
The convolution sums run forward over reversed copies of the propagator
arrays, in explicit real arithmetic with two interleaved accumulator
chains: the complex multiply-add latency chain, not flop count, limits
these loops.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef cnp.complex128_t cplx


cdef inline double complex _chain_dot(
    const double* a_re, const double* a_im,
    const double* b_re, const double* b_im,
    Py_ssize_t count,
) noexcept nogil:
    """sum_j a[j] * b[j] over complex values split into real/imag planes."""
    cdef double re0 = 0.0, im0 = 0.0, re1 = 0.0, im1 = 0.0
    cdef Py_ssize_t j = 0
    while j + 1 < count:
        re0 += a_re[j] * b_re[j] - a_im[j] * b_im[j]
        im0 += a_re[j] * b_im[j] + a_im[j] * b_re[j]
        re1 += a_re[j + 1] * b_re[j + 1] - a_im[j + 1] * b_im[j + 1]
        im1 += a_re[j + 1] * b_im[j + 1] + a_im[j + 1] * b_re[j + 1]
        j += 2
    if j < count:
        re0 += a_re[j] * b_re[j] - a_im[j] * b_im[j]
        im0 += a_re[j] * b_im[j] + a_im[j] * b_re[j]
    return (re0 + re1) + 1j * (im0 + im1)


cdef class _Planes:
    """Contiguous real/imag copies of a complex array."""
    cdef cnp.ndarray re
    cdef cnp.ndarray im
    cdef double* re_p
    cdef double* im_p

    def __cinit__(self, cnp.ndarray values):
        self.re = np.ascontiguousarray(values.real, dtype=np.float64)
        self.im = np.ascontiguousarray(values.imag, dtype=np.float64)
        self.re_p = <double*> cnp.PyArray_DATA(self.re)
        self.im_p = <double*> cnp.PyArray_DATA(self.im)


def volterra_trapezoid(f, double h):
    cdef cnp.ndarray[cplx, ndim=1] fa = np.ascontiguousarray(f, dtype=np.complex128)
    cdef Py_ssize_t n = fa.shape[0] - 1
    cdef cnp.ndarray[cplx, ndim=1] G = np.empty(n + 1, dtype=np.complex128)
    G[0] = 1.0
    if n == 0:
        return G
    # fr[j] = fa[n - j]: the step-i sum P = sum_k c_k fa[i+1-k] G[k] becomes
    # a forward pass of fr[n-i-1 + k] against G[k]
    cdef _Planes frp = _Planes(fa[::-1].copy())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g_re = np.empty(n + 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g_im = np.empty(n + 1, dtype=np.float64)
    g_re[0] = 1.0
    g_im[0] = 0.0
    cdef double complex I_prev = 0.0
    cdef double complex denom = 1.0 + h * h * fa[0] / 4.0
    cdef double complex P, G_next
    cdef double hh = 0.5 * h * h
    cdef Py_ssize_t i, base
    for i in range(n):
        base = n - i - 1
        # k = 0 term carries the half trapezoid weight and G[0] = 1
        P = 0.5 * (frp.re_p[base] + 1j * frp.im_p[base])
        if i >= 1:
            P = P + _chain_dot(
                frp.re_p + base + 1, frp.im_p + base + 1,
                <double*> cnp.PyArray_DATA(g_re) + 1,
                <double*> cnp.PyArray_DATA(g_im) + 1,
                i,
            )
        G_next = (G[i] - 0.5 * h * I_prev - hh * P) / denom
        G[i + 1] = G_next
        g_re[i + 1] = G_next.real
        g_im[i + 1] = G_next.imag
        I_prev = h * (P + 0.5 * fa[0] * G_next)
    return G


def two_time_trapezoid(f, G_t, G_tau, double h):
    cdef cnp.ndarray[cplx, ndim=1] fa = np.ascontiguousarray(f, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] Gt = np.ascontiguousarray(G_t, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] Gu = np.ascontiguousarray(G_tau, dtype=np.complex128)
    cdef Py_ssize_t n = Gt.shape[0] - 1
    cdef Py_ssize_t m = Gu.shape[0] - 1
    if fa.shape[0] < n + m + 1:
        raise ValueError(f"kernel samples cover {fa.shape[0] - 1} steps, need {n + m}")

    cdef _Planes fp = _Planes(fa)
    cdef _Planes gtr = _Planes(Gt[::-1].copy())
    cdef _Planes gur = _Planes(Gu[::-1].copy())
    # Stage 1 writes l-major, stage 2 reads i-major; transposing between the
    # stages keeps every inner loop on contiguous memory
    cdef cnp.ndarray[cplx, ndim=2] H = np.empty((m + 1, n + 1), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=2] G2 = np.zeros((n + 1, m + 1), dtype=np.complex128)
    cdef double complex full, gt0, gu0
    cdef Py_ssize_t i, j, l, base
    gt0 = Gt[0]
    gu0 = Gu[0]

    # Stage 1: H[l, i] = h * trapezoid_k( fa[k+l] Gt[i-k], k = 0..i )
    #                  = h * sum_k fa[k+l] Gtr[n-i+k], ends at half weight
    for l in range(m + 1):
        H[l, 0] = 0.0
        for i in range(1, n + 1):
            base = n - i
            full = _chain_dot(
                fp.re_p + l, fp.im_p + l,
                gtr.re_p + base, gtr.im_p + base,
                i + 1,
            )
            full = full - 0.5 * (
                (fp.re_p[l] + 1j * fp.im_p[l]) * (gtr.re_p[base] + 1j * gtr.im_p[base])
                + (fp.re_p[i + l] + 1j * fp.im_p[i + l]) * gt0
            )
            H[l, i] = h * full

    cdef _Planes hc = _Planes(np.ascontiguousarray(H.T))  # (n+1) x (m+1)
    cdef Py_ssize_t row = m + 1  # hc row stride in elements

    # Stage 2: G2[i, j] = h * trapezoid_l( Hc[i, l] Gu[j-l], l = 0..j )
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            base = m - j
            full = _chain_dot(
                hc.re_p + i * row, hc.im_p + i * row,
                gur.re_p + base, gur.im_p + base,
                j + 1,
            )
            full = full - 0.5 * (
                (hc.re_p[i * row] + 1j * hc.im_p[i * row])
                * (gur.re_p[base] + 1j * gur.im_p[base])
                + (hc.re_p[i * row + j] + 1j * hc.im_p[i * row + j]) * gu0
            )
            G2[i, j] = h * full
    return G2
