# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.  Signatures and results mirror ``qmeter._fallback``."""
import numpy as np

from libc.math cimport cos, sin


def wigner_accumulate(const double complex[:, ::1] amp,
                      const double complex[:, ::1] rho,
                      const long[:, ::1] mid_index,
                      Py_ssize_t n_mid):
    cdef Py_ssize_t n_o = amp.shape[0]
    cdef Py_ssize_t d = amp.shape[1]
    out = np.zeros((n_o, n_mid), dtype=np.complex128)
    cdef double complex[:, ::1] w = out
    cdef Py_ssize_t i, j, k
    cdef double complex a_ij
    for i in range(n_o):
        for j in range(d):
            a_ij = amp[i, j]
            for k in range(d):
                w[i, mid_index[j, k]] += a_ij * rho[j, k] * amp[i, k].conjugate()
    return out


def qq_closed_form(const double[::1] lam,
                   const double[::1] omega,
                   const double[::1] alpha_re,
                   const double[::1] alpha_im,
                   const double[::1] beta,
                   const double[::1] pn,
                   const double[::1] qn,
                   const double[::1] qp,
                   const double[::1] qnp):
    cdef Py_ssize_t n = lam.shape[0]
    p_post = np.empty(n, dtype=np.float64)
    diff = np.empty(n, dtype=np.float64)
    cdef double[::1] pp = p_post
    cdef double[::1] df = diff
    cdef Py_ssize_t t
    cdef double c, s, cc, ss, sc, u
    for t in range(n):
        c = cos(0.5 * lam[t])
        s = sin(0.5 * lam[t])
        cc = c * c
        ss = s * s
        sc = s * c
        u = 1.0 - pn[t]
        pp[t] = 0.5 * ((1.0 + cc + ss * pn[t]) * omega[t]
                       + 2.0 * sc * u * alpha_im[t]
                       + ss * u * beta[t])
        df[t] = 0.5 * (omega[t] * (2.0 * cc * qn[t] + ss * qp[t] * (1.0 + pn[t])
                                   - 2.0 * sc * qnp[t])
                       + 2.0 * alpha_re[t] * (ss * (qn[t] - qp[t] * pn[t]) + sc * qnp[t])
                       + 2.0 * alpha_im[t] * (sc * (qn[t] - qp[t]) - ss * qnp[t])
                       - beta[t] * ss * qp[t] * u)
    return p_post, diff
