# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled beampattern kernel: the hot inner loop of every Monte Carlo
campaign.  Semantics match kernels._reference.rho_pointwise exactly."""

import numpy as np

from libc.math cimport cos, sin

cdef double TWO_PI = 6.283185307179586476925287


def rho_pointwise(double[:, ::1] m, double[::1] q, double[::1] p, out=None):
    cdef Py_ssize_t n_trials = m.shape[0]
    cdef Py_ssize_t n = m.shape[1]
    cdef Py_ssize_t g_count = q.shape[0]
    if p.shape[0] != g_count:
        raise ValueError("q and p must have equal length")
    if out is None:
        out = np.empty((n_trials, g_count), dtype=complex)
    cdef double complex[:, ::1] res = out
    cdef Py_ssize_t t, g, i
    cdef double centre = (n - 1) / 2.0
    cdef double qg, pg, ang, acc_re, acc_im
    with nogil:
        for t in range(n_trials):
            for g in range(g_count):
                qg = q[g]
                pg = p[g]
                acc_re = 0.0
                acc_im = 0.0
                for i in range(n):
                    ang = TWO_PI * ((i - centre) * qg + m[t, i] * pg)
                    acc_re += cos(ang)
                    acc_im += sin(ang)
                res[t, g] = (acc_re / n) + 1j * (acc_im / n)
    return out
