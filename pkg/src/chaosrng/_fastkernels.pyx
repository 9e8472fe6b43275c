# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernels: the hot inner loops of stream generation.

Mirrors _pykernels.py statement for statement; both backends must produce
bit-identical streams for the same inputs.
"""
from libc.math cimport log2

cdef double NUDGE = 1e-12
cdef double EDGE = 1e-15


cdef inline double _advance(double x, signed char[::1] kinds, double[::1] bounds,
                            double[::1] p0, double[::1] p1, double[::1] p2,
                            Py_ssize_t nb, double eta) noexcept:
    cdef Py_ssize_t j, k
    cdef double d, y
    for k in range(nb + 1):
        d = x - bounds[k]
        if -NUDGE < d < NUDGE:
            x = bounds[k] + NUDGE if bounds[k] + NUDGE < 1.0 else bounds[k] - NUDGE
            break
    j = nb - 1
    for k in range(nb - 1):
        if x < bounds[k + 1]:
            j = k
            break
    if kinds[j] == 0:
        y = p0[j] * x + p1[j]
    else:
        y = log2(p0[j] * x + p1[j]) - p2[j]
    y = y + eta
    if y < EDGE:
        y = EDGE
    elif y > 1.0 - EDGE:
        y = 1.0 - EDGE
    return y


def bits_from_trajectory(signed char[::1] kinds, double[::1] bounds,
                         double[::1] p0, double[::1] p1, double[::1] p2,
                         double threshold, double x0, double[::1] noise,
                         unsigned char[::1] out):
    """Fill ``out`` with threshold bits along the trajectory; return final state."""
    cdef Py_ssize_t nb = kinds.shape[0]
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t i
    cdef double x = x0
    for i in range(n):
        out[i] = 1 if x >= threshold else 0
        x = _advance(x, kinds, bounds, p0, p1, p2, nb, noise[i])
    return x


def trajectory(signed char[::1] kinds, double[::1] bounds,
               double[::1] p0, double[::1] p1, double[::1] p2,
               double x0, double[::1] noise, double[::1] out):
    """Fill ``out`` with x_1..x_n; return the final state (== out[-1])."""
    cdef Py_ssize_t nb = kinds.shape[0]
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t i
    cdef double x = x0
    for i in range(n):
        x = _advance(x, kinds, bounds, p0, p1, p2, nb, noise[i])
        out[i] = x
    return x
