# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def unit_disk_edges(double[::1] xs, double[::1] ys, double r):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t a, b, m = 0
    cdef double dx, dy
    ii = np.empty(n * (n - 1) // 2 if n > 1 else 0, dtype=np.int64)
    jj = np.empty_like(ii)
    cdef long long[::1] iv = ii
    cdef long long[::1] jv = jj
    for a in range(n):
        for b in range(a + 1, n):
            dx = xs[a] - xs[b]
            dy = ys[a] - ys[b]
            if sqrt(dx * dx + dy * dy) <= r:
                iv[m] = a
                jv[m] = b
                m += 1
    return ii[:m].copy(), jj[:m].copy()


cdef inline double _charge(Py_ssize_t i, double cost, double[::1] e_res,
                           double[::1] spent, unsigned char[::1] alive) noexcept:
    cdef double avail = e_res[i]
    if avail >= cost:
        e_res[i] = avail - cost
        spent[i] += cost
        if e_res[i] <= 0.0:
            alive[i] = 0
        return cost
    e_res[i] = 0.0
    spent[i] += avail
    alive[i] = 0
    return avail


def charge(Py_ssize_t i, double cost, double[::1] e_res, double[::1] spent,
           unsigned char[::1] alive):
    return _charge(i, cost, e_res, spent, alive)


def deliver(long long[::1] nbrs, double[::1] p, double[::1] draws, double[::1] e_res,
            double[::1] spent, unsigned char[::1] alive, double rx_cost,
            unsigned char[::1] out):
    cdef Py_ssize_t k, r
    cdef double rx_total = 0.0
    for k in range(nbrs.shape[0]):
        out[k] = 0
        r = nbrs[k]
        if alive[r] and draws[k] < p[k]:
            if e_res[r] >= rx_cost:
                out[k] = 1
            rx_total += _charge(r, rx_cost, e_res, spent, alive)
    return rx_total


def probe_round(long long[::1] src, long long[::1] dst, double[::1] p, double[::1] draws,
                unsigned char[:, ::1] hist, Py_ssize_t slot, double[::1] e_res,
                double[::1] spent, unsigned char[::1] alive, double tx_cost,
                double rx_cost, unsigned char[::1] sent):
    cdef Py_ssize_t n = e_res.shape[0]
    cdef Py_ssize_t i, e, s, d
    cdef unsigned char ok
    cdef double tx_total = 0.0, rx_total = 0.0
    for i in range(n):
        sent[i] = 0
        if alive[i]:
            if e_res[i] >= tx_cost:
                sent[i] = 1
            tx_total += _charge(i, tx_cost, e_res, spent, alive)
    for e in range(src.shape[0]):
        ok = 0
        s = src[e]
        d = dst[e]
        if sent[s] and alive[d] and draws[e] < p[e]:
            if e_res[d] >= rx_cost:
                ok = 1
            rx_total += _charge(d, rx_cost, e_res, spent, alive)
        hist[e, slot] = ok
    return tx_total, rx_total


def window_ratios(unsigned char[:, ::1] hist, Py_ssize_t n_valid, double[::1] out):
    cdef Py_ssize_t e, w, total
    cdef Py_ssize_t n_edges = hist.shape[0], width = hist.shape[1]
    for e in range(n_edges):
        if n_valid <= 0:
            out[e] = 0.0
            continue
        total = 0
        for w in range(width):
            total += hist[e, w]
        out[e] = <double>total / n_valid
