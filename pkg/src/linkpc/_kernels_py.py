"""Pure-Python implementations of the hot simulation kernels.

Same signatures and in-place semantics as the compiled ``_kernels`` module;
used when the extension is unavailable or ``LINKPC_PURE_PYTHON=1``.
"""

import math

import numpy as np


def unit_disk_edges(xs, ys, r):
    n = len(xs)
    ii = []
    jj = []
    for a in range(n):
        xa = float(xs[a])
        ya = float(ys[a])
        for b in range(a + 1, n):
            dx = xa - float(xs[b])
            dy = ya - float(ys[b])
            if math.sqrt(dx * dx + dy * dy) <= r:
                ii.append(a)
                jj.append(b)
    return np.array(ii, dtype=np.int64), np.array(jj, dtype=np.int64)


def _charge(i, cost, e_res, spent, alive):
    avail = e_res[i]
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


def charge(i, cost, e_res, spent, alive):
    """Debit ``cost`` from node ``i``; returns the energy actually drawn.

    A node that cannot afford the cost spends what it has and dies.
    """
    return _charge(i, cost, e_res, spent, alive)


def deliver(nbrs, p, draws, e_res, spent, alive, rx_cost, out):
    rx_total = 0.0
    for k in range(len(nbrs)):
        out[k] = 0
        r = nbrs[k]
        if alive[r] and draws[k] < p[k]:
            if e_res[r] >= rx_cost:
                out[k] = 1
            rx_total += _charge(r, rx_cost, e_res, spent, alive)
    return rx_total


def probe_round(src, dst, p, draws, hist, slot, e_res, spent, alive, tx_cost, rx_cost, sent):
    n = len(e_res)
    tx_total = 0.0
    rx_total = 0.0
    for i in range(n):
        sent[i] = 0
        if alive[i]:
            if e_res[i] >= tx_cost:
                sent[i] = 1
            tx_total += _charge(i, tx_cost, e_res, spent, alive)
    for e in range(len(src)):
        ok = 0
        s = src[e]
        d = dst[e]
        if sent[s] and alive[d] and draws[e] < p[e]:
            if e_res[d] >= rx_cost:
                ok = 1
            rx_total += _charge(d, rx_cost, e_res, spent, alive)
        hist[e, slot] = ok
    return tx_total, rx_total


def window_ratios(hist, n_valid, out):
    n_edges, width = hist.shape
    if n_valid <= 0:
        for e in range(n_edges):
            out[e] = 0.0
        return
    for e in range(n_edges):
        total = 0
        for w in range(width):
            total += hist[e, w]
        out[e] = total / n_valid
