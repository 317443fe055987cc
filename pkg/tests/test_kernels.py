import numpy as np
import pytest

from linkpc import _kernels_py, kernels

compiled = pytest.importorskip("linkpc._kernels")


def state(n, rng, low=0.0, high=1e-3):
    e_res = rng.uniform(low, high, n)
    return e_res, np.zeros(n), (e_res > 0).astype(np.uint8)


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("seed", range(5))
def test_unit_disk_edges_agree(seed):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0, 100, 80)
    ys = rng.uniform(0, 100, 80)
    # put one pair exactly on the boundary
    xs[1], ys[1] = xs[0] + 30.0, ys[0]
    a = _kernels_py.unit_disk_edges(xs, ys, 30.0)
    b = compiled.unit_disk_edges(xs, ys, 30.0)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@pytest.mark.parametrize("seed", range(5))
def test_probe_round_agrees(seed):
    rng = np.random.default_rng(seed)
    n, m, w = 30, 120, 7
    src = rng.integers(0, n, m).astype(np.int64)
    dst = rng.integers(0, n, m).astype(np.int64)
    p = rng.uniform(0.3, 1.0, m)
    draws = rng.random(m)
    results = []
    for mod in (_kernels_py, compiled):
        e_res, spent, alive = state(n, np.random.default_rng(seed + 100), 0.0, 4e-5)
        hist = np.zeros((m, w), dtype=np.uint8)
        sent = np.zeros(n, dtype=np.uint8)
        totals = mod.probe_round(src, dst, p, draws, hist, 3, e_res, spent, alive, 1e-5, 6e-6, sent)
        ratios = np.zeros(m)
        mod.window_ratios(hist, 4, ratios)
        results.append((totals, e_res, spent, alive, hist, sent, ratios))
    (ta, *arrs_a), (tb, *arrs_b) = results
    assert ta == tb
    for x, y in zip(arrs_a, arrs_b):
        assert np.array_equal(x, y)


@pytest.mark.parametrize("seed", range(5))
def test_deliver_and_charge_agree(seed):
    rng = np.random.default_rng(seed)
    n = 20
    nbrs = rng.permutation(n)[:12].astype(np.int64)
    p = rng.uniform(0.2, 1.0, 12)
    draws = rng.random(12)
    results = []
    for mod in (_kernels_py, compiled):
        e_res, spent, alive = state(n, np.random.default_rng(seed), 0.0, 2e-5)
        out = np.zeros(12, dtype=np.uint8)
        rx = mod.deliver(nbrs, p, draws, e_res, spent, alive, 1e-5, out)
        drawn = mod.charge(int(nbrs[0]), 3e-5, e_res, spent, alive)
        results.append((rx, drawn, e_res, spent, alive, out))
    for x, y in zip(*results):
        assert np.array_equal(np.asarray(x), np.asarray(y))


def test_charge_semantics():
    e_res = np.array([1.0, 0.5])
    spent = np.zeros(2)
    alive = np.ones(2, dtype=np.uint8)
    for mod in (_kernels_py, compiled):
        e, s, a = e_res.copy(), spent.copy(), alive.copy()
        assert mod.charge(0, 0.25, e, s, a) == 0.25 and a[0] == 1
        assert mod.charge(1, 0.75, e, s, a) == 0.5
        assert e[1] == 0.0 and a[1] == 0 and s[1] == 0.5
        assert mod.charge(0, 0.75, e, s, a) == 0.75 and e[0] == 0.0 and a[0] == 0


def test_dead_receivers_pay_nothing():
    for mod in (_kernels_py, compiled):
        e_res = np.array([1.0, 0.0, 1.0])
        spent = np.zeros(3)
        alive = np.array([1, 0, 1], dtype=np.uint8)
        out = np.zeros(2, dtype=np.uint8)
        rx = mod.deliver(np.array([1, 2], dtype=np.int64), np.ones(2), np.zeros(2), e_res, spent, alive, 0.1, out)
        assert list(out) == [0, 1] and rx == 0.1 and spent[1] == 0.0
