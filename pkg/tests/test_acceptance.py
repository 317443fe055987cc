"""Acceptance criteria A1-A7.  Each test prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python3 tests/test_acceptance.py``.
"""

import math
import os
import random
import statistics
import subprocess
import sys
import time

import pytest

from linkpc.baselines import HeedParams, VoidRegion, gpsr_greedy_next_hop, heed_ch_prob
from linkpc.clustering import backoff_wait, calc_priority
from linkpc.config import from_dict
from linkpc.netmodel import RadioParams, compute_etx, compute_ptx, rx_energy, tx_energy
from linkpc.sim import Simulation
from linkpc.sim.invariants import check_clusters

RESULTS = {}
BALANCE = []


def report(name, ok, detail):
    line = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS[name] = line
    print(line, file=sys.__stdout__, flush=True)
    return ok


def run_sim(cfg, trace=False):
    sim = Simulation(cfg, trace_routes=trace)
    series = sim.run()
    series.attach(sim)
    drawn, debits = sim.energy_balance()
    BALANCE.append(abs(drawn - debits) / drawn if drawn else abs(debits))
    return sim, series


def close(a, b, rel=1e-12):
    return math.isclose(a, b, rel_tol=rel, abs_tol=0.0) or a == b


# A1 ------------------------------------------------------------------------

def test_a1_formula_oracles():
    t0 = time.perf_counter()
    rp = RadioParams()
    hp = HeedParams(0.05, 2.0)
    checks = [
        (compute_etx(1.0, 1.0), 1.0),
        (compute_etx(0.5, 0.5), 4.0),
        (compute_etx(0.9, 0.8), 1.3888888888888888),
        (tx_energy(0, 50, rp), 0.0),
        (tx_energy(1000, 50, rp), 7.5e-5),
        (tx_energy(1000, 100, rp), 1.8e-4),
        (rx_energy(0, rp), 0.0),
        (rx_energy(1000, rp), 5e-5),
        (compute_ptx(0.0, 1.5, 1e-4), 0.0),
        (compute_ptx(0.5, 2.0, 7.5e-5), 3333.3333333333335),
        (compute_ptx(7.5e-5, 1.0, 7.5e-5), 1.0),
        (heed_ch_prob(hp, 2.0), 0.05),
        (heed_ch_prob(hp, 1.0), 0.025),
        (heed_ch_prob(hp, 0.0), 0.0),
        (backoff_wait(0.25, 1.0, jitter=0.0), 4.0),
        (backoff_wait(2.0, 1.0, jitter=0.0), 0.0),
        (backoff_wait(1.0, 0.01, jitter=0.0), 0.01),
    ]
    bad = [(got, want) for got, want in checks if not close(got, want)]
    d0 = rp.d0
    fs = 1000 * rp.e_elec + 1000 * rp.eps_fs * d0 * d0
    mp = 1000 * rp.e_elec + 1000 * rp.eps_mp * d0 ** 4
    continuity = abs(fs - mp) / fs
    elapsed = time.perf_counter() - t0
    ok = not bad and continuity <= 1e-12 and elapsed < 1.0
    report("A1", ok, f"{len(checks) - len(bad)}/{len(checks)} oracle values within 1e-12, "
                     f"d0 branch gap {continuity:.1e}, {elapsed:.3f}s")
    assert ok, bad


# A2 ------------------------------------------------------------------------

def reference_priority(ptx, n_req):
    sat, unsat = [], []
    for _, v in ptx:
        if v >= n_req:
            sat.append(v)
        else:
            unsat.append(v)
    if sat:
        best = sat[0]
        for v in sat:
            if v < best:
                best = v
        return best
    best = unsat[0]
    for v in unsat:
        if v > best:
            best = v
    return best


def test_a2_priority_oracle():
    t0 = time.perf_counter()
    rng = random.Random(2024)
    mismatches = 0
    for _ in range(1000):
        size = rng.randint(1, 20)
        ptx = [(i, rng.choice([rng.uniform(0, 5000), float(rng.randint(0, 50))])) for i in range(size)]
        n_req = rng.choice([rng.uniform(0.01, 5000), float(rng.randint(1, 50))])
        if calc_priority(ptx, n_req) != reference_priority(ptx, n_req):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 5.0
    report("A2", ok, f"{1000 - mismatches}/1000 exact matches, {elapsed:.2f}s")
    assert ok


# A3 ------------------------------------------------------------------------

A3_BASE = {"node_count": 100, "field_width": 200.0, "field_height": 200.0, "comm_range": 30.0,
           "link_p_true": 1.0, "duration": 60.0, "strategy": "link-ptx"}


def test_a3_cluster_invariants():
    t0 = time.perf_counter()
    failures = []
    for seed in range(50):
        sim, _ = run_sim(from_dict({**A3_BASE, "seed": seed}))
        rep = check_clusters(sim)
        if not rep.ok:
            failures.append((seed, rep))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60.0
    report("A3", ok, f"{50 - len(failures)}/50 topologies with no adjacent CHs, no orphan ODs, "
                     f"no control packets, no gateway shortfall in clusters with foreign contact; {elapsed:.1f}s")
    assert ok, failures[:3]


# A4 ------------------------------------------------------------------------

# Priority is PTX (hundreds to thousands of reports); a backoff scale of 1e6
# maps that range onto tens to hundreds of slots so the priority order shows
# in the waits.  With scale 1 every wait collapses to jitter only.
A4_SCENARIO = {**A3_BASE, "link_p_true": [0.6, 1.0], "e_ini": 0.5, "duration": 300.0,
               "backoff_scale": 1e6}


def sign_test_p(losses, n):
    """P(X >= losses) for X ~ Binomial(n, 1/2)."""
    if n == 0:
        return 1.0
    return sum(math.comb(n, k) for k in range(losses, n + 1)) / 2 ** n


def test_a4_directional_efficiency():
    t0 = time.perf_counter()
    seeds = range(1, 21)
    life = {}
    epr = {}
    for strategy in ("link-ptx", "random-pc"):
        life[strategy], epr[strategy] = [], []
        for seed in seeds:
            _, series = run_sim(from_dict({**A4_SCENARIO, "strategy": strategy, "seed": seed}))
            life[strategy].append(series.summary["network_lifetime_s"])
            epr[strategy].append(series.summary["energy_per_delivered_report_j"])
    pairs_l = list(zip(life["link-ptx"], life["random-pc"]))
    pairs_e = list(zip(epr["link-ptx"], epr["random-pc"]))
    l_win = sum(a > b for a, b in pairs_l)
    l_loss = sum(a < b for a, b in pairs_l)
    e_win = sum(a < b for a, b in pairs_e)
    e_loss = sum(a > b for a, b in pairs_e)
    p_life = sign_test_p(l_loss, l_win + l_loss)
    p_energy = sign_test_p(e_loss, e_win + e_loss)
    mean_l = {k: statistics.fmean(v) for k, v in life.items()}
    mean_e = {k: statistics.fmean(v) for k, v in epr.items()}
    elapsed = time.perf_counter() - t0
    ok = (mean_l["link-ptx"] >= mean_l["random-pc"] and mean_e["link-ptx"] <= mean_e["random-pc"]
          and p_life >= 0.05 and p_energy >= 0.05 and elapsed < 300.0)
    report("A4", ok, f"lifetime {mean_l['link-ptx']:.1f}s vs {mean_l['random-pc']:.1f}s "
                     f"(wins/losses {l_win}/{l_loss}, sign p={p_life:.3f}); energy/report "
                     f"{mean_e['link-ptx']:.3e} vs {mean_e['random-pc']:.3e} J "
                     f"(wins/losses {e_win}/{e_loss}, sign p={p_energy:.3f}); {elapsed:.0f}s")
    assert ok


# A5 ------------------------------------------------------------------------

def oracle_greedy(pos, r, src, dst):
    """Brute-force greedy walk straight from coordinates; None on a local minimum."""
    path = [src]
    here = src
    tx, ty = pos[dst]
    while here != dst:
        hx, hy = pos[here]
        best, best_d = None, math.hypot(hx - tx, hy - ty)
        for j, (x, y) in enumerate(pos):
            if j == here or math.hypot(x - hx, y - hy) > r:
                continue
            d = math.hypot(x - tx, y - ty)
            if d < best_d or (d == best_d and best is not None and j < best):
                best, best_d = j, d
        if best is None:
            return None
        path.append(best)
        here = best
    return path


GPSR_BASE = {"node_count": 30, "field_width": 100.0, "field_height": 100.0, "comm_range": 30.0,
             "strategy": "gpsr", "e_ini": math.inf, "duration": 30.0, "query_interval": 0.0}


def test_a5_gpsr_greedy():
    t0 = time.perf_counter()
    accepted = 0
    seed = 0
    problems = []
    while accepted < 100:
        seed += 1
        cfg = from_dict({**GPSR_BASE, "seed": seed})
        probe = Simulation(cfg)
        pos = [(n.x, n.y) for n in probe.nodes]
        oracle = {i: oracle_greedy(pos, cfg.comm_range, i, probe.sink) for i in range(len(pos))}
        if any(p is None for p in oracle.values()):
            continue
        accepted += 1
        sim, series = run_sim(cfg, trace=True)
        tgt = pos[sim.sink]
        if series.final.reports_sent == 0 or series.final.reports_delivered != series.final.reports_sent:
            problems.append((seed, "undelivered"))
        for (origin, _), route in sim.routes.items():
            d = [math.hypot(pos[h][0] - tgt[0], pos[h][1] - tgt[1]) for h in route]
            if any(b >= a for a, b in zip(d, d[1:])) or route != oracle[origin]:
                problems.append((seed, route))
    # constructed void: the only neighbour of A lies farther from the sink than A
    void_pos = [[60, 0], [0, 0], [0, 25], [20, 45], [45, 45], [60, 20]]
    vcfg = from_dict({**GPSR_BASE, "node_count": 6, "seed": 1, "placement": "explicit",
                      "positions": void_pos, "sink": 0, "query_region": [0, 0, 1, 1], "duration": 60.0})
    sim, series = run_sim(vcfg, trace=True)
    void_ok = (series.final.reports_sent > 0 and sim.voids == series.final.reports_sent
               and set(sim.route_status.values()) == {"void"}
               and all(len(set(r)) == len(r) for r in sim.routes.values()))
    try:
        gpsr_greedy_next_hop((0, 0), [(2, (0, 25))], (60, 0))
        void_ok = False
    except VoidRegion:
        pass
    elapsed = time.perf_counter() - t0
    ok = not problems and void_ok and elapsed < 30.0
    report("A5", ok, f"100 oracle-feasible topologies (of {seed} tried): "
                     f"{'all' if not problems else len(problems)} delivered with strictly decreasing routes; "
                     f"void topology {'reported' if void_ok else 'NOT reported'} with no loops; {elapsed:.1f}s")
    assert ok, problems[:3]


# A6 ------------------------------------------------------------------------

A6_CONFIGS = [
    {"node_count": 60, "seed": 3, "strategy": s, "field_width": 150.0, "field_height": 150.0,
     "link_p_true": [0.5, 1.0], "e_ini": 0.03, "sink_powered": False, "duration": 60.0}
    for s in ("link-ptx", "random-pc", "lic", "hcc", "heed", "gpsr")
]


def test_a6_determinism_and_conservation(tmp_path):
    t0 = time.perf_counter()
    identical = 0
    for raw in A6_CONFIGS:
        _, a = run_sim(from_dict(raw))
        _, b = run_sim(from_dict(raw))
        identical += a.to_csv() == b.to_csv()
    # the pure-Python kernels must produce the same bytes as the compiled ones
    cfg_path = tmp_path / "a6.yaml"
    cfg_path.write_text("\n".join(f"{k}: {v}" for k, v in A6_CONFIGS[0].items()) + "\n")
    outs = []
    for flag in ("0", "1"):
        env = {**os.environ, "LINKPC_PURE_PYTHON": flag}
        out = tmp_path / f"o{flag}"
        subprocess.run([sys.executable, "-m", "linkpc.cli", "run", str(cfg_path), "--out", str(out)],
                       check=True, env=env, capture_output=True)
        outs.append((out / "metrics.csv").read_bytes())
    worst = max(BALANCE)
    ok = identical == len(A6_CONFIGS) and outs[0] == outs[1] and worst <= 1e-9
    report("A6", ok, f"{identical}/{len(A6_CONFIGS)} reruns byte-identical, backends "
                     f"{'identical' if outs[0] == outs[1] else 'DIFFER'}; worst energy balance error "
                     f"{worst:.1e} over {len(BALANCE)} runs; {time.perf_counter() - t0:.1f}s")
    assert ok


# A7 ------------------------------------------------------------------------

def test_a7_etx_convergence():
    t0 = time.perf_counter()
    rates = {}
    for p in (0.5, 0.9):
        good = total = 0
        for seed in range(50):
            cfg = from_dict({"node_count": 2, "seed": seed, "strategy": "link-ptx", "placement": "explicit",
                             "positions": [[10, 10], [30, 10]], "link_p_true": p, "link_window": 200,
                             "duration": 199.0, "query_start": 1000.0, "e_ini": math.inf})
            sim, _ = run_sim(cfg)
            assert sim.probe_rounds == 200
            for est in sim.ratios:
                total += 1
                good += abs(est - p) < 0.1
        rates[p] = good / total
    elapsed = time.perf_counter() - t0
    ok = all(r >= 0.95 for r in rates.values()) and elapsed < 10.0
    report("A7", ok, ", ".join(f"p={p}: {100 * r:.0f}% of 100 links within 0.1" for p, r in rates.items())
           + f"; {elapsed:.1f}s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
