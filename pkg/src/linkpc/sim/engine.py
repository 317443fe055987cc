"""Deterministic discrete-event simulation of a sensor field under one strategy.

Traffic model: the sink floods a query every ``query_interval`` seconds; every
node forwards the first copy of each query once, nodes inside the query
region become sources and report to the sink at ``n_req`` reports per second.
Under a clustering strategy reports climb the tree of query forwarders,
preferring forwarders that were on the cluster backbone (CH/GW/D_GW); under
``gpsr`` they are forwarded greedily towards the sink position.

All randomness comes from four streams spawned from ``config.seed``:
topology, link qualities, packet loss and protocol jitter.  Topology and link
streams do not depend on the strategy, so runs of different strategies with
the same seed see the same field.
"""

from __future__ import annotations

import heapq
import math
import random
from typing import Dict, List, Optional, Tuple

import numpy as np

from linkpc import kernels
from linkpc.baselines import HeedParams, VoidRegion, gpsr_greedy_next_hop, heed_election_round
from linkpc.clustering import (
    BACKBONE,
    GATEWAYS,
    ClusterState,
    ContentionRecord,
    Packet,
    PriorityUndefined,
    backoff_wait,
    calc_priority,
    on_receive_report,
    piggyback_state,
)
from linkpc.config import ScenarioConfig
from linkpc.netmodel import Position, build_graph, compute_etx, compute_ptx, rx_energy, tx_energy
from linkpc.sim.metrics import MetricsRow, MetricsSeries

IN = ClusterState.IN
CH = ClusterState.CH
GW = ClusterState.GW
D_GW = ClusterState.D_GW
OD = ClusterState.OD
CH_R = ClusterState.CH_R
GW_R = ClusterState.GW_R

# event kinds; heap entries are (time, seq, kind, a, b)
PROBE, QUERY, FORWARD, REPORT, ARRIVAL, DEADLINE, SAMPLE = range(7)
GENERATORS = (PROBE, QUERY, REPORT, SAMPLE)


class Node:
    __slots__ = (
        "id", "x", "y", "state", "cluster", "epoch", "contention", "token", "queue", "parent",
        "candidates", "forwarded", "pending_forward", "reached", "is_source", "report_seq",
        "known", "busy_until", "query", "dgw_peer", "armed",
    )

    def __init__(self, nid: int, x: float, y: float):
        self.id = nid
        self.x = x
        self.y = y
        self.state = IN
        self.cluster: Optional[int] = None
        self.epoch = 0
        self.contention: Optional[ContentionRecord] = None
        self.token = 0
        self.queue: List[Packet] = []
        self.parent: Optional[int] = None
        self.candidates: List[Tuple[int, bool]] = []
        self.forwarded = False
        self.pending_forward = False
        self.reached = False
        self.is_source = False
        self.report_seq = 0
        self.known: Dict[int, Tuple[ClusterState, Optional[int]]] = {}
        self.busy_until = 0.0
        self.query: Optional[Packet] = None
        self.dgw_peer: Optional[int] = None
        self.armed = False


def _streams(seed: int):
    ss = np.random.SeedSequence(seed)
    topo, links, loss, proto = ss.spawn(4)
    return (np.random.default_rng(topo), np.random.default_rng(links),
            np.random.default_rng(loss), random.Random(int(proto.generate_state(1)[0])))


def place_nodes(cfg: ScenarioConfig, rng) -> Tuple[List[Position], int]:
    """Node positions for ``cfg``; returns ``(positions, attempts)``."""
    n = cfg.node_count
    w, h = cfg.field_width, cfg.field_height
    if cfg.placement == "explicit":
        return [Position(x, y) for x, y in cfg.positions], 1
    if cfg.placement == "grid":
        cols = math.ceil(math.sqrt(n))
        rows = math.ceil(n / cols)
        return [Position((k % cols + 0.5) * w / cols, (k // cols + 0.5) * h / rows) for k in range(n)], 1
    attempts = 0
    while True:
        attempts += 1
        xy = rng.uniform((0.0, 0.0), (w, h), size=(n, 2))
        pos = [Position(float(x), float(y)) for x, y in xy]
        if not cfg.require_connected or n == 1:
            return pos, attempts
        if build_graph(pos, cfg.comm_range).is_connected():
            return pos, attempts
        if attempts >= 1000:
            raise RuntimeError("no connected placement found in 1000 attempts; "
                               "raise comm_range or node density")


class Simulation:
    """One scenario run.  ``run()`` returns the :class:`MetricsSeries`."""

    def __init__(self, cfg: ScenarioConfig, trace_routes: bool = False):
        self.cfg = cfg
        self.trace_routes = trace_routes
        self.topo_rng, self.link_rng, self.loss_rng, self.rng = _streams(cfg.seed)
        self.radio = cfg.radio.params()
        self.heed = HeedParams(cfg.c_prob, cfg.e_ini if math.isfinite(cfg.e_ini) else 1.0)
        self.clustering = cfg.clustering
        self.warnings: List[str] = []

        positions, self.placement_attempts = place_nodes(cfg, self.topo_rng)
        self.graph = build_graph(positions, cfg.comm_range)
        n = self.n = len(positions)
        self.nodes = [Node(i, p.x, p.y) for i, p in enumerate(positions)]
        self.sink = self._pick_sink(positions)
        if not self.graph.is_connected() and len(self.graph.reachable(self.sink)) < n:
            self.warnings.append("topology is disconnected: some nodes cannot reach the sink")

        # directed links, grouped by sender
        src, dst = [], []
        for a in range(n):
            for b in sorted(self.graph.neighbors(a)):
                src.append(a)
                dst.append(b)
        self.src = np.array(src, dtype=np.int64)
        self.dst = np.array(dst, dtype=np.int64)
        m = len(src)
        lp = cfg.link_p_true
        if isinstance(lp, tuple):
            self.p_true = self.link_rng.uniform(lp[0], lp[1], size=m)
        else:
            self.p_true = np.full(m, float(lp))
        self.eid: Dict[Tuple[int, int], int] = {(a, b): k for k, (a, b) in enumerate(zip(src, dst))}
        self.rev = np.array([self.eid[(b, a)] for a, b in zip(src, dst)], dtype=np.int64)
        self.nbrs: List[np.ndarray] = []
        self.nbr_p: List[np.ndarray] = []
        self.nbr_list: List[List[int]] = []
        self.nbr_dist: List[List[float]] = []
        self.nbr_eid: List[List[int]] = []
        for a in range(n):
            ks = [k for k in range(m) if src[k] == a] if m else []
            self.nbr_list.append([dst[k] for k in ks])
            self.nbr_eid.append(ks)
            self.nbrs.append(np.array([dst[k] for k in ks], dtype=np.int64))
            self.nbr_p.append(np.array([self.p_true[k] for k in ks], dtype=np.float64))
            self.nbr_dist.append([positions[a].distance(positions[dst[k]]) for k in ks])
        self.out_buf = np.zeros(max(1, max((len(x) for x in self.nbr_list), default=1)), dtype=np.uint8)

        # link estimation state
        self.window = cfg.link_window
        self.hist = np.zeros((m, self.window), dtype=np.uint8)
        self.ratios = np.zeros(m, dtype=np.float64)
        self.known_fwd = np.zeros(m, dtype=np.float64)
        self.probe_rounds = 0
        self.sent_buf = np.zeros(n, dtype=np.uint8)

        # energy
        self.e_ini = cfg.e_ini
        self.e_res = np.full(n, cfg.e_ini, dtype=np.float64)
        self.node_e_ini = [cfg.e_ini] * n
        if cfg.sink_powered:
            self.e_res[self.sink] = math.inf
            self.node_e_ini[self.sink] = math.inf
        self.spent = np.zeros(n, dtype=np.float64)
        self.alive = np.ones(n, dtype=np.uint8)
        self.n_alive = n
        self.death_time = [math.nan] * n
        self.tx_debits = 0.0
        self.rx_debits = 0.0

        rb = self.radio.msg_bits
        self.probe_tx = tx_energy(cfg.radio.probe_bits, cfg.comm_range, self.radio)
        self.probe_rx = rx_energy(cfg.radio.probe_bits, self.radio)
        self.bcast_tx = tx_energy(rb, cfg.comm_range, self.radio)
        self.data_rx = rx_energy(rb, self.radio)
        self.ack_rx = rx_energy(cfg.radio.ack_bits, self.radio)

        # counters
        self.packets = {"probe": 0, "query": 0, "report": 0}
        self.cluster_control_packets = 0
        self.ack_frames = 0
        self.reports_sent = 0
        self.reports_delivered = 0
        self.reports_dropped = 0
        self.voids = 0
        self.delivered_keys = set()
        self.routes: Dict[Tuple[int, int], List[int]] = {}
        self.route_status: Dict[Tuple[int, int], str] = {}
        self.dgw_pairs: List[Tuple[int, int, float]] = []
        self.epoch = 0

        self.queue: List[tuple] = []
        self.seq = 0
        self.now = 0.0
        self.draining = False
        self.terminated_at: Optional[float] = None
        self.series = MetricsSeries(strategy=cfg.strategy, seed=cfg.seed)
        self._last_sent = 0
        self._last_delivered = 0
        self._zero_windows = 0
        self.degraded_at: Optional[float] = None

    # -- setup helpers -----------------------------------------------------

    def _pick_sink(self, positions: List[Position]) -> int:
        if self.cfg.sink != "center":
            return int(self.cfg.sink)
        c = Position(self.cfg.field_width / 2, self.cfg.field_height / 2)
        return min(range(len(positions)), key=lambda i: (positions[i].distance(c), i))

    def in_region(self, node: Node, region=None) -> bool:
        region = self.cfg.query_region if region is None else region
        if region is None:
            return True
        x0, y0, x1, y1 = region
        return x0 <= node.x <= x1 and y0 <= node.y <= y1

    # -- event queue -------------------------------------------------------

    def schedule(self, t: float, kind: int, a=None, b=None):
        self.seq += 1
        heapq.heappush(self.queue, (t, self.seq, kind, a, b))

    def run(self) -> MetricsSeries:
        cfg = self.cfg
        self.schedule(0.0, PROBE)
        if cfg.query_start <= cfg.duration:
            self.schedule(cfg.query_start, QUERY)
        self.schedule(0.0, SAMPLE, 0)
        self._loop(cfg.duration)
        if self.terminated_at is None:
            self.draining = True
            self._loop(math.inf)
            self.now = max(self.now, cfg.duration)
        last_k = math.floor(cfg.duration / cfg.sampling_interval + 1e-9)
        if self.terminated_at is None:
            self._sample(last_k * cfg.sampling_interval, final=True)
        return self.series

    def _loop(self, until: float):
        handlers = (self._on_probe, self._on_query, self._on_forward, self._on_report_due,
                    self._on_arrival, self._on_deadline, self._on_sample)
        q = self.queue
        while q and self.terminated_at is None:
            if q[0][0] > until:
                break
            t, _, kind, a, b = heapq.heappop(q)
            if self.draining and kind in GENERATORS:
                continue
            self.now = t
            handlers[kind](a, b)

    # -- energy ------------------------------------------------------------

    def _charge(self, i: int, cost: float) -> bool:
        """Debit node ``i``; returns False when it could not afford ``cost`` (and died)."""
        ok = self.e_res[i] >= cost
        self.tx_debits += kernels.charge(i, cost, self.e_res, self.spent, self.alive)
        return ok

    def _check_deaths(self):
        alive = int(self.alive.sum())
        if alive != self.n_alive:
            for i in np.flatnonzero(self.alive == 0).tolist():
                if math.isnan(self.death_time[i]):
                    self.death_time[i] = self.now
            self.n_alive = alive

    def energy_balance(self) -> Tuple[float, float]:
        """``(sum of per-node energy drawn, sum of recorded debits)``."""
        drawn = math.fsum(
            (e0 - float(self.e_res[i])) if math.isfinite(e0) else float(self.spent[i])
            for i, e0 in enumerate(self.node_e_ini)
        )
        return drawn, self.tx_debits + self.rx_debits

    # -- probes ------------------------------------------------------------

    def _on_probe(self, a, b):
        m = len(self.src)
        slot = self.probe_rounds % self.window
        draws = self.loss_rng.random(m)
        tx, rx = kernels.probe_round(self.src, self.dst, self.p_true, draws, self.hist, slot,
                                     self.e_res, self.spent, self.alive, self.probe_tx,
                                     self.probe_rx, self.sent_buf)
        self.tx_debits += tx
        self.rx_debits += rx
        self.packets["probe"] += int(self.sent_buf.sum())
        self.probe_rounds += 1
        kernels.window_ratios(self.hist, min(self.probe_rounds, self.window), self.ratios)
        if m:
            heard_back = self.hist[self.rev, slot] == 1
            self.known_fwd[heard_back] = self.ratios[heard_back]
        self._check_deaths()
        nxt = self.now + self.cfg.probe_period
        if nxt <= self.cfg.duration:
            self.schedule(nxt, PROBE)

    def link_view(self, i: int):
        """``(neighbor, distance, p_fwd, p_rev)`` for every in-range neighbour of ``i``."""
        out = []
        for j, d, e in zip(self.nbr_list[i], self.nbr_dist[i], self.nbr_eid[i]):
            out.append((j, d, float(self.known_fwd[e]), float(self.ratios[self.rev[e]])))
        return out

    def neighbor_ptx(self, i: int) -> List[Tuple[int, float]]:
        e_res = float(self.e_res[i])
        out = []
        for j, d, pf, pr in self.link_view(i):
            if pf > 0 and pr > 0:
                etx = compute_etx(min(pf, 1.0), min(pr, 1.0))
                out.append((j, compute_ptx(e_res, etx, tx_energy(self.radio.msg_bits, d, self.radio))))
        return out

    # -- contention --------------------------------------------------------

    def _wait_for(self, node: Node) -> Optional[Tuple[float, float]]:
        """``(rho, wait)`` for a candidate, or None when it cannot contend."""
        cfg = self.cfg
        i = node.id
        usable = [(j, pf, pr) for j, _, pf, pr in self.link_view(i) if pf > 0 and pr > 0]
        if not usable:
            return None
        strategy = cfg.strategy
        if strategy == "link-ptx":
            try:
                rho = calc_priority(self.neighbor_ptx(i), cfg.n_req)
            except PriorityUndefined:
                return None
            if not rho > 0:
                return None
            if math.isinf(rho):
                return rho, self.rng.random() * cfg.t_slot
            return rho, backoff_wait(rho, cfg.t_slot, self.rng, scale=cfg.backoff_scale)
        if strategy == "random-pc":
            return 0.0, self.rng.random() * cfg.t_slot
        if strategy == "lic":
            return float(-i), cfg.t_slot * (i + 1) / (self.n + 1)
        if strategy == "hcc":
            deg = len(usable)
            return float(deg), cfg.t_slot * ((self.n - deg) + i / self.n) / (self.n + 1)
        if strategy == "heed":
            e = float(self.e_res[i])
            e = self.heed.e_ini if not math.isfinite(e) else min(e, self.heed.e_ini)
            k = heed_election_round(self.heed, e, self.rng)
            if k < 0:
                return None
            return float(k), cfg.t_slot * (k + self.rng.random())
        raise AssertionError(strategy)

    def _contend(self, node: Node, role: ClusterState, cluster: Optional[int]) -> bool:
        """Enter contention; returns False when the node is not a candidate."""
        rw = self._wait_for(node)
        if rw is None:
            return False
        rho, wait = rw
        gws = {j for j, (st, c) in node.known.items() if st in GATEWAYS and c == cluster}
        rec = ContentionRecord(node.id, role, cluster, rho, self.cfg.t_slot, wait, self.now, gateways=gws)
        node.token += 1
        if rec.new_state_determined:
            node.contention = rec
            self._finish(node)
            return True
        node.state = role
        node.cluster = cluster
        node.contention = rec
        node.armed = False
        self.schedule(rec.deadline, DEADLINE, node.id, node.token)
        return True

    def _finish(self, node: Node):
        rec = node.contention
        node.contention = None
        node.armed = False
        node.token += 1
        node.state = rec.outcome
        node.cluster = rec.cluster_id
        if rec.outcome is D_GW:
            node.dgw_peer = rec.dgw_peer
            self.dgw_pairs.append((node.id, rec.dgw_peer, self.now))
        self._flush(node)

    def _flush(self, node: Node):
        pending, node.queue = node.queue, []
        for k, pkt in enumerate(pending):
            if node.contention is not None:
                node.queue.extend(pending[k:])
                return
            self.send(node, pkt)

    def _on_deadline(self, nid, token):
        node = self.nodes[nid]
        if not self.alive[nid] or node.token != token or node.contention is None:
            return
        if node.busy_until > self.now:
            # a neighbour's frame is still on the air; hear it before declaring
            self.schedule(node.busy_until, DEADLINE, nid, token)
            return
        if not node.queue and node.contention.role is CH_R:
            # a head claim must be heard to win, so it waits for the next transmission
            node.armed = True
            return
        node.contention.expire()
        self._finish(node)

    def _reset_epoch(self, node: Node, epoch: int):
        node.epoch = epoch
        node.state = IN
        node.cluster = None
        node.contention = None
        node.armed = False
        node.token += 1
        node.known.clear()
        node.candidates = []
        node.forwarded = False
        node.pending_forward = False
        node.dgw_peer = None

    def _hear(self, node: Node, sender: int, pkt: Packet):
        """Piggybacked header processing for a received data packet."""
        if pkt.epoch > node.epoch:
            self._reset_epoch(node, pkt.epoch)
            if node.queue:
                self.schedule(self.now, FORWARD, node.id, None)
        elif pkt.epoch < node.epoch:
            return
        if not self.clustering:
            return
        st = pkt.sender_state
        cid = pkt.sender_cluster_id
        node.known[sender] = (st, cid)
        rec = node.contention
        if rec is not None:
            if rec.observe(sender, st, cid) is not None:
                self._finish(node)
            return
        tr = on_receive_report(node.state, node.cluster, st, cid)
        if tr.contend:
            if not self._contend(node, tr.state, tr.cluster_id) and node.state is IN:
                node.cluster = tr.cluster_id
        else:
            node.state = tr.state
            node.cluster = tr.cluster_id

    # -- sending -----------------------------------------------------------

    def send(self, node: Node, pkt: Packet):
        if not self.alive[node.id]:
            if pkt.kind == "report":
                self._drop(pkt)
            return
        if self.clustering:
            if node.contention is not None:
                node.queue.append(pkt)
                if node.armed:
                    node.armed = False
                    self.schedule(max(self.now, node.busy_until), DEADLINE, node.id, node.token)
                return
            if node.state is IN and self._contend(node, CH_R, node.id):
                node.queue.append(pkt)
                if node.contention is None:
                    self._flush(node)
                return
        self._transmit(node, pkt)

    def _header(self, node: Node, pkt: Packet) -> Packet:
        if self.clustering:
            return piggyback_state(pkt, node.state, node.cluster)
        return piggyback_state(pkt, IN, None)

    def _transmit(self, node: Node, pkt: Packet):
        if pkt.kind == "query":
            self._choose_parent(node)
            node.forwarded = True
            node.pending_forward = False
            self._broadcast(node, self._header(node, pkt))
            return
        if self.clustering:
            if node.parent is None:
                self._choose_parent(node)
            nh = node.parent
        else:
            nh = self._greedy(node, pkt)
            if nh is None:
                return
        if nh is None or pkt.hops > 2 * self.n:
            self._drop(pkt)
            return
        self._unicast(node, self._header(node, pkt), nh)

    def _choose_parent(self, node: Node):
        """First backbone node heard forwarding this epoch's query, else the first forwarder."""
        if node.id != self.sink and node.candidates:
            backbone = [s for s, bb in node.candidates if bb]
            node.parent = backbone[0] if backbone else node.candidates[0][0]

    def _greedy(self, node: Node, pkt: Packet) -> Optional[int]:
        i = node.id
        cand = []
        for j, _, _, pr in self.link_view(i):
            if pr > 0:
                nj = self.nodes[j]
                cand.append((j, (nj.x, nj.y)))
        try:
            return gpsr_greedy_next_hop((node.x, node.y), cand, pkt.dest_pos)
        except VoidRegion:
            self.voids += 1
            self._drop(pkt, "void")
            return None

    def _drop(self, pkt: Packet, why: str = "dropped"):
        self.reports_dropped += 1
        if self.trace_routes:
            self.route_status[(pkt.origin, pkt.seq)] = why

    def _air(self, i: int, draws_n: int):
        """Mark the frame as on the air for every live neighbour (carrier sense)."""
        until = self.now + self.cfg.prop_delay
        nodes = self.nodes
        alive = self.alive
        for j in self.nbr_list[i]:
            if alive[j] and nodes[j].busy_until < until:
                nodes[j].busy_until = until

    def _broadcast(self, node: Node, pkt: Packet):
        i = node.id
        self.packets[pkt.kind] += 1
        if not self._charge(i, self.bcast_tx):
            self._check_deaths()
            return
        nb = self.nbrs[i]
        k = len(nb)
        out = self.out_buf[:k]
        self.rx_debits += kernels.deliver(nb, self.nbr_p[i], self.loss_rng.random(k), self.e_res,
                                          self.spent, self.alive, self.data_rx, out)
        heard = nb[out.astype(bool)].tolist()
        self._air(i, k)
        self._check_deaths()
        self.schedule(self.now + self.cfg.prop_delay, ARRIVAL, (pkt, i, heard), None)

    def _unicast(self, node: Node, pkt: Packet, nh: int):
        i = node.id
        cfg = self.cfg
        d = self.nbr_dist[i][self.nbr_list[i].index(nh)]
        cost = tx_energy(self.radio.msg_bits, d, self.radio)
        ack_cost = tx_energy(cfg.radio.ack_bits, d, self.radio)
        p_back = float(self.p_true[self.eid[(nh, i)]])
        nb = self.nbrs[i]
        k = len(nb)
        heard: List[int] = []
        seen = set()
        got = False
        self.packets["report"] += 1
        for _ in range(cfg.max_attempts):
            if not self._charge(i, cost):
                break
            out = self.out_buf[:k]
            self.rx_debits += kernels.deliver(nb, self.nbr_p[i], self.loss_rng.random(k), self.e_res,
                                              self.spent, self.alive, self.data_rx, out)
            for j in nb[out.astype(bool)].tolist():
                if j not in seen:
                    seen.add(j)
                    heard.append(j)
            self._air(i, k)
            if nh in seen:
                got = True
                # link-layer acknowledgement
                if not self.alive[nh] or not self._charge(nh, ack_cost):
                    break
                self.ack_frames += 1
                if self.loss_rng.random() < p_back and self.alive[i]:
                    ok = self.e_res[i] >= self.ack_rx
                    self.rx_debits += kernels.charge(i, self.ack_rx, self.e_res, self.spent, self.alive)
                    if ok:
                        break
            if not self.alive[i]:
                break
        self._check_deaths()
        if not got:
            self._drop(pkt)
        self.schedule(self.now + cfg.prop_delay, ARRIVAL, (pkt, i, heard), nh if got else None)

    # -- handlers ----------------------------------------------------------

    def _on_arrival(self, payload, nh):
        pkt, sender, heard = payload
        nodes = self.nodes
        for j in heard:
            if not self.alive[j]:
                continue
            node = nodes[j]
            self._hear(node, sender, pkt)
            if pkt.kind == "query":
                self._on_query_copy(node, sender, pkt)
            elif j == nh:
                self._on_report_copy(node, pkt)

    def inject_query(self, n_req: Optional[float] = None, region=None):
        """Start a new query epoch from the sink."""
        cfg = self.cfg
        self.epoch += 1
        sink = self.nodes[self.sink]
        if not self.alive[self.sink]:
            return
        self._reset_epoch(sink, self.epoch)
        sink.reached = True
        if region is not None or self.epoch == 1:
            targets = sum(1 for nd in self.nodes if nd.id != self.sink and self.in_region(nd, region))
            if targets == 0:
                self.warnings.append("query region contains no nodes; no sources")
        pkt = Packet("query", self.sink, None, self.epoch,
                     n_req=cfg.n_req if n_req is None else n_req, origin=self.sink,
                     epoch=self.epoch, dest_pos=(sink.x, sink.y))
        self._query_region = region
        sink.query = pkt
        self.send(sink, pkt)

    def _on_query(self, a, b):
        self.inject_query(region=self.cfg.query_region)
        if self.cfg.query_interval > 0:
            nxt = self.now + self.cfg.query_interval
            if nxt <= self.cfg.duration:
                self.schedule(nxt, QUERY)

    def _on_query_copy(self, node: Node, sender: int, pkt: Packet):
        if pkt.epoch < node.epoch:
            return
        if pkt.epoch > node.epoch:
            node.epoch = pkt.epoch
            node.forwarded = False
            node.pending_forward = False
            node.candidates = []
        bb = pkt.sender_state in BACKBONE
        node.candidates.append((sender, bb))
        if node.forwarded or node.pending_forward or node.id == self.sink:
            return
        node.reached = True
        node.query = pkt
        node.pending_forward = True
        if not node.is_source and self.in_region(node, getattr(self, "_query_region", None)):
            node.is_source = True
            self.schedule(self.now + self.rng.random() / self.cfg.n_req, REPORT, node.id)
        self.schedule(self.now + self.rng.random() * self.cfg.t_slot, FORWARD, node.id, pkt)

    def _on_forward(self, nid, pkt):
        node = self.nodes[nid]
        if not self.alive[nid]:
            return
        if pkt is None:
            # queued traffic released by an epoch reset
            self._flush(node)
            return
        if pkt.epoch != node.epoch or node.forwarded:
            return
        fwd = Packet("query", nid, None, pkt.seq, n_req=pkt.n_req, origin=pkt.origin,
                     epoch=pkt.epoch, dest_pos=pkt.dest_pos, hops=pkt.hops + 1)
        self.send(node, fwd)

    def _on_report_due(self, nid, b):
        node = self.nodes[nid]
        if not self.alive[nid]:
            return
        node.report_seq += 1
        self.reports_sent += 1
        pkt = Packet("report", nid, self.sink, node.report_seq, origin=nid, epoch=node.epoch,
                     dest_pos=node.query.dest_pos if node.query else None)
        if self.trace_routes:
            self.routes[(nid, node.report_seq)] = [nid]
        self.send(node, pkt)
        nxt = self.now + 1.0 / self.cfg.n_req
        if nxt <= self.cfg.duration:
            self.schedule(nxt, REPORT, nid)

    def _on_report_copy(self, node: Node, pkt: Packet):
        key = (pkt.origin, pkt.seq)
        if self.trace_routes:
            self.routes.setdefault(key, [pkt.origin]).append(node.id)
        if node.id == self.sink:
            if key not in self.delivered_keys:
                self.delivered_keys.add(key)
                self.reports_delivered += 1
                if self.trace_routes:
                    self.route_status[key] = "delivered"
            return
        fwd = Packet("report", node.id, self.sink, pkt.seq, origin=pkt.origin, epoch=node.epoch,
                     dest_pos=pkt.dest_pos, hops=pkt.hops + 1)
        self.send(node, fwd)

    # -- metrics -----------------------------------------------------------

    def state_counts(self) -> Dict[ClusterState, int]:
        counts = {s: 0 for s in ClusterState}
        for nd in self.nodes:
            if self.alive[nd.id]:
                counts[nd.state] += 1
        return counts

    def _sample(self, t: float, final: bool = False):
        counts = self.state_counts()
        sent = self.reports_sent
        dlv = self.reports_delivered
        row = MetricsRow(
            time_s=t,
            total_energy_j=float(math.fsum(self.spent.tolist())),
            active_nodes=int(self.alive.sum()),
            reports_sent=sent,
            reports_delivered=dlv,
            delivery_ratio=(dlv / sent) if sent else 0.0,
            ch_count=counts[CH],
            gw_count=counts[GW],
            dgw_count=counts[D_GW],
        )
        self.series.rows.append(row)
        if final:
            return
        ws = sent - self._last_sent
        wd = dlv - self._last_delivered
        self._last_sent, self._last_delivered = sent, dlv
        if ws > 0:
            if self.degraded_at is None and wd / ws < 0.9:
                self.degraded_at = t
            self._zero_windows = self._zero_windows + 1 if wd == 0 else 0
            if self._zero_windows >= self.cfg.dead_windows:
                self.terminated_at = t

    def _on_sample(self, k, b):
        cfg = self.cfg
        nxt_k = k + 1
        last_k = math.floor(cfg.duration / cfg.sampling_interval + 1e-9)
        if k < last_k:
            self._sample(self.now)
            self.schedule(nxt_k * cfg.sampling_interval, SAMPLE, nxt_k)


def run_scenario(cfg: ScenarioConfig) -> MetricsSeries:
    sim = Simulation(cfg)
    series = sim.run()
    series.attach(sim)
    return series
