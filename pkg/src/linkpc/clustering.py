"""Passive clustering with link-aware (PTX) contention.

A node never sends a packet just to maintain clusters: its state and cluster
id ride on the data packets it transmits anyway, and neighbours react to the
headers they overhear.  Candidates (``CH_R``/``GW_R``) defer their pending
transmission by a priority-derived backoff; the first candidate to transmit
claims the role.

State transitions on reception::

    IN  --hear CH-->            GW_R   (adopt sender's cluster, contend)
    IN  --hear GW-->            CH_R   (adopt sender's cluster, contend)
    IN  --hear other-->         IN     (adopt sender's cluster)
    OD  --hear own CH-->        GW_R   (contend)
    CH_R --hear any CH-->       OD     (join that CH)
    GW_R --quota of own GWs-->  OD
    GW_R --hear foreign GW-->   D_GW
    CH_R --backoff expires-->   CH     (cluster id := own id)
    GW_R --backoff expires-->   GW
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple


class ClusterState(str, enum.Enum):
    IN = "IN"
    OD = "OD"
    CH = "CH"
    GW = "GW"
    D_GW = "D_GW"
    CH_R = "CH_R"
    GW_R = "GW_R"

    def __str__(self):
        return self.value

    @property
    def internal(self) -> bool:
        return self in INTERNAL


INTERNAL = frozenset({ClusterState.CH_R, ClusterState.GW_R})
EXTERNAL = frozenset(ClusterState) - INTERNAL
GATEWAYS = frozenset({ClusterState.GW, ClusterState.D_GW})
BACKBONE = frozenset({ClusterState.CH, ClusterState.GW, ClusterState.D_GW})

GATEWAY_QUOTA = 2


class ProtocolViolation(RuntimeError):
    """An operation was applied to a node or packet in the wrong cluster state."""


class PriorityUndefined(ValueError):
    """No neighbour PTX is available, so the node cannot be a candidate."""


# -- priority ------------------------------------------------------------------

@dataclass(frozen=True)
class PrioritySplit:
    sat: Tuple[Tuple[int, float], ...]
    unsat: Tuple[Tuple[int, float], ...]


def split_by_requirement(neighbor_ptx: Iterable[Tuple[int, float]], n_req: float) -> PrioritySplit:
    sat = []
    unsat = []
    for nid, ptx in neighbor_ptx:
        (sat if ptx >= n_req else unsat).append((nid, ptx))
    return PrioritySplit(tuple(sat), tuple(unsat))


def priority_neighbor(neighbor_ptx: Sequence[Tuple[int, float]], n_req: float) -> Tuple[int, float]:
    """The neighbour whose PTX sets the priority.

    The weakest link that still meets ``n_req`` if any does, otherwise the
    strongest of the links that fall short.  Ties go to the lower id.
    """
    if not neighbor_ptx:
        raise PriorityUndefined("no neighbour PTX available")
    if not n_req > 0:
        raise ValueError(f"n_req must be > 0, got {n_req}")
    split = split_by_requirement(neighbor_ptx, n_req)
    if split.sat:
        return min(split.sat, key=lambda item: (item[1], item[0]))
    return max(split.unsat, key=lambda item: (item[1], -item[0]))


def calc_priority(neighbor_ptx: Sequence[Tuple[int, float]], n_req: float) -> float:
    return priority_neighbor(neighbor_ptx, n_req)[1]


def backoff_wait(rho: float, t_slot: float, rng=None, scale: float = 1.0,
                 jitter: Optional[float] = None) -> float:
    """``t_slot * floor(scale / rho)`` plus a jitter in ``[0, t_slot)``.

    ``jitter`` is a fraction of a slot; when omitted it is drawn from ``rng``.
    """
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    if not t_slot > 0:
        raise ValueError(f"t_slot must be > 0, got {t_slot}")
    if jitter is None:
        jitter = rng.random() if rng is not None else 0.0
    if not 0.0 <= jitter < 1.0:
        raise ValueError(f"jitter fraction must lie in [0, 1), got {jitter}")
    return t_slot * math.floor(scale / rho) + jitter * t_slot


# -- reception-driven transitions ---------------------------------------------

@dataclass(frozen=True)
class Transition:
    state: ClusterState
    cluster_id: Optional[int]
    contend: bool = False


def on_receive_report(state: ClusterState, cluster_id: Optional[int],
                      sender_state: ClusterState, sender_cluster_id: Optional[int]) -> Transition:
    if sender_state in INTERNAL:
        raise ProtocolViolation(f"packet carries internal state {sender_state}")
    if state is ClusterState.IN:
        if sender_state is ClusterState.CH:
            return Transition(ClusterState.GW_R, sender_cluster_id, True)
        if sender_state is ClusterState.GW:
            return Transition(ClusterState.CH_R, sender_cluster_id, True)
        return Transition(ClusterState.IN, sender_cluster_id)
    if state is ClusterState.OD:
        if sender_state is ClusterState.CH and sender_cluster_id == cluster_id:
            return Transition(ClusterState.GW_R, cluster_id, True)
    return Transition(state, cluster_id)


# -- contention ---------------------------------------------------------------

@dataclass
class ContentionRecord:
    node_id: int
    role: ClusterState
    cluster_id: Optional[int]
    rho: float
    t_slot: float
    wait: float
    start: float
    gateways: Set[int] = field(default_factory=set)
    quota: int = GATEWAY_QUOTA
    new_state_determined: bool = False
    outcome: Optional[ClusterState] = None
    heard_ch: bool = False
    dgw_peer: Optional[int] = None

    def __post_init__(self):
        if self.role not in INTERNAL:
            raise ProtocolViolation(f"contention requires CH_R or GW_R, got {self.role}")
        if self.role is ClusterState.GW_R and len(self.gateways) >= self.quota:
            self._decide(ClusterState.OD, self.cluster_id)

    @property
    def deadline(self) -> float:
        return self.start + self.wait

    def _decide(self, state: ClusterState, cluster_id: Optional[int]):
        self.outcome = state
        self.cluster_id = cluster_id
        self.new_state_determined = True

    def observe(self, sender_id: int, sender_state: ClusterState,
                sender_cluster_id: Optional[int]) -> Optional[ClusterState]:
        """Feed one overheard packet header; returns the outcome once decided."""
        if sender_state in INTERNAL:
            raise ProtocolViolation(f"packet carries internal state {sender_state}")
        if self.new_state_determined:
            return self.outcome
        if self.role is ClusterState.CH_R:
            if sender_state is ClusterState.CH:
                self._decide(ClusterState.OD, sender_cluster_id)
        elif sender_state in GATEWAYS:
            if sender_cluster_id == self.cluster_id:
                self.gateways.add(sender_id)
                if len(self.gateways) >= self.quota:
                    self._decide(ClusterState.OD, self.cluster_id)
            elif sender_state is ClusterState.GW:
                self.dgw_peer = sender_id
                self._decide(ClusterState.D_GW, self.cluster_id)
        elif sender_state is ClusterState.CH and sender_cluster_id == self.cluster_id:
            self.heard_ch = True
        return self.outcome if self.new_state_determined else None

    def expire(self) -> ClusterState:
        """Backoff ran out: the candidate claims the role it was contending for."""
        if not self.new_state_determined:
            if self.role is ClusterState.CH_R:
                self._decide(ClusterState.CH, self.node_id)
            else:
                self._decide(ClusterState.GW, self.cluster_id)
        return self.outcome


def run_contention(record: ContentionRecord,
                   events: Iterable[Tuple[float, int, ClusterState, Optional[int]]]
                   ) -> Tuple[ClusterState, Optional[int]]:
    """Resolve a contention against overheard ``(time, sender, state, cluster)`` headers.

    Headers at or after the deadline are ignored.
    """
    if record.role not in INTERNAL:
        raise ProtocolViolation(f"node is not contending (state {record.role})")
    deadline = record.deadline
    for t, sender, state, cluster in sorted(events, key=lambda ev: ev[0]):
        if t >= deadline:
            break
        if record.observe(sender, state, cluster) is not None:
            return record.outcome, record.cluster_id
    record.expire()
    return record.outcome, record.cluster_id


# -- gateway heuristic --------------------------------------------------------

def check_gateway_heuristic(census: Mapping[int, Sequence[ClusterState]],
                            foreign_contact: Optional[Mapping[int, bool]] = None,
                            quota: int = GATEWAY_QUOTA) -> List[int]:
    """Clusters holding fewer gateways than their topology admits.

    A cluster needs ``min(quota, non-head members)`` nodes in GW or D_GW when
    it touches another cluster.  Without ``foreign_contact``, every cluster is
    assumed to touch another one unless the census holds a single cluster.
    """
    violations = []
    for cid in sorted(census, key=lambda c: (c is None, c)):
        states = census[cid]
        if foreign_contact is None:
            in_contact = len(census) > 1
        else:
            in_contact = bool(foreign_contact.get(cid, False))
        if not in_contact:
            continue
        members = [s for s in states if s is not ClusterState.CH]
        need = min(quota, len(members))
        have = sum(1 for s in states if s in GATEWAYS)
        if have < need:
            violations.append(cid)
    return violations


# -- packets ------------------------------------------------------------------

@dataclass
class Packet:
    """In-simulator packet header; ``sender_state``/``sender_cluster_id`` are the piggyback."""

    kind: str
    src: int
    dst: Optional[int]
    seq: int
    sender_state: Optional[ClusterState] = None
    sender_cluster_id: Optional[int] = None
    n_req: Optional[float] = None
    origin: Optional[int] = None
    epoch: int = 0
    dest_pos: Optional[Tuple[float, float]] = None
    hops: int = 0


def piggyback_state(packet: Packet, state: ClusterState, cluster_id: Optional[int]) -> Packet:
    if state in INTERNAL:
        raise ProtocolViolation(f"cannot transmit while in internal state {state}")
    return replace(packet, sender_state=state, sender_cluster_id=cluster_id)


def cluster_census(states: Mapping[int, ClusterState],
                   cluster_ids: Mapping[int, Optional[int]]) -> Dict[Optional[int], List[ClusterState]]:
    census: Dict[Optional[int], List[ClusterState]] = {}
    for nid, st in states.items():
        census.setdefault(cluster_ids.get(nid), []).append(st)
    return census
