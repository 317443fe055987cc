"""Post-run structural checks on the cluster layout of a finished simulation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from linkpc.clustering import GATEWAY_QUOTA, ClusterState, check_gateway_heuristic, cluster_census


@dataclass
class ClusterReport:
    adjacent_heads: List[Tuple[int, int]] = field(default_factory=list)
    orphan_members: List[int] = field(default_factory=list)
    gateway_violations: List[Optional[int]] = field(default_factory=list)
    isolated_clusters: List[Optional[int]] = field(default_factory=list)
    maintenance_packets: int = 0
    internal_states: List[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        # pending head candidates (internal_states) are legitimate and not a failure
        return not (self.adjacent_heads or self.orphan_members or self.gateway_violations
                    or self.maintenance_packets)


def foreign_contact(sim) -> Dict[Optional[int], bool]:
    """For each cluster id: does any live member have a live neighbour in another cluster?"""
    contact: Dict[Optional[int], bool] = {}
    nodes = sim.nodes
    for nd in nodes:
        if not sim.alive[nd.id]:
            continue
        c = nd.cluster
        contact.setdefault(c, False)
        for j in sim.nbr_list[nd.id]:
            other = nodes[j]
            if sim.alive[j] and other.cluster is not None and other.cluster != c:
                contact[c] = True
                break
    return contact


def check_clusters(sim, quota: int = GATEWAY_QUOTA) -> ClusterReport:
    rep = ClusterReport(maintenance_packets=sim.cluster_control_packets)
    nodes = sim.nodes
    live = [nd for nd in nodes if sim.alive[nd.id]]
    for nd in live:
        i = nd.id
        if nd.state.internal:
            rep.internal_states.append(i)
        if nd.state is ClusterState.CH:
            for j in sim.nbr_list[i]:
                if j > i and sim.alive[j] and nodes[j].state is ClusterState.CH:
                    rep.adjacent_heads.append((i, j))
        elif nd.state is ClusterState.OD:
            if not any(sim.alive[j] and nodes[j].state is ClusterState.CH and nodes[j].cluster == nd.cluster
                       for j in sim.nbr_list[i]):
                rep.orphan_members.append(i)
    census = cluster_census({nd.id: nd.state for nd in live}, {nd.id: nd.cluster for nd in live})
    census.pop(None, None)
    contact = foreign_contact(sim)
    rep.gateway_violations = check_gateway_heuristic(census, contact, quota)
    rep.isolated_clusters = [c for c in census if not contact.get(c, False)]
    return rep
