"""Reference election rules and greedy geographic forwarding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Tuple

Point = Tuple[float, float]


class ElectionError(ValueError):
    pass


class VoidRegion(Exception):
    """Greedy forwarding reached a node with no neighbour closer to the destination."""

    def __init__(self, node=None):
        super().__init__(f"greedy local minimum at node {node}")
        self.node = node


@dataclass(frozen=True)
class HeedParams:
    c_prob: float = 0.05
    e_ini: float = 2.0

    def __post_init__(self):
        if not 0 < self.c_prob <= 1:
            raise ElectionError(f"c_prob must lie in (0, 1], got {self.c_prob}")
        if not self.e_ini > 0:
            raise ElectionError(f"e_ini must be > 0, got {self.e_ini}")


def lic_elect(candidate_ids: Iterable[int]) -> int:
    ids = set(candidate_ids)
    if not ids:
        raise ElectionError("no candidates")
    return min(ids)


def hcc_elect(degrees: Mapping[int, int]) -> int:
    """Highest degree wins; equal degrees go to the lower id."""
    if not degrees:
        raise ElectionError("no candidates")
    return min(degrees, key=lambda nid: (-degrees[nid], nid))


def heed_ch_prob(params: HeedParams, e_res: float) -> float:
    if not 0 <= e_res <= params.e_ini:
        raise ElectionError(f"e_res must lie in [0, {params.e_ini}], got {e_res}")
    return params.c_prob * e_res / params.e_ini


def random_pc_select(candidates: Iterable[int], rng) -> int:
    pool = sorted(set(candidates))
    if not pool:
        raise ElectionError("no candidates")
    return pool[int(rng.random() * len(pool))]


def _dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def gpsr_greedy_next_hop(current: Point, neighbors: Sequence[Tuple[int, Point]], dest: Point) -> int:
    """Neighbour closest to ``dest``, if strictly closer than ``current``.

    Equidistant neighbours go to the lower id.  Raises :class:`VoidRegion`
    at a local minimum.
    """
    best = None
    best_d = _dist(current, dest)
    for nid, pos in neighbors:
        d = _dist(pos, dest)
        if d < best_d or (best is not None and d == best_d and nid < best):
            best, best_d = nid, d
    if best is None:
        raise VoidRegion()
    return best


@dataclass
class GreedyRoute:
    hops: List[int] = field(default_factory=list)
    status: str = "delivered"


def greedy_route(source: int, dest: int, positions: Mapping[int, Point],
                 neighbors: Callable[[int], Iterable[int]]) -> GreedyRoute:
    """Follow greedy next hops from ``source`` until ``dest`` or a void."""
    route = GreedyRoute([source])
    here = source
    target = positions[dest]
    for _ in range(len(positions)):
        if here == dest:
            return route
        cand = [(n, positions[n]) for n in neighbors(here)]
        try:
            here = gpsr_greedy_next_hop(positions[here], cand, target)
        except VoidRegion:
            route.status = "void"
            return route
        route.hops.append(here)
    if here != dest:
        route.status = "void"
    return route


def heed_election_round(params: HeedParams, e_res: float, rng, max_iter: int = 64) -> int:
    """Iterations until a node self-elects, doubling its probability each time.

    Returns ``-1`` when the node has no energy (probability zero).
    """
    p = heed_ch_prob(params, e_res)
    if p <= 0:
        return -1
    k = 0
    while k < max_iter and rng.random() >= min(1.0, p * (2 ** k)):
        k += 1
    return k


STRATEGIES = ("link-ptx", "random-pc", "lic", "hcc", "heed", "gpsr")
CLUSTERED = frozenset(STRATEGIES) - {"gpsr"}


def describe(strategy: str) -> Dict[str, object]:
    if strategy not in STRATEGIES:
        raise ElectionError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    return {"name": strategy, "clustering": strategy in CLUSTERED}
