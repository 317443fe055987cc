"""Network graph, per-link statistics and the closed-form link/energy metrics."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from linkpc import kernels


class DomainError(ValueError):
    """Raised when a metric is evaluated outside its domain."""


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GraphError(f"non-finite coordinates ({self.x}, {self.y})")

    def distance(self, other: "Position") -> float:
        dx = self.x - other.x
        dy = self.y - other.y
        return math.sqrt(dx * dx + dy * dy)


@dataclass(frozen=True)
class RadioParams:
    """First-order radio model constants.

    ``d0`` defaults to ``sqrt(eps_fs / eps_mp)``; an explicit value must agree
    with it to 1e-9 relative, otherwise construction fails.
    """

    e_elec: float = 50e-9
    eps_fs: float = 10e-12
    eps_mp: float = 0.0013e-12
    d0: Optional[float] = None
    msg_bits: int = 1000

    def __post_init__(self):
        for name in ("e_elec", "eps_fs", "eps_mp", "msg_bits"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)!r}")
        expected = math.sqrt(self.eps_fs / self.eps_mp)
        if self.d0 is None:
            object.__setattr__(self, "d0", expected)
        elif not math.isclose(self.d0, expected, rel_tol=1e-9):
            raise DomainError(f"d0={self.d0} inconsistent with sqrt(eps_fs/eps_mp)={expected}")


@dataclass
class NetworkGraph:
    """Unit-disk graph over stationary nodes; ``ids[k]`` labels ``positions[k]``."""

    ids: List[int]
    positions: List[Position]
    comm_range: float
    edges: List[Tuple[int, int]] = field(default_factory=list)
    _adj: Dict[int, List[int]] = field(default_factory=dict, repr=False)

    def neighbors(self, node_id: int) -> List[int]:
        return self._adj[node_id]

    def degree(self, node_id: int) -> int:
        return len(self._adj[node_id])

    def position(self, node_id: int) -> Position:
        return self.positions[self.ids.index(node_id)]

    def distance(self, a: int, b: int) -> float:
        return self.position(a).distance(self.position(b))

    def reachable(self, start: int) -> set:
        seen = {start}
        frontier = deque([start])
        while frontier:
            u = frontier.popleft()
            for v in self._adj[u]:
                if v not in seen:
                    seen.add(v)
                    frontier.append(v)
        return seen

    def is_connected(self) -> bool:
        if not self.ids:
            return True
        return len(self.reachable(self.ids[0])) == len(self.ids)


def build_graph(
    positions: Sequence[Position],
    comm_range: float,
    ids: Optional[Sequence[int]] = None,
) -> NetworkGraph:
    """Connect every pair at distance <= ``comm_range`` (closed disk)."""
    if not positions:
        raise GraphError("positions must be non-empty")
    if not comm_range > 0:
        raise GraphError(f"comm_range must be > 0, got {comm_range!r}")
    ids = list(range(len(positions))) if ids is None else list(ids)
    if len(ids) != len(positions):
        raise GraphError("ids and positions differ in length")
    if len(set(ids)) != len(ids):
        raise GraphError("duplicate node ids")

    xs = np.array([p.x for p in positions], dtype=np.float64)
    ys = np.array([p.y for p in positions], dtype=np.float64)
    ii, jj = kernels.unit_disk_edges(xs, ys, float(comm_range))
    adj: Dict[int, List[int]] = {i: [] for i in ids}
    edges = []
    for a, b in zip(ii.tolist(), jj.tolist()):
        u, v = ids[a], ids[b]
        edges.append((u, v))
        adj[u].append(v)
        adj[v].append(u)
    return NetworkGraph(ids=ids, positions=list(positions), comm_range=float(comm_range),
                        edges=edges, _adj=adj)


def compute_etx(p_fwd: float, p_rev: float) -> float:
    """Expected bidirectional transmission count ``1 / (p_fwd * p_rev)``."""
    if not (0.0 < p_fwd <= 1.0 and 0.0 < p_rev <= 1.0):
        raise DomainError(f"delivery ratios must lie in (0, 1], got ({p_fwd}, {p_rev})")
    return 1.0 / (p_fwd * p_rev)


def tx_energy(k: float, d: float, rp: RadioParams) -> float:
    """Energy to transmit ``k`` bits over ``d`` metres (free-space below d0, multipath above)."""
    if k < 0 or d < 0:
        raise DomainError(f"k and d must be >= 0, got k={k}, d={d}")
    if d < rp.d0:
        return k * rp.e_elec + k * rp.eps_fs * d * d
    return k * rp.e_elec + k * rp.eps_mp * d ** 4


def rx_energy(k: float, rp: RadioParams) -> float:
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    return k * rp.e_elec


def compute_ptx(e_res: float, etx: float, e_tx: float) -> float:
    """Predicted number of report transmissions the residual energy sustains over a link."""
    if not e_tx > 0:
        raise DomainError(f"e_tx must be > 0, got {e_tx}")
    if not etx >= 1.0:
        raise DomainError(f"etx must be >= 1, got {etx}")
    if e_res < 0:
        raise DomainError(f"e_res must be >= 0, got {e_res}")
    return e_res / (etx * e_tx)


@dataclass
class NeighborEntry:
    neighbor_id: int
    distance: float
    p_fwd: float = 0.0
    p_rev: float = 0.0
    ptx: float = 0.0

    @property
    def usable(self) -> bool:
        return self.p_fwd > 0 and self.p_rev > 0

    @property
    def etx(self) -> float:
        if not self.usable:
            return math.inf
        return compute_etx(self.p_fwd, self.p_rev)


class LinkStatsWindow:
    """Sliding window of probe outcomes for both directions of one link.

    ``window=None`` keeps the whole history.
    """

    def __init__(self, window: Optional[int] = 10):
        if window is not None and window < 1:
            raise DomainError(f"window must be >= 1, got {window}")
        self.window = window
        self._fwd: deque = deque(maxlen=window)
        self._rev: deque = deque(maxlen=window)

    def _ratio(self, outcomes: deque) -> float:
        if not outcomes:
            return 0.0
        return sum(outcomes) / len(outcomes)

    @property
    def p_fwd(self) -> float:
        return self._ratio(self._fwd)

    @property
    def p_rev(self) -> float:
        return self._ratio(self._rev)

    @property
    def sent(self) -> Tuple[int, int]:
        return len(self._fwd), len(self._rev)

    @property
    def usable(self) -> bool:
        return self.p_fwd > 0 and self.p_rev > 0

    @property
    def etx(self) -> Optional[float]:
        """``None`` when either direction has no delivered probe (link unusable)."""
        if not self.usable:
            return None
        return compute_etx(self.p_fwd, self.p_rev)


def update_link_stats(
    window: LinkStatsWindow, received: bool, direction: str
) -> Tuple[float, float, Optional[float]]:
    """Record one probe outcome; returns ``(p_fwd, p_rev, etx)``."""
    if direction == "fwd":
        window._fwd.append(1 if received else 0)
    elif direction == "rev":
        window._rev.append(1 if received else 0)
    else:
        raise ValueError(f"direction must be 'fwd' or 'rev', got {direction!r}")
    return window.p_fwd, window.p_rev, window.etx

