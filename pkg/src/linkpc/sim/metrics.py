"""Sampled run metrics, CSV export and the end-of-run summary."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, field, fields
from typing import Any, Dict, List, Optional

COLUMNS = (
    "time_s", "total_energy_j", "active_nodes", "reports_sent", "reports_delivered",
    "delivery_ratio", "ch_count", "gw_count", "dgw_count",
)


@dataclass(frozen=True)
class MetricsRow:
    time_s: float
    total_energy_j: float
    active_nodes: int
    reports_sent: int
    reports_delivered: int
    delivery_ratio: float
    ch_count: int
    gw_count: int
    dgw_count: int


def _fmt(value) -> str:
    # repr() is the shortest string that round-trips the float
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class MetricsSeries:
    strategy: str = ""
    seed: int = 0
    rows: List[MetricsRow] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    @property
    def final(self) -> MetricsRow:
        return self.rows[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(v) for v in astuple(row)])
        return buf.getvalue()

    def attach(self, sim) -> None:
        """Fill ``summary`` and ``warnings`` from a finished simulation."""
        self.summary = summarize(self, sim)
        self.warnings = list(sim.warnings)


def read_csv(text: str) -> List[MetricsRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    types = [f.type for f in fields(MetricsRow)]
    out = []
    for rec in reader:
        out.append(MetricsRow(*[float(v) if t == "float" else int(v) for v, t in zip(rec, types)]))
    return out


def summarize(series: MetricsSeries, sim) -> Dict[str, Any]:
    final = series.final
    # deaths during the post-duration drain are censored like survivors
    deaths = [t for t in sim.death_time if not math.isnan(t) and t <= sim.cfg.duration]
    first_death: Optional[float] = min(deaths) if deaths else None
    drawn, debits = sim.energy_balance()
    per_report = final.total_energy_j / final.reports_delivered if final.reports_delivered else None
    return {
        "strategy": series.strategy,
        "seed": series.seed,
        "network_lifetime_s": first_death if first_death is not None else sim.cfg.duration,
        "lifetime_censored": first_death is None,
        "delivery_lifetime_s": sim.degraded_at,
        "energy_per_delivered_report_j": per_report,
        "final_delivery_ratio": final.delivery_ratio,
        "total_energy_j": final.total_energy_j,
        "active_nodes": final.active_nodes,
        "reports_sent": final.reports_sent,
        "reports_delivered": final.reports_delivered,
        "reports_dropped": sim.reports_dropped,
        "void_drops": sim.voids,
        "ch_count": final.ch_count,
        "gw_count": final.gw_count,
        "dgw_count": final.dgw_count,
        "packets": dict(sim.packets),
        "ack_frames": sim.ack_frames,
        "cluster_control_packets": sim.cluster_control_packets,
        "terminated_early_at_s": sim.terminated_at,
        "energy_balance_error": abs(drawn - debits) / max(abs(drawn), 1e-300) if drawn else abs(debits),
        "warnings": list(sim.warnings),
    }


def report_quality_check(series: MetricsSeries, n_req: float, sources: int = 1) -> List[bool]:
    """Per sampling window: did the sink receive at least ``n_req`` reports/s per source?"""
    if not series.rows:
        raise ValueError("empty series")
    out = []
    for prev, cur in zip(series.rows, series.rows[1:]):
        dt = cur.time_s - prev.time_s
        rate = (cur.reports_delivered - prev.reports_delivered) / (dt * sources) if dt > 0 else 0.0
        out.append(rate >= n_req)
    return out
