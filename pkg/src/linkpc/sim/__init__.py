"""Simulation engine and metrics."""

from linkpc.sim.engine import Simulation, run_scenario
from linkpc.sim.metrics import COLUMNS, MetricsRow, MetricsSeries, report_quality_check

__all__ = ["Simulation", "run_scenario", "COLUMNS", "MetricsRow", "MetricsSeries", "report_quality_check"]
