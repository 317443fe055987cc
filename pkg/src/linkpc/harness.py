"""Single runs, paired strategy comparisons and parameter sweeps, with file output."""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from linkpc.config import SWEEPABLE, ConfigError, ScenarioConfig, dump_config, from_dict
from linkpc.sim import MetricsSeries, run_scenario

FORMATS = ("csv", "json", "both")
AGGREGATED = ("network_lifetime_s", "energy_per_delivered_report_j", "active_nodes")


@dataclass
class RunArtifact:
    config: ScenarioConfig
    series: MetricsSeries
    summary: Dict[str, Any]
    files: Dict[str, Path] = field(default_factory=dict)

    @property
    def warnings(self) -> List[str]:
        return self.series.warnings


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def _clean(value):
    # JSON has no NaN/inf; report them as null
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_clean(v) for v in value]
    return value


def _check_format(fmt: str):
    if fmt not in FORMATS:
        raise ConfigError("--format", f"expected one of {', '.join(FORMATS)}, got {fmt!r}")


def save_run(art: RunArtifact, out: Path, fmt: str = "both") -> RunArtifact:
    _check_format(fmt)
    out = Path(out)
    if fmt in ("csv", "both"):
        art.files["metrics"] = out / "metrics.csv"
        _write(art.files["metrics"], art.series.to_csv())
    if fmt in ("json", "both"):
        art.files["summary"] = out / "summary.json"
        _write(art.files["summary"], _json(_clean(art.summary)))
    art.files["config"] = out / "config.yaml"
    _write(art.files["config"], dump_config(art.config))
    return art


def run(cfg: ScenarioConfig, out: Optional[Path] = None, fmt: str = "both") -> RunArtifact:
    series = run_scenario(cfg)
    art = RunArtifact(cfg, series, series.summary)
    if out is not None:
        save_run(art, out, fmt)
    return art


def _run_summary(cfg_dict: Dict[str, Any]) -> Dict[str, Any]:
    return run_scenario(from_dict(cfg_dict)).summary


def _map(cfgs: Sequence[ScenarioConfig], jobs: int) -> List[Dict[str, Any]]:
    dicts = [c.to_dict() for c in cfgs]
    if jobs <= 1 or len(dicts) <= 1:
        return [_run_summary(d) for d in dicts]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_summary, dicts))


def _stats(values: List[Optional[float]]) -> Dict[str, Optional[float]]:
    vals = [v for v in values if v is not None and math.isfinite(v)]
    if not vals:
        return {"mean": None, "std": None, "n": 0}
    std = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return {"mean": statistics.fmean(vals), "std": std, "n": len(vals)}


@dataclass
class Comparison:
    strategies: List[str]
    seeds: List[int]
    runs: List[Dict[str, Any]]
    aggregates: List[Dict[str, Any]]

    def paired(self, metric: str, a: str, b: str) -> List[tuple]:
        """``(seed, value_a, value_b)`` for every seed."""
        by = {(r["strategy"], r["seed"]): r[metric] for r in self.runs}
        return [(s, by[(a, s)], by[(b, s)]) for s in self.seeds]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["strategy", "runs"]
        for m in AGGREGATED:
            header += [f"{m}_mean", f"{m}_std"]
        w.writerow(header)
        for agg in self.aggregates:
            row = [agg["strategy"], agg["runs"]]
            for m in AGGREGATED:
                row += ["" if agg[m]["mean"] is None else repr(agg[m]["mean"]),
                        "" if agg[m]["std"] is None else repr(agg[m]["std"])]
            w.writerow(row)
        return buf.getvalue()


def compare(cfg: ScenarioConfig, strategies: Sequence[str], seeds: Sequence[int],
            out: Optional[Path] = None, fmt: str = "both", jobs: int = 1) -> Comparison:
    """Run every strategy on every seed.  A seed fixes the topology and link draws,
    so each seed gives one matched sample per strategy."""
    _check_format(fmt)
    if len(strategies) < 2:
        raise ConfigError("--strategies", "compare needs at least two strategies")
    if not seeds:
        raise ConfigError("--seeds", "compare needs at least one seed")
    order = list(dict.fromkeys(strategies))
    cfgs = [cfg.with_overrides(strategy=s, seed=seed) for s in order for seed in seeds]
    summaries = _map(cfgs, jobs)
    runs = [_clean(s) for s in summaries]
    by_strategy: Dict[str, List[Dict[str, Any]]] = {s: [] for s in order}
    for r in runs:
        by_strategy[r["strategy"]].append(r)
    aggregates = []
    for s in strategies:
        rs = by_strategy[s]
        agg = {"strategy": s, "runs": len(rs)}
        for m in AGGREGATED:
            agg[m] = _stats([r[m] for r in rs])
        aggregates.append(agg)
    result = Comparison(list(strategies), list(seeds), runs, aggregates)
    if out is not None:
        out = Path(out)
        if fmt in ("csv", "both"):
            _write(out / "compare.csv", result.to_csv())
        if fmt in ("json", "both"):
            _write(out / "compare.json", _json({"aggregates": aggregates, "runs": runs}))
        _write(out / "config.yaml", dump_config(cfg))
    return result


def _label(value) -> str:
    if isinstance(value, (list, tuple)):
        return "-".join(str(v) for v in value)
    return str(value)


def sweep(cfg: ScenarioConfig, param: str, values: Sequence[Any], out: Optional[Path] = None,
          fmt: str = "both") -> List[RunArtifact]:
    """One run per value of ``param``; with ``out``, also a combined ``sweep.csv``."""
    _check_format(fmt)
    if param not in SWEEPABLE:
        raise ConfigError(param, f"not sweepable; choose from {', '.join(SWEEPABLE)}")
    if not values:
        raise ConfigError("--values", "empty value list")
    cfgs = []
    for v in values:
        try:
            cfgs.append(cfg.with_overrides(**{param: v}))
        except ConfigError as exc:
            raise ConfigError(f"{param}={v!r}", str(exc)) from None
    arts = []
    for v, c in zip(values, cfgs):
        art = run(c)
        if out is not None:
            save_run(art, Path(out) / f"{param}={_label(v)}", fmt)
        arts.append(art)
    if out is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        first = True
        for v, art in zip(values, arts):
            lines = art.series.to_csv().splitlines()
            if first:
                w.writerow([param] + lines[0].split(","))
                first = False
            for line in lines[1:]:
                w.writerow([_label(v)] + line.split(","))
        _write(Path(out) / "sweep.csv", buf.getvalue())
    return arts
