"""Scenario configuration: YAML in, validated :class:`ScenarioConfig` out."""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml

from linkpc.baselines import STRATEGIES
from linkpc.netmodel import DomainError, RadioParams


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class RadioConfig:
    e_elec: float = 50e-9
    eps_fs: float = 10e-12
    eps_mp: float = 0.0013e-12
    d0: Optional[float] = None
    msg_bits: int = 1000
    probe_bits: int = 128
    ack_bits: int = 64

    def params(self) -> RadioParams:
        return RadioParams(self.e_elec, self.eps_fs, self.eps_mp, self.d0, self.msg_bits)


@dataclass(frozen=True)
class ScenarioConfig:
    node_count: int
    seed: int
    strategy: str
    field_width: float = 200.0
    field_height: float = 200.0
    comm_range: float = 30.0
    placement: str = "uniform-random"
    positions: Optional[Tuple[Tuple[float, float], ...]] = None
    require_connected: bool = True
    sink: Union[str, int] = "center"
    sink_powered: bool = True
    query_region: Optional[Tuple[float, float, float, float]] = None
    e_ini: float = 2.0
    radio: RadioConfig = field(default_factory=RadioConfig)
    n_req: float = 0.2
    t_slot: float = 0.01
    backoff_scale: float = 1.0
    c_prob: float = 0.05
    duration: float = 60.0
    link_p_true: Union[float, Tuple[float, float]] = 1.0
    link_window: int = 10
    probe_period: float = 1.0
    sampling_interval: float = 1.0
    query_start: float = 5.0
    query_interval: float = 20.0
    max_attempts: int = 4
    prop_delay: float = 0.001
    dead_windows: int = 10

    @property
    def clustering(self) -> bool:
        return self.strategy != "gpsr"

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        if self.positions is not None:
            out["positions"] = [list(p) for p in self.positions]
        if self.query_region is not None:
            out["query_region"] = list(self.query_region)
        if isinstance(self.link_p_true, tuple):
            out["link_p_true"] = list(self.link_p_true)
        return out

    def with_overrides(self, **changes) -> "ScenarioConfig":
        return from_dict({**self.to_dict(), **changes})


REQUIRED = ("node_count", "seed", "strategy")
SWEEPABLE = (
    "node_count", "seed", "strategy", "field_width", "field_height", "comm_range", "e_ini",
    "n_req", "t_slot", "backoff_scale", "c_prob", "duration", "link_p_true", "link_window",
    "probe_period", "query_interval", "max_attempts",
)


def _positive(key, value, integer=False, allow_inf=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if integer and (not isinstance(value, int)):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ConfigError(key, f"must be finite, got {value!r}")
    if not value > 0:
        raise ConfigError(key, f"must be > 0, got {value!r}")
    return value


def _probability(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0 < value <= 1:
        raise ConfigError(key, f"must be a probability in (0, 1], got {value!r}")
    return float(value)


def _radio(raw) -> RadioConfig:
    if raw is None:
        return RadioConfig()
    if isinstance(raw, RadioConfig):
        return raw
    if not isinstance(raw, dict):
        raise ConfigError("radio", f"expected a mapping, got {type(raw).__name__}")
    known = {f.name for f in fields(RadioConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"radio.{key}", "unknown key")
    vals = {}
    for key, value in raw.items():
        if key == "d0" and value is None:
            vals[key] = None
            continue
        integer = key.endswith("_bits")
        vals[key] = _positive(f"radio.{key}", value, integer=integer)
        if not integer:
            vals[key] = float(vals[key])
    rc = RadioConfig(**vals)
    try:
        rc.params()
    except DomainError as exc:
        raise ConfigError("radio.d0", str(exc)) from None
    return rc


def from_dict(raw: Dict[str, Any]) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    known = {f.name for f in fields(ScenarioConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown key")
    for key in REQUIRED:
        if key not in raw:
            raise ConfigError(key, "missing required key")

    v = dict(raw)
    _positive("node_count", v["node_count"], integer=True)
    if isinstance(v["seed"], bool) or not isinstance(v["seed"], int) or v["seed"] < 0:
        raise ConfigError("seed", f"expected a non-negative integer, got {v['seed']!r}")
    if v["strategy"] not in STRATEGIES:
        raise ConfigError("strategy", f"unknown strategy {v['strategy']!r}; expected one of {', '.join(STRATEGIES)}")

    for key in ("field_width", "field_height", "comm_range", "n_req", "t_slot", "backoff_scale",
                "duration", "probe_period", "sampling_interval", "prop_delay"):
        if key in v:
            v[key] = float(_positive(key, v[key]))
    if "e_ini" in v:
        v["e_ini"] = float(_positive("e_ini", v["e_ini"], allow_inf=True))
    for key in ("link_window", "max_attempts", "dead_windows"):
        if key in v:
            _positive(key, v[key], integer=True)
    if "c_prob" in v:
        v["c_prob"] = _probability("c_prob", v["c_prob"])
    for key in ("query_start", "query_interval"):
        if key in v:
            val = v[key]
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val) or val < 0:
                raise ConfigError(key, f"must be a finite number >= 0, got {val!r}")
            v[key] = float(val)

    placement = v.get("placement", "uniform-random")
    if placement not in ("uniform-random", "grid", "explicit"):
        raise ConfigError("placement", f"expected uniform-random, grid or explicit, got {placement!r}")
    pos = v.get("positions")
    if placement == "explicit":
        if not isinstance(pos, (list, tuple)) or len(pos) != v["node_count"]:
            raise ConfigError("positions", "explicit placement needs one [x, y] per node")
    if pos is not None:
        clean = []
        for k, p in enumerate(pos):
            if not isinstance(p, (list, tuple)) or len(p) != 2:
                raise ConfigError(f"positions[{k}]", f"expected [x, y], got {p!r}")
            x, y = (float(c) for c in p)
            w = float(v.get("field_width", 200.0))
            h = float(v.get("field_height", 200.0))
            if not (0 <= x <= w and 0 <= y <= h):
                raise ConfigError(f"positions[{k}]", f"({x}, {y}) outside field [0, {w}] x [0, {h}]")
            clean.append((x, y))
        v["positions"] = tuple(clean)
        if placement != "explicit":
            raise ConfigError("positions", "only valid with placement: explicit")

    sink = v.get("sink", "center")
    if not (sink == "center" or (isinstance(sink, int) and not isinstance(sink, bool)
                                 and 0 <= sink < v["node_count"])):
        raise ConfigError("sink", f"expected 'center' or a node index, got {sink!r}")

    region = v.get("query_region")
    if region is not None:
        if not isinstance(region, (list, tuple)) or len(region) != 4:
            raise ConfigError("query_region", "expected [x0, y0, x1, y1]")
        x0, y0, x1, y1 = (float(c) for c in region)
        if x1 < x0 or y1 < y0:
            raise ConfigError("query_region", "upper corner below lower corner")
        v["query_region"] = (x0, y0, x1, y1)

    lp = v.get("link_p_true", 1.0)
    if isinstance(lp, (list, tuple)):
        if len(lp) != 2:
            raise ConfigError("link_p_true", "expected a probability or [low, high]")
        lo = _probability("link_p_true[0]", lp[0])
        hi = _probability("link_p_true[1]", lp[1])
        if hi < lo:
            raise ConfigError("link_p_true", f"range [{lo}, {hi}] is empty")
        v["link_p_true"] = (lo, hi)
    else:
        v["link_p_true"] = _probability("link_p_true", lp)

    for key in ("require_connected", "sink_powered"):
        if key in v and not isinstance(v[key], bool):
            raise ConfigError(key, "expected true or false")

    v["radio"] = _radio(v.get("radio"))
    return ScenarioConfig(**v)


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e6`` and ``1.0e6`` as floats, as YAML 1.2 does."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^[-+]?(?:[0-9][0-9_]*\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                  |[0-9][0-9_]*[eE][-+]?[0-9]+
                  |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                  |\.(?:inf|Inf|INF)|[-+]\.(?:inf|Inf|INF)
                  |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)


def _load(text: str):
    return yaml.load(text, Loader=_Loader)


def parse_config_text(text: str) -> ScenarioConfig:
    try:
        raw = _load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"malformed YAML: {exc}") from None
    return from_dict(raw)


def parse_config(path: Union[str, Path]) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return parse_config_text(text)


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def parse_values(text: str) -> List[Any]:
    """Comma-separated sweep values in YAML flow syntax, e.g. ``50,100`` or ``0.9,[0.6, 1.0]``."""
    try:
        values = _load(f"[{text}]")
    except yaml.YAMLError as exc:
        raise ConfigError("--values", f"cannot parse {text!r}: {exc}") from None
    return values


def parse_seeds(text: str) -> List[int]:
    """``"1..20"`` or ``"1,2,5"``."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo_i, hi_i = int(lo), int(hi)
        if hi_i < lo_i:
            raise ValueError(f"empty seed range {text!r}")
        return list(range(lo_i, hi_i + 1))
    return [int(p) for p in text.split(",") if p.strip()]
