import math

import pytest
from hypothesis import given, settings, strategies as st

from linkpc.config import (
    ConfigError,
    RadioConfig,
    ScenarioConfig,
    dump_config,
    from_dict,
    parse_config,
    parse_config_text,
    parse_seeds,
    parse_values,
)

MINIMAL = {"node_count": 10, "seed": 1, "strategy": "link-ptx"}


def test_minimal_gets_defaults():
    cfg = from_dict(MINIMAL)
    assert cfg.comm_range == 30.0 and cfg.e_ini == 2.0 and cfg.radio == RadioConfig()
    assert cfg.link_window == 10 and cfg.probe_period == 1.0 and cfg.clustering


def test_gpsr_disables_clustering():
    assert not from_dict({**MINIMAL, "strategy": "gpsr"}).clustering


@pytest.mark.parametrize("raw,key", [
    ({**MINIMAL, "comm_range": -5}, "comm_range"),
    ({**MINIMAL, "strategy": "leach"}, "strategy"),
    ({"node_count": 3, "strategy": "lic"}, "seed"),
    ({**MINIMAL, "colour": 3}, "colour"),
    ({**MINIMAL, "radio": {"e_elec": 0}}, "radio.e_elec"),
    ({**MINIMAL, "radio": {"gain": 1}}, "radio.gain"),
    ({**MINIMAL, "radio": {"d0": 50.0}}, "radio.d0"),
    ({**MINIMAL, "link_p_true": 1.5}, "link_p_true"),
    ({**MINIMAL, "link_p_true": [0.9, 0.6]}, "link_p_true"),
    ({**MINIMAL, "node_count": 2.5}, "node_count"),
    ({**MINIMAL, "seed": True}, "seed"),
    ({**MINIMAL, "placement": "explicit", "node_count": 2, "positions": [[0, 0], [300, 0]]}, "positions[1]"),
    ({**MINIMAL, "positions": [[0, 0]]}, "positions"),
    ({**MINIMAL, "sink": 10}, "sink"),
    ({**MINIMAL, "query_region": [10, 10, 5, 5]}, "query_region"),
    ({**MINIMAL, "duration": math.inf}, "duration"),
    ({**MINIMAL, "sink_powered": "yes"}, "sink_powered"),
])
def test_errors_name_the_key(raw, key):
    with pytest.raises(ConfigError) as info:
        from_dict(raw)
    assert info.value.key == key


def test_yaml_file(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text("node_count: 5\nseed: 2\nstrategy: hcc\nradio:\n  msg_bits: 500\n")
    cfg = parse_config(path)
    assert cfg.radio.msg_bits == 500 and cfg.strategy == "hcc"
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.yaml")
    with pytest.raises(ConfigError):
        parse_config_text("node_count: [1,\n")
    with pytest.raises(ConfigError):
        parse_config_text("- 1\n- 2\n")


def test_exponent_without_dot_or_sign_is_a_number():
    cfg = parse_config_text("node_count: 5\nseed: 2\nstrategy: link-ptx\nbackoff_scale: 1.0e6\nt_slot: 1e-2\n")
    assert cfg.backoff_scale == 1e6 and cfg.t_slot == 0.01
    assert parse_values("1e5,2") == [1e5, 2]


def test_infinite_energy_round_trips():
    cfg = from_dict({**MINIMAL, "e_ini": math.inf})
    assert parse_config_text(dump_config(cfg)) == cfg


@settings(max_examples=60)
@given(
    st.integers(1, 500), st.integers(0, 2 ** 31), st.sampled_from(["link-ptx", "random-pc", "lic", "hcc", "heed", "gpsr"]),
    st.floats(1, 1000), st.one_of(st.floats(0.01, 1.0), st.tuples(st.floats(0.01, 0.5), st.floats(0.5, 1.0))),
    st.floats(1e-4, 1.0), st.booleans(),
)
def test_echo_round_trip(n, seed, strategy, rng_, lp, t_slot, connected):
    raw = {"node_count": n, "seed": seed, "strategy": strategy, "comm_range": rng_,
           "link_p_true": list(lp) if isinstance(lp, tuple) else lp, "t_slot": t_slot,
           "require_connected": connected, "query_region": [0, 0, 50.5, 60]}
    cfg = from_dict(raw)
    assert parse_config_text(dump_config(cfg)) == cfg


def test_explicit_positions_round_trip():
    cfg = from_dict({**MINIMAL, "node_count": 2, "placement": "explicit", "positions": [[1, 2], [3.5, 4]]})
    assert cfg.positions == ((1.0, 2.0), (3.5, 4.0))
    assert parse_config_text(dump_config(cfg)) == cfg


def test_with_overrides_validates():
    cfg = from_dict(MINIMAL)
    assert cfg.with_overrides(node_count=20).node_count == 20
    with pytest.raises(ConfigError):
        cfg.with_overrides(node_count=0)


def test_seed_and_value_lists():
    assert parse_seeds("1..4") == [1, 2, 3, 4]
    assert parse_seeds("3, 5") == [3, 5]
    with pytest.raises(ValueError):
        parse_seeds("5..1")
    assert parse_values("50,100, 150") == [50, 100, 150]
    assert parse_values("link-ptx,gpsr") == ["link-ptx", "gpsr"]
    assert parse_values("0.5,[0.6, 1.0]") == [0.5, [0.6, 1.0]]
    assert parse_values("") == []
    with pytest.raises(ConfigError):
        parse_values("[1,")


def test_scenario_is_frozen():
    cfg = from_dict(MINIMAL)
    with pytest.raises(Exception):
        cfg.seed = 3
    assert isinstance(cfg, ScenarioConfig)
