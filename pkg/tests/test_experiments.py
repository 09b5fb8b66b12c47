import json

import pytest

from kcq.experiments import (
    QUANTITIES,
    ConfigError,
    bundled_configs,
    load_config,
    parse_config,
    run_experiment,
)
from kcq.report import render


def test_qk_noiseless_records():
    cfg = parse_config({"protocol": "qk", "quantity": "records",
                        "params": {"channelNoise": 0.0, "n": 1000}, "trials": 100})
    rows = run_experiment(cfg)
    bob = [r for r in rows if r.quantity == "bobErrors"]
    assert len(bob) == 100
    assert all(r.estimate == 0 and r.passed for r in bob)


def test_cppm_sweep_matches_closed_form():
    cfg = parse_config({"protocol": "cppm", "quantity": "bobError",
                        "params": {"m": 16, "eta": 1.0},
                        "sweepAxis": {"name": "S", "values": [2, 4, 6]},
                        "trials": 200_000, "rngSeed": 3})
    rows = run_experiment(cfg)
    assert [r.params["S"] for r in rows] == [2, 4, 6]
    assert all(r.passed for r in rows)


def test_rerun_is_byte_identical(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"protocol": "cppm", "quantity": "bobError",
                                "params": {"m": 8, "S": 2.0}, "trials": 20_000, "rngSeed": 5}))
    a = render(run_experiment(load_config(path)))
    b = render(run_experiment(load_config(path)))
    assert a == b


def test_parallel_matches_serial():
    cfg = parse_config({"protocol": "qk", "quantity": "advantage",
                        "params": {"n": 500}, "trials": 20_000, "rngSeed": 9})
    assert render(run_experiment(cfg, jobs=1)) == render(run_experiment(cfg, jobs=4))


def test_seed_override_changes_draws():
    cfg = parse_config({"protocol": "cppm", "quantity": "bobError",
                        "params": {"m": 8, "S": 1.0}, "trials": 5000})
    assert render(run_experiment(cfg, seed=1)) != render(run_experiment(cfg, seed=2))


@pytest.mark.parametrize("data,path", [
    ({"protocol": "qk", "quantity": "advantage", "trials": 0}, "trials"),
    ({"protocol": "qkd", "quantity": "advantage"}, "protocol"),
    ({"protocol": "qk", "quantity": "nothing"}, "quantity"),
    ({"protocol": "qk", "quantity": "advantage", "params": {"bogus": 1}}, "params.bogus"),
    ({"protocol": "qk", "quantity": "advantage", "rngSeed": -1}, "rngSeed"),
    ({"protocol": "qk", "quantity": "advantage", "extra": 1}, ""),
    ({"protocol": "cppm", "quantity": "bobError",
      "sweepAxis": {"name": "m", "values": [8, 12]}}, "sweepAxis.values[1]"),
    ({"protocol": "cppm", "quantity": "bobError",
      "sweepAxis": [{"name": "S", "values": [1]}, {"name": "m", "values": [6]}]},
     "sweepAxis[1].values[0]"),
    ({"protocol": "cppm", "quantity": "bobError", "sweepAxis": {"name": "q", "values": [1]}},
     "sweepAxis.name"),
    ({"protocol": "alphaEta", "quantity": "bobBer", "params": {"M": 6}}, "params"),
])
def test_config_errors_carry_field_path(data, path):
    with pytest.raises(ConfigError) as info:
        parse_config(data)
    assert info.value.path == path


def test_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(ConfigError):
        load_config(p)


def test_crossed_sweep():
    cfg = parse_config({"protocol": "cppm", "quantity": "bobError",
                        "sweepAxis": [{"name": "m", "values": [8, 16]},
                                      {"name": "S", "values": [1, 2, 3]}]})
    pts = cfg.points()
    assert len(pts) == 6
    assert (pts[-1]["m"], pts[-1]["S"]) == (16, 3)


def test_bundled_configs_parse():
    paths = bundled_configs()
    assert len(paths) >= 12
    for p in paths:
        cfg = load_config(p)
        assert (cfg.protocol, cfg.quantity) in QUANTITIES
