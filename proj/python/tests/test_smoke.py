import pytest

import agvsl


def short_config(**overrides):
    c = agvsl.ScenarioConfig()
    c.sim_duration_s = 1.0
    for k, v in overrides.items():
        setattr(c, k, v)
    return c


def test_run_returns_kpis():
    rec = agvsl.run(short_config(alloc_mode="mode2", n_group_agvs=6, seed=4))
    assert rec.run_id == "mode2-k6-p10-harq0-half-s4"
    assert rec.prr is not None and 0.0 <= rec.prr <= 1.0
    assert rec.generated > 0
    assert rec.delivered + rec.expired <= rec.generated


def test_run_is_deterministic():
    c = short_config(alloc_mode="cooperative", harq_enabled=True)
    assert agvsl.run(c) == agvsl.run(c)


def test_invalid_config_raises():
    with pytest.raises(agvsl.ConfigError):
        agvsl.run(short_config(n_group_agvs=9))
    with pytest.raises(ValueError):
        short_config().alloc_mode = "bogus"


def test_json_round_trip():
    c = short_config(alloc_mode="mode1", packet_period_ms=3, duplex="full")
    back = agvsl.ScenarioConfig.from_json(c.to_json())
    assert agvsl.run_id(back) == agvsl.run_id(c) == "mode1-k4-p3-harq0-full-s1"


def test_csv_round_trip():
    recs = [agvsl.run(short_config(seed=s)) for s in (1, 2)]
    text = agvsl.to_csv(recs)
    assert text.splitlines()[0] == agvsl.CSV_HEADER
    assert agvsl.parse_csv(text) == recs


def test_cli_front_end():
    code, out, err = agvsl.cli(["validate", "--agvs", "8"])
    assert (code, out, err) == (0, "ok: mode2-k8-p10-harq0-half-s1\n", "")
    code, _, err = agvsl.cli(["run", "--agvs", "9"])
    assert code == 2 and err
