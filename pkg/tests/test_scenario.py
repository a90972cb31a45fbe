"""Config parsing, validation, canonical echo, sweep variants."""

import pytest

from uavmec.scenario import (
    ConfigError,
    ScenarioConfig,
    config_echo,
    load_config,
    load_config_text,
    make_variant,
)

DOC = """
# comment line
sim.M = 6          # trailing comment
sim.T = 12
queues.v_param = 25.0
sim.schemes = OJOA, ELC
sim.seeds = 3, 4
bench.era_trajectory = hold
"""


def test_empty_text_gives_defaults():
    assert load_config_text("") == ScenarioConfig()


def test_default_numbers(cfg):
    assert cfg.sim.num_uds == 20 and cfg.sim.num_slots == 80
    assert cfg.queues.v_param == 50.0
    assert cfg.queues.energy_budget == 180.0
    assert cfg.queues.budget_compute + cfg.queues.budget_propulsion == pytest.approx(180.0)
    assert cfg.sim.seeds == tuple(range(1, 11))
    assert cfg.area == (400.0, 400.0) and cfg.area_center == (200.0, 200.0)


def test_document_parsing():
    c = load_config_text(DOC)
    assert c.sim.num_uds == 6 and c.sim.num_slots == 12
    assert c.queues.v_param == 25.0
    assert c.sim.schemes == ("OJOA", "ELC")
    assert c.sim.seeds == (3, 4)
    assert c.bench.era_trajectory == "hold"


def test_overrides_win_over_document():
    c = load_config_text(DOC, overrides=["sim.M=9", "queues.v_param=2"])
    assert c.sim.num_uds == 9 and c.queues.v_param == 2.0


def test_error_reporting():
    with pytest.raises(ConfigError, match="unknown key"):
        load_config_text("sim.bogus = 1")
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        load_config_text("just words")
    with pytest.raises(ConfigError, match="config:3"):
        load_config_text("\n\nsim.M = zero")
    with pytest.raises(ConfigError, match="override #1"):
        load_config_text("", overrides=["nonsense"])
    with pytest.raises(ConfigError):
        load_config_text("sim.M = -2")
    with pytest.raises(ConfigError):
        load_config_text("sim.schemes = OJOA, BOGUS")
    with pytest.raises(ConfigError):
        load_config_text("bench.era_trajectory = drift")
    with pytest.raises(ConfigError):
        load_config_text("bench.flp_allocation = greedy")


def test_cross_validation():
    with pytest.raises(ConfigError, match="data_min"):
        load_config_text("tasks.data_min = 2e6")
    with pytest.raises(ConfigError, match="initial position"):
        load_config_text("uav.init_x = 900")
    with pytest.raises(ConfigError, match="sweepable"):
        load_config_text("sweep.key = output.dir\nsweep.values = 1")
    with pytest.raises(ConfigError, match="sweep.values"):
        load_config_text("sweep.key = queues.v_param")


def test_echo_round_trip():
    c = load_config_text(DOC, overrides=["uav.v_max=25"])
    echo = config_echo(c)
    again = load_config_text(echo)
    assert again == c
    assert "sim.M = 6  # override" in echo
    assert "uav.v_max = 25.0  # override" in echo
    assert "uav.height = 100.0  # benchmark" in echo
    assert "stage2.epsilon = 0.01  # assumed" in echo


def test_echo_is_canonical():
    echo = config_echo(load_config_text(""))
    assert echo.endswith("\n")
    assert load_config_text(echo) == ScenarioConfig()
    lines = [l for l in echo.splitlines() if " = " in l and not l.startswith("#")]
    keys = [l.split(" = ")[0] for l in lines]
    assert len(keys) == len(set(keys))              # no duplicate keys
    assert all(l.rsplit("# ", 1)[1] in ("benchmark", "assumed") for l in lines)
    sections = {k.split(".")[0] for k in keys}
    assert sections == {"sim", "channel", "uav", "ud", "tasks", "mobility",
                        "queues", "stage1", "stage2", "bench", "sweep", "output"}


def test_load_config_file(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text(DOC, encoding="utf-8")
    assert load_config(p) == load_config_text(DOC)
    with pytest.raises(ConfigError, match=str(p)):
        p.write_text("sim.M = x", encoding="utf-8")
        load_config(p)


def test_make_variant():
    base = load_config_text("")
    v = make_variant(base, "tasks.data_max", 4e5)
    assert v.tasks.data_max == 4e5
    assert v.sim == base.sim
    with pytest.raises(ConfigError):
        make_variant(base, "output.dir", 1.0)
    with pytest.raises(ConfigError):
        make_variant(base, "sim.M", 2.5)
    vi = make_variant(base, "sim.M", 4.0)
    assert vi.sim.num_uds == 4


def test_sweep_declaration_accepted():
    c = load_config_text("sweep.key = queues.v_param\nsweep.values = 0.5, 2, 8, 32")
    assert c.sweep.key == "queues.v_param"
    assert c.sweep.values == (0.5, 2.0, 8.0, 32.0)
