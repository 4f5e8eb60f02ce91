import json

import pytest

from ..config import (
    REGISTER_DT,
    RUN_TRAJECTORIES,
    apply_overrides,
    dump_config,
    load_config,
    parse_config,
    plan_from_config,
)
from ..device import dephasing_rate, rabi_rate, tau_op
from ..errors import ConfigError, PlanError
from ..model import DeviceParameters, EvolutionMode, NoiseSpec, RunConfig

FULL_CONFIG = {
    "device": {"b_z": 2.0, "b_ac": 0.001, "v_0": 1.0, "a_0": 7.785e-26},
    "noise": {"lambda": 1e-15},
    "initial_state": {"x": 0.6, "y": 0.0, "z": 0.8},
    "simulation": {"dt": 1e-4, "n_steps": 200, "n_traj": 500, "seed": 9, "workers": 2},
    "output": {"out_dir": "results", "stride": 4},
    "budget": {"delta": 2e-5, "deltas": [1e-6, 1e-4], "biases": [0.5, 1.0]},
}


def test_empty_config_is_valid():
    config = parse_config("{}")
    assert config == RunConfig(), "an empty file gives the defaults"
    assert config.noise_spec() == NoiseSpec(), "default config is noiseless"
    assert config.simulation.dt is None and config.simulation.n_traj is None
    assert config.simulation.n_steps == 400


def test_round_trip():
    config = parse_config(json.dumps(FULL_CONFIG))
    again = RunConfig.model_validate(json.loads(dump_config(config)))
    assert again == config, "parse -> dump -> parse must be the identity"
    assert parse_config(dump_config(RunConfig())) == RunConfig()


def test_dump_uses_lambda_key():
    text = dump_config(parse_config(json.dumps(FULL_CONFIG)))
    assert '"lambda": 1e-15' in text, "noise strength is written under its config name"


def test_noise_given_three_ways():
    params = DeviceParameters()
    noise = NoiseSpec.from_lambda(params, 1e-15)
    kappa = dephasing_rate(params, noise)
    for block in (
        {"lambda": 1e-15},
        {"epsilon": noise.epsilon},
        {"kappa": kappa},
        {"lambda": 1e-15, "epsilon": noise.epsilon, "kappa": kappa},
    ):
        config = parse_config(json.dumps({"noise": block}))
        assert dephasing_rate(config.device, config.noise_spec()) == pytest.approx(
            kappa, rel=1e-9
        ), f"noise block {block} gives the wrong rate"


def test_inconsistent_noise_is_rejected():
    params = DeviceParameters()
    eps = NoiseSpec.from_lambda(params, 1e-15).epsilon
    with pytest.raises(ConfigError, match="inconsistent") as info:
        parse_config(json.dumps({"noise": {"lambda": 1e-15, "epsilon": 1.01 * eps}}))
    assert info.value.field is None, "a cross-field check names no single field"


def test_noise_without_bias_is_rejected():
    with pytest.raises(ConfigError, match="v_0 = 0"):
        parse_config(json.dumps({"device": {"v_0": 0.0}, "noise": {"lambda": 1e-15}}))


@pytest.mark.parametrize(
    "data, field",
    [
        ({"simulation": {"dt": -1.0}}, "simulation.dt"),
        ({"output": {"stride": 0}}, "output.stride"),
        ({"device": {"b_zz": 2.0}}, "device.b_zz"),
        ({"noise": {"lambda": -1.0}}, "noise.lambda"),
        ({"budget": {"delta": 0.7}}, "budget.delta"),
    ],
)
def test_field_diagnostics(data, field):
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(data))
    assert info.value.field == field, f"diagnostic should name {field}"
    assert field in str(info.value)


def test_syntax_error_reports_line():
    with pytest.raises(ConfigError) as info:
        parse_config('{\n  "simulation": {\n    "dt": ,\n  }\n}')
    assert info.value.line == 3, "diagnostic should name the offending line"
    assert "line 3" in str(info.value)


def test_top_level_must_be_object():
    with pytest.raises(ConfigError, match="JSON object"):
        parse_config("[1, 2]")


def test_load_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(FULL_CONFIG))
    assert load_config(str(path)).simulation.seed == 9
    assert load_config(None) == RunConfig()
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.json"))


def test_overrides():
    config = parse_config(json.dumps(FULL_CONFIG))
    changed = apply_overrides(
        config, seed=1, n_traj=10, dt=2e-4, out_dir="elsewhere", delta=1e-4
    )
    assert changed.simulation.seed == 1
    assert changed.simulation.n_traj == 10
    assert changed.simulation.dt == 2e-4
    assert changed.output.out_dir == "elsewhere"
    assert changed.budget.delta == 1e-4
    assert changed.simulation.workers == 2, "fields without an override are kept"
    assert apply_overrides(config) == config
    with pytest.raises(ConfigError) as info:
        apply_overrides(config, n_traj=0)
    assert info.value.field == "simulation.n_traj"


def test_plan_from_config_register():
    config = parse_config(json.dumps(FULL_CONFIG))
    plan = plan_from_config(config, EvolutionMode.register)
    assert plan.omega_rabi == 0.0
    assert plan.kappa == pytest.approx(dephasing_rate(config.device, config.noise_spec()))
    assert plan.dt == 1e-4 and plan.n_traj == 500 and plan.seed == 9
    assert plan.p0 == config.initial_state


def test_plan_from_config_rotation_default_step():
    config = parse_config("{}")
    plan = plan_from_config(config, EvolutionMode.rotation)
    assert plan.omega_rabi == pytest.approx(rabi_rate(config.device))
    assert plan.t_final == pytest.approx(tau_op(config.device), rel=1e-12)
    with pytest.raises(PlanError, match="omega_rabi"):
        plan_from_config(apply_overrides(config, dt=1e-3), EvolutionMode.rotation)


def test_plan_from_config_register_defaults():
    plan = plan_from_config(parse_config("{}"), EvolutionMode.register)
    assert plan.dt == REGISTER_DT
    assert plan.n_traj == RUN_TRAJECTORIES


@pytest.mark.parametrize("mode", list(EvolutionMode))
def test_dumped_config_plans_like_the_original(mode):
    config = parse_config("{}")
    again = parse_config(dump_config(config))
    assert again == config
    assert plan_from_config(again, mode) == plan_from_config(config, mode), (
        "a dumped config must run exactly like the one it was dumped from"
    )


def test_dumped_overrides_are_kept():
    config = apply_overrides(parse_config("{}"), dt=2e-9, n_traj=7)
    plan = plan_from_config(parse_config(dump_config(config)), EvolutionMode.rotation)
    assert plan.dt == 2e-9 and plan.n_traj == 7
