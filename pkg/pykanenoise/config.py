"""Reading run configurations and turning them into simulation plans."""
import json
import logging
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from pykanenoise import device
from pykanenoise.errors import ConfigError
from pykanenoise.model import EvolutionMode, RunConfig, SimPlan

logger = logging.getLogger("pykanenoise")

REGISTER_DT = 1e-3  # s
RUN_TRAJECTORIES = 1000


def _validate(data, source: str) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or None
        message = f"{source}: {first['msg']}"
        if len(e.errors()) > 1:
            message += f" (and {len(e.errors()) - 1} more error(s))"
        raise ConfigError(message, field=field) from e


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: invalid JSON, {e.msg}", line=e.lineno) from e
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    return _validate(data, source)


def load_config(path: Optional[str]) -> RunConfig:
    """Read a JSON run config; ``None`` gives the default config."""
    if path is None:
        logger.info("no config file given, using defaults")
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror}") from e
    return parse_config(text, source=path.name)


def dump_config(config: RunConfig) -> str:
    return json.dumps(
        config.model_dump(mode="json", by_alias=True, exclude_none=True),
        sort_keys=True,
        indent=2,
    )


def apply_overrides(
    config: RunConfig,
    seed: Optional[int] = None,
    n_traj: Optional[int] = None,
    dt: Optional[float] = None,
    out_dir: Optional[str] = None,
    delta: Optional[float] = None,
) -> RunConfig:
    """Command-line values replace the file's; the result is validated again."""
    data = config.model_dump(by_alias=True, exclude_unset=True)
    overrides = {
        ("simulation", "seed"): seed,
        ("simulation", "n_traj"): n_traj,
        ("simulation", "dt"): dt,
        ("output", "out_dir"): out_dir,
        ("budget", "delta"): delta,
    }
    for (block, key), value in overrides.items():
        if value is not None:
            data.setdefault(block, {})[key] = value
    return _validate(data, "command line")


def plan_from_config(config: RunConfig, mode: EvolutionMode) -> SimPlan:
    """
    Reduce a run config to the rates and grid of a simulation plan. Without
    an explicit dt a register run steps by REGISTER_DT and a rotation run
    spans one Hadamard duration tau_op.
    """
    params = config.device
    sim = config.simulation
    kappa = device.dephasing_rate(params, config.noise_spec())
    dt = sim.dt if sim.dt is not None else REGISTER_DT
    omega = 0.0
    if mode is EvolutionMode.rotation:
        omega = device.rabi_rate(params)
        if sim.dt is None:
            dt = device.tau_op(params) / sim.n_steps
            logger.info(f"rotation step set to tau_op / n_steps = {dt:.6g} s")
    return SimPlan(
        kappa=kappa,
        omega_rabi=omega,
        dt=dt,
        n_steps=sim.n_steps,
        n_traj=sim.n_traj if sim.n_traj is not None else RUN_TRAJECTORIES,
        seed=sim.seed,
        p0=config.initial_state,
        batch_size=sim.batch_size,
        workers=sim.workers,
        keep_paths=config.output.hdf5,
    )
