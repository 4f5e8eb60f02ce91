"""
Ensemble statistics (and, if kept, every trajectory) in an HDF5 file.

Layout::

    /ensemble             attrs: mode, n_traj, plan (JSON)
    /ensemble/times       attrs: units = "s"
    /ensemble/mean_p      (n_samples, 3), units = "1"
    /ensemble/stderr_p    (n_samples, 3), units = "1"
    /ensemble/m2_p        (n_samples, 3), units = "1"
    /ensemble/paths       (n_traj, n_samples, 3), only with keep_paths
"""
import logging
from pathlib import Path
from typing import Optional

import h5py
import numpy as np

from pykanenoise.engine import TrajectoryEnsemble
from pykanenoise.hdf5.h5tools import h5Get, h5GetDict
from pykanenoise.model import EvolutionMode, SimPlan

logger = logging.getLogger("pykanenoise")

GROUP = "ensemble"

ensemble_units = {
    "times": "s",
    "mean_p": "1",
    "stderr_p": "1",
    "m2_p": "1",
    "paths": "1",
}


def write_ensemble(
    filename, ensemble: TrajectoryEnsemble, plan: Optional[SimPlan] = None
) -> Path:
    filename = Path(filename)
    filename.parent.mkdir(parents=True, exist_ok=True)
    with h5py.File(filename, "w") as h5f:
        group = h5f.create_group(GROUP)
        group.attrs["mode"] = ensemble.mode.value
        group.attrs["n_traj"] = ensemble.n_traj
        if plan is not None:
            group.attrs["plan"] = plan.model_dump_json()
        for name, units in ensemble_units.items():
            data = getattr(ensemble, name)
            if data is None:
                continue
            dataset = group.create_dataset(name, data=data)
            dataset.attrs["units"] = units
    logger.info(f"wrote {ensemble.n_traj} trajectories to {filename}")
    return filename


def read_ensemble(filename) -> TrajectoryEnsemble:
    """Inverse of :func:`write_ensemble`."""
    base = f"/{GROUP}"
    values = h5GetDict(
        filename,
        {
            **{f"{base}/{name}": None for name in ensemble_units},
            f"{base}@n_traj": None,
            f"{base}@mode": None,
        },
    )
    if values[f"{base}/mean_p"] is None or values[f"{base}@mode"] is None:
        raise ValueError(f"{filename} holds no ensemble")
    paths = values[f"{base}/paths"]
    return TrajectoryEnsemble(
        times=np.asarray(values[f"{base}/times"]),
        mean_p=np.asarray(values[f"{base}/mean_p"]),
        stderr_p=np.asarray(values[f"{base}/stderr_p"]),
        m2_p=np.asarray(values[f"{base}/m2_p"]),
        n_traj=int(values[f"{base}@n_traj"]),
        mode=EvolutionMode(values[f"{base}@mode"]),
        paths=None if paths is None else np.asarray(paths),
    )


def read_plan(filename) -> Optional[SimPlan]:
    text = h5Get(filename, f"/{GROUP}@plan")
    return None if text is None else SimPlan.model_validate_json(text)
