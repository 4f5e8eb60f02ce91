import numpy as np
import pytest

pytest.importorskip("h5py")

from pykanenoise.engine import run_ensemble  # noqa: E402
from pykanenoise.hdf5.ensemble_store import (  # noqa: E402
    read_ensemble,
    read_plan,
    write_ensemble,
)
from pykanenoise.hdf5.h5tools import h5Get, h5GetDict  # noqa: E402
from pykanenoise.model import EvolutionMode, PolarizationVector, SimPlan  # noqa: E402


def _plan(keep_paths=False):
    return SimPlan(
        kappa=0.5,
        dt=0.01,
        n_steps=20,
        n_traj=30,
        seed=7,
        p0=PolarizationVector(x=0.6, z=0.8),
        batch_size=8,
        keep_paths=keep_paths,
    )


def test_write_read_ensemble(tmp_path):
    plan = _plan(keep_paths=True)
    ensemble = run_ensemble(plan, EvolutionMode.register)
    path = write_ensemble(tmp_path / "ens.h5", ensemble, plan)

    back = read_ensemble(path)
    assert back.mode is EvolutionMode.register, "mode not restored"
    assert back.n_traj == 30, "trajectory count not restored"
    np.testing.assert_array_equal(back.mean_p, ensemble.mean_p)
    np.testing.assert_array_equal(back.paths, ensemble.paths)
    assert read_plan(path) == plan, "plan attribute not restored"


def test_paths_absent_without_keep_paths(tmp_path):
    plan = _plan()
    path = write_ensemble(tmp_path / "ens.h5", run_ensemble(plan, EvolutionMode.register))
    assert read_ensemble(path).paths is None, "paths should not be stored"
    assert read_plan(path) is None, "no plan was written"


def test_readAttribute(tmp_path):
    path = write_ensemble(
        tmp_path / "ens.h5", run_ensemble(_plan(), EvolutionMode.register)
    )
    assert h5Get(path, "/ensemble/times@units") == "s", "Did not extract units"
    assert h5Get(path, "/ensemble@mode") == "register", "Did not extract mode"


def test_readMixedDict(tmp_path):
    path = write_ensemble(
        tmp_path / "ens.h5", run_ensemble(_plan(), EvolutionMode.register)
    )
    v = h5GetDict(
        path,
        {
            "/ensemble@n_traj": 0,
            "/ensemble/missing": "absent",
            "/ensemble/mean_p@units": "none",
        },
    )
    assert v["/ensemble@n_traj"] == 30, "Did not extract trajectory count"
    assert v["/ensemble/missing"] == "absent", "Default not used for missing path"
    assert v["/ensemble/mean_p@units"] == "1", "Did not extract unit attribute"


def test_read_rejects_file_without_ensemble(tmp_path):
    import h5py

    path = tmp_path / "empty.h5"
    with h5py.File(path, "w") as h5f:
        h5f.create_group("other")
    with pytest.raises(ValueError, match="holds no ensemble"):
        read_ensemble(path)
