"""CSV and JSON emission. Every JSON number is wrapped with its units."""
import csv
import json
import logging
import math
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy as np

from pykanenoise.model import DeviceParameters, ToleranceBudget

logger = logging.getLogger("pykanenoise")


def quantity(value, units: str) -> Dict[str, object]:
    """{"units": ..., "value": ...}; non-finite values become null."""
    if value is not None:
        value = value.item() if isinstance(value, np.generic) else value
        if isinstance(value, float) and not math.isfinite(value):
            value = None
    return {"units": units, "value": value}


def format_number(value: float) -> str:
    return format(float(value), ".17g")


def write_csv(path: Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> Path:
    """Comma separated, header row, Unix newlines, 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    logger.info(f"wrote {len(rows)} rows to {path}")
    return path


def to_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: Path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(payload), encoding="utf-8")
    logger.info(f"wrote {path}")
    return path


def budget_to_json(budget: ToleranceBudget) -> Dict[str, object]:
    return {
        name: quantity(getattr(budget, name), units)
        for name, units in ToleranceBudget.units.items()
    }


def device_to_json(params: DeviceParameters) -> Dict[str, object]:
    c = params.constants
    return {
        "b_z": quantity(params.b_z, "T"),
        "b_ac": quantity(params.b_ac, "T"),
        "v_0": quantity(params.v_0, "V"),
        "eta": quantity(params.eta, "Hz/V"),
        "a_0": quantity(params.a_0, "J"),
        "g_n": quantity(c.g_n, "1"),
        "mu_n": quantity(c.mu_n, "J/T"),
        "mu_B": quantity(c.mu_B, "J/T"),
        "hbar": quantity(c.hbar, "J s"),
    }


def max_deviation_in_stderr(
    deviation: np.ndarray, stderr: np.ndarray, exact_tol: float = 1e-10
) -> Optional[float]:
    """
    Largest |deviation| / stderr. Samples whose standard error is below
    ``exact_tol`` (no noise, or rounding only) must match to ``exact_tol``;
    if one does not, the ratio is unbounded and None is returned.
    """
    deviation = np.abs(deviation)
    zero = np.asarray(stderr) < exact_tol
    if np.any(deviation[zero] > exact_tol):
        return None
    if np.all(zero):
        return 0.0
    return float(np.max(deviation[~zero] / stderr[~zero]))
