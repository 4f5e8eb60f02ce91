# coding: utf-8
# h5tools: reading values and attributes back from ensemble files

import logging
from pathlib import Path

import h5py
import numpy as np

logger = logging.getLogger("pykanenoise")


def h5Get(filename, h5path: str = None, default=None, leaveAsArray=True):
    """
    Gets a single dataset or attribute from an HDF5 file, with default handling.
    h5path is the location in the file, e.g. '/ensemble/mean_p'. Use '@' to
    split path and attribute name, e.g. '/ensemble/mean_p@units'.
    """
    assert h5path is not None, "h5path must be specified"
    assert isinstance(h5path, str), "h5path must be a string"
    filename = Path(filename)
    assert filename.exists(), f"input filename {filename.as_posix()} cannot be found"
    attrKey = None
    if "@" in h5path:
        h5path, attrKey = h5path.split("@")

    with h5py.File(filename, "r") as h5f:
        node = h5f.get(h5path)
        if node is None or (attrKey is not None and attrKey not in node.attrs):
            logger.warning(
                f"nothing at {h5path}{'@' + attrKey if attrKey else ''} "
                f"in {filename.as_posix()}, using default {default!r}"
            )
            return default
        val = node[()] if attrKey is None else node.attrs[attrKey]
    return h5py_casting(val, leaveAsArray)


def h5GetDict(filename, keyPaths: dict):
    """
    creates a dictionary with results extracted from an HDF5 file
    dictionary should have form:
    {h5path: default}
    """
    return {
        h5path: h5Get(filename, h5path, default=default)
        for h5path, default in keyPaths.items()
    }


def h5py_casting(val, leaveAsArray=True):
    if isinstance(val, np.ndarray) and val.size == 1 and not leaveAsArray:
        val = val.reshape(-1)[0]
    if isinstance(val, (np.bytes_, bytes)):
        val = val.decode("UTF-8")
    if isinstance(val, np.generic):
        val = val.item()
    return val
