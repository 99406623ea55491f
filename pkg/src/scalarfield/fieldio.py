"""CSV serialization of fields (one row per node, coordinates then value).

The single header comment line carries the grid parameters so a stored field
can be re-certified without its original configuration.
"""

import numpy as np

from .errors import ConfigurationError, GridMismatchError
from .grid import Field, build_grid

_COL_NAMES = {"cartesian1d": ["x"], "cartesian2d": ["x", "y"], "radial": ["r"]}


def write_field(path, field, name="u"):
    grid = field.grid
    header = (
        f"# field={name} mode={grid.mode} R={grid.R!r} h={grid.h!r} N={grid.dim}\n"
        + ",".join(_COL_NAMES[grid.mode] + ["value"])
    )
    data = np.column_stack([grid.x, field.values])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def read_field(path):
    """Read a field CSV; returns (Field, name). Rebuilds the grid from the header."""
    with open(path) as fh:
        first = fh.readline().strip()
    if not first.startswith("# field="):
        raise ConfigurationError(f"{path}: missing field header line")
    meta = dict(tok.split("=", 1) for tok in first[2:].split())
    grid = build_grid(meta["mode"], float(meta["R"]), float(meta["h"]),
                      N=int(meta.get("N", 1)) if meta["mode"] == "radial" else None)
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    if data.shape[0] != grid.n:
        raise GridMismatchError(
            f"{path}: {data.shape[0]} rows for a grid with {grid.n} nodes"
        )
    coords = data[:, :-1]
    if not np.allclose(coords, grid.x, atol=1e-9):
        raise GridMismatchError(f"{path}: node coordinates do not match the header grid")
    return Field(grid, data[:, -1]), meta["field"]


def write_history(path, values, column="J"):
    with open(path, "w") as fh:
        fh.write(f"iteration,{column}\n")
        for i, v in enumerate(values):
            fh.write(f"{i},{v!r}\n")
