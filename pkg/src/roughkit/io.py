"""File formats: CSV paths, JSON two-parameter fields and rough paths.

Paths are CSV with header ``t,x1,...,xd`` and floats printed with 17
significant digits, which round-trips IEEE doubles exactly.  Fields are JSON
objects holding the grid and the flattened upper triangle (row-major over
``i <= j``).  JSON floats use Python's shortest round-trip representation.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .core import GridPath, TimeGrid, TwoParamField
from .errors import ParameterError

FLOAT_FMT = "%.17g"


def read_path_csv(path) -> GridPath:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "t":
            raise ParameterError(f"{path}: expected a header starting with 't'")
        rows = [[float(x) for x in row] for row in reader if row]
    if not rows:
        raise ParameterError(f"{path}: no data rows")
    arr = np.array(rows)
    if arr.shape[1] != len(header):
        raise ParameterError(f"{path}: row width does not match header")
    return GridPath(TimeGrid(arr[:, 0]), arr[:, 1:])


def write_path_csv(path, f: GridPath) -> None:
    vals = f.values.reshape(f.n, -1)
    header = "t," + ",".join(f"x{k + 1}" for k in range(vals.shape[1]))
    data = np.column_stack([f.grid.times, vals])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt=FLOAT_FMT)


def _upper(n: int):
    return np.triu_indices(n)


def field_to_dict(A: TwoParamField) -> dict:
    iu = _upper(A.n)
    d = A.dense()
    return {
        "grid": A.grid.times.tolist(),
        "value_shape": list(A.value_shape),
        "upper": d[iu].reshape(len(iu[0]), -1).ravel().tolist(),
    }


def field_from_dict(obj: dict) -> TwoParamField:
    grid = TimeGrid(obj["grid"])
    shape = tuple(obj.get("value_shape", []))
    n = grid.n
    iu = _upper(n)
    flat = np.asarray(obj["upper"], dtype=float)
    width = int(np.prod(shape, dtype=int))
    if flat.size != len(iu[0]) * width:
        raise ParameterError("upper-triangle length does not match grid and value shape")
    out = np.zeros((n, n) + shape)
    out[iu] = flat.reshape((len(iu[0]),) + shape)
    return TwoParamField(grid, out)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_field_json(path, A: TwoParamField) -> None:
    write_json(path, field_to_dict(A))


def read_field_json(path) -> TwoParamField:
    return field_from_dict(read_json(path))


def roughpath_to_dict(P) -> dict:
    X = P.X
    d = field_to_dict(P.XX)
    return {"grid": X.grid.times.tolist(), "X": X.values.tolist(), "XX": {"value_shape": d["value_shape"], "upper": d["upper"]}}


def roughpath_from_dict(obj: dict, check: bool = True):
    from .roughpath import RoughPath

    grid = TimeGrid(obj["grid"])
    X = GridPath(grid, np.asarray(obj["X"], dtype=float))
    XX = field_from_dict({"grid": obj["grid"], **obj["XX"]})
    return RoughPath(X, XX, check=check)


def write_roughpath_json(path, P) -> None:
    write_json(path, roughpath_to_dict(P))


def read_roughpath_json(path, check: bool = True):
    return roughpath_from_dict(read_json(path), check=check)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def controlled_to_dict(Y) -> dict:
    """Values and Gubinelli derivative of a controlled path (the driver is not repeated)."""
    return {"grid": Y.grid.times.tolist(), "Y": Y.Y.values.tolist(), "Yprime": Y.Yp.values.tolist()}


def parse_vector(text: str) -> list:
    """``"0.2,0.1"`` -> ``[0.2, 0.1]``."""
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ParameterError(f"cannot parse {text!r} as a comma-separated vector") from exc


def parse_sizes(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ParameterError(f"cannot parse {text!r} as comma-separated integers") from exc
