"""Canonical JSON text and CSV round-trip for radial profiles.

The JSON form is byte-stable: keys keep insertion order, every float is
rendered with ``%.17g`` (enough digits to round-trip IEEE doubles), and
non-finite floats become ``null``.  Two runs that produce equal objects
produce identical bytes, which is what the CLI contract tests pin down.
"""

from __future__ import annotations

import dataclasses
import json
from typing import Any

import numpy as np

from .errors import DomainError
from .radial import RadialGrid, RadialProfile

__all__ = ["canonical_json", "to_jsonable", "write_profile_csv",
           "read_profile_csv"]

_FLOAT_FMT = "%.17g"


def to_jsonable(obj: Any) -> Any:
    """Plain-Python view of dataclasses / numpy containers, order kept."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _encode(obj: Any, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, float):
        if np.isfinite(obj):
            out.append(_FLOAT_FMT % obj)
        else:
            out.append("null")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(json.dumps(str(k)))
            out.append(":")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _encode(v, out)
        out.append("]")
    else:
        raise DomainError("cannot canonicalise object of type %s" % type(obj).__name__)


def canonical_json(obj: Any) -> str:
    out: list = []
    _encode(to_jsonable(obj), out)
    return "".join(out)


def write_profile_csv(path, profile: RadialProfile) -> None:
    """Three-column CSV (r, u, du) at full double precision."""
    data = np.column_stack(
        [profile.grid.nodes, profile.values, profile.derivative()]
    )
    np.savetxt(path, data, fmt=_FLOAT_FMT, delimiter=",", header="r,u,du",
               comments="")


def read_profile_csv(path) -> RadialProfile:
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise DomainError("profile CSV must have columns r,u,du")
    nodes = np.ascontiguousarray(data[:, 0])
    grid = RadialGrid(nodes=nodes, R=float(nodes[-1]))
    meta = {"csv_source": str(path)}
    if np.min(data[:, 1]) < 0.0 or not np.all(np.isfinite(data[:, 1])):
        meta["allow_blowup"] = True
    return RadialProfile(grid=grid, values=data[:, 1], du=data[:, 2], meta=meta)
