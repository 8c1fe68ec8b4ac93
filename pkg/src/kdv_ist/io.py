"""File formats: scattering.json, potential CSV files and fixed-precision JSON.

Every float is written with 17 significant digits so that a file read back
reproduces the in-memory doubles exactly.  Non-finite floats are written as
``null``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .exceptions import ConfigError
from .grid import GridFunction, MomentumGrid
from .profile import PotentialProfile
from .scatter import BoundState, Jump, ScatteringData

__all__ = [
    "SCHEMA_VERSION",
    "dumps",
    "scattering_to_dict",
    "scattering_from_dict",
    "write_scattering",
    "read_scattering",
    "write_profile_csv",
    "read_profile_csv",
    "write_json",
]

SCHEMA_VERSION = "1"

PathLike = Union[str, Path]


def _float(v) -> str:
    v = float(v)
    if not np.isfinite(v):
        return "null"
    return format(v, ".17g")


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """Serialize nested dicts/lists/scalars as JSON with 17-digit floats.

    numpy scalars and arrays are accepted; key order is preserved.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def write_json(obj, path: PathLike) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(obj) + "\n")
    return path


def scattering_to_dict(S: ScatteringData) -> dict:
    """Dictionary in the scattering.json schema."""
    T = S.transmission.values if S.transmission is not None else None
    return {
        "grid": {"k_max": S.grid.k_max, "n": S.grid.n},
        "reflection": {"re": S.reflection.values.real, "im": S.reflection.values.imag},
        "transmission": {"re": T.real, "im": T.imag} if T is not None else None,
        "bound_states": [{"kappa": b.kappa, "c": b.c} for b in S.bound_states],
        "jumps": [
            {"omega": j.omega, "gamma": j.gamma, "sign_a": int(j.sign_a), "alpha": j.alpha}
            for j in S.jumps
        ],
        "meta": {"version": SCHEMA_VERSION, "k_floor": float(S.meta.get("k_floor", 0.0))},
    }


def _complex(block, n, name):
    try:
        re = np.asarray(block["re"], dtype=float)
        im = np.asarray(block["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must have numeric 're' and 'im' lists") from exc
    if re.shape != (n,) or im.shape != (n,):
        raise ConfigError(f"{name} must have {n} entries")
    return re + 1j * im


def scattering_from_dict(d: dict) -> ScatteringData:
    """Inverse of :func:`scattering_to_dict`.

    Raises
    ------
    ConfigError
        On missing keys, wrong lengths or an unsupported schema version.
    """
    expected = {"grid", "reflection", "transmission", "bound_states", "jumps", "meta"}
    if not isinstance(d, dict) or set(d) != expected:
        raise ConfigError(f"scattering data must have exactly the keys {sorted(expected)}")
    meta = d["meta"] or {}
    if str(meta.get("version")) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported scattering schema version {meta.get('version')!r}")
    try:
        grid = MomentumGrid(float(d["grid"]["k_max"]), int(d["grid"]["n"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError("grid must have 'k_max' and 'n'") from exc
    R = GridFunction(grid, _complex(d["reflection"], grid.n, "reflection"))
    T = None
    if d["transmission"] is not None:
        T = GridFunction(grid, _complex(d["transmission"], grid.n, "transmission"))
    try:
        bound = tuple(BoundState(float(b["kappa"]), float(b["c"])) for b in d["bound_states"])
        jumps = tuple(
            Jump(float(j["omega"]), float(j["gamma"]), int(j["sign_a"]), float(j["alpha"]))
            for j in d["jumps"]
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError("malformed bound_states or jumps entry") from exc
    k_floor = meta.get("k_floor")
    return ScatteringData(R, bound, jumps, T, {"k_floor": float(k_floor or 0.0)})


def write_scattering(S: ScatteringData, path: PathLike) -> Path:
    return write_json(scattering_to_dict(S), path)


def read_scattering(path: PathLike) -> ScatteringData:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return scattering_from_dict(d)


def write_profile_csv(q: PotentialProfile, path: PathLike) -> Path:
    """Write ``x,q`` rows with 17 significant digits and LF line endings."""
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write("x,q\n")
        for x, v in zip(q.x_grid, q.q):
            fh.write(f"{_float(x)},{_float(v)}\n")
    return path


def read_profile_csv(path: PathLike, t: float = 0.0) -> PotentialProfile:
    """Read a potential written by :func:`write_profile_csv`."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x,q":
            raise ConfigError(f"{path}: expected header 'x,q', got {header!r}")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if data.shape[1] != 2:
        raise ConfigError(f"{path}: expected two columns")
    try:
        return PotentialProfile(data[:, 0], data[:, 1], t=t)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
