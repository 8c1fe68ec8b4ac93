"""Command-line front end.

Usage::

    kdv-ist {scatter,invert,evolve,roundtrip,validate} --config run.yaml [--out DIR]
            [--threads N] [--verbose]

The configuration is one YAML or JSON file with the keys ``command``
(optional when given on the command line), ``potential``, ``grid``,
``times``, ``tolerances`` and ``output``.  Unknown keys are rejected.
``potential`` is either a catalog entry ``{kind: ..., parameters: {...}}``
or a path: ``*.csv`` files with an ``x,q`` header are sampled potentials,
``*.json`` files are scattering data written by the ``scatter`` command.

Exit status is 0 on success, 1 on a configuration error and 2 on a
numerical failure; in the last case the error is also written to
``report.json`` in the output directory.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from . import __version__
from .exceptions import ConfigError, ISTError, NumericalFailure
from .grid import MomentumGrid
from .invert import solve_kdv
from .io import read_profile_csv, read_scattering, write_json, write_profile_csv, write_scattering
from .potentials import PotentialSpec, sample
from .profile import PotentialProfile, uniform_grid
from .scatter import ScatteringData, scatter
from .spectra import validate

__all__ = ["COMMANDS", "GridConfig", "Tolerances", "OutputConfig", "RunConfig", "load_config", "run", "main"]

logger = logging.getLogger("kdv_ist")

COMMANDS = ("scatter", "invert", "evolve", "roundtrip", "validate")
INTERIOR = 0.8


@dataclass(frozen=True)
class GridConfig:
    """Momentum grid (``k_max``, ``n``) and spatial grid (``x_min``, ``x_max``, ``dx``)."""

    k_max: float = 40.0
    n: int = 2048
    x_min: float = -10.0
    x_max: float = 10.0
    dx: float = 0.05

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2 or n & (n - 1):
            raise ConfigError(f"grid.n must be a power of two, got {n!r}")
        for name in ("k_max", "x_min", "x_max", "dx"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
                raise ConfigError(f"grid.{name} must be a finite number")
        if not self.k_max > 0:
            raise ConfigError("grid.k_max must be positive")
        if not self.x_max > self.x_min:
            raise ConfigError("grid.x_max must exceed grid.x_min")
        if not self.dx > 0:
            raise ConfigError("grid.dx must be positive")

    def momentum_grid(self) -> MomentumGrid:
        return MomentumGrid(float(self.k_max), int(self.n))

    def x_grid(self) -> np.ndarray:
        return uniform_grid(float(self.x_min), float(self.x_max), float(self.dx))


@dataclass(frozen=True)
class Tolerances:
    """Solver settings.

    Attributes
    ----------
    cg_tol : float
        Relative residual target of each Hankel solve.
    solver : {'cg', 'dense'}
    limit : {'moment', 'richardson'}
        How q is extracted from the Hankel solution.
    tail_tol : float or None
        Boundary residual bound of the direct problem; None disables the check.
    k_floor : float or None
        Half-width of the excluded band around k = 0 (default 5% of k_max).
    kappa_max : float
        Upper end of the bound-state scan.
    ode_method : {'rk', 'magnus'}
    ode_step : float
        Step of the Magnus scheme.
    jump_stab_tol : float or None
        Stability tolerance of one-sided jump limits; None skips the check.
    """

    cg_tol: float = 1e-10
    solver: str = "cg"
    limit: str = "moment"
    tail_tol: Optional[float] = 1e-3
    k_floor: Optional[float] = None
    kappa_max: float = 10.0
    ode_method: str = "rk"
    ode_step: float = 0.05
    jump_stab_tol: Optional[float] = 0.05

    def __post_init__(self):
        choices = {"solver": ("cg", "dense"), "limit": ("moment", "richardson"),
                   "ode_method": ("rk", "magnus")}
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"tolerances.{name} must be one of {allowed}")
        for name in ("cg_tol", "kappa_max", "ode_step"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"tolerances.{name} must be positive")
        for name in ("tail_tol", "k_floor", "jump_stab_tol"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, (int, float)) or v < 0):
                raise ConfigError(f"tolerances.{name} must be a nonnegative number or null")


@dataclass(frozen=True)
class OutputConfig:
    path: str = "."
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError("output.format must be 'csv' or 'json'")


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration."""

    command: str
    potential: Union[PotentialSpec, str]
    grid: GridConfig = field(default_factory=GridConfig)
    times: Tuple[float, ...] = (0.0,)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: OutputConfig = field(default_factory=OutputConfig)
    base_dir: Path = Path(".")

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if not self.times or not all(np.isfinite(t) for t in self.times):
            raise ConfigError("times must be a nonempty list of finite numbers")
        if self.command == "invert" and len(self.times) != 1:
            raise ConfigError("invert takes exactly one time; use evolve for several")


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot, such as 1e-10."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^[-+]?(?:[0-9][0-9_]*(?:\.[0-9_]*)?|\.[0-9_]+)(?:[eE][-+]?[0-9]+)?$
               |^[-+]?\.(?:inf|Inf|INF)$|^\.(?:nan|NaN|NAN)$""", re.X),
    list("-+0123456789."),
)


def _section(cls, raw, name):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{name} must be a mapping")
    allowed = {f.name for f in fields(cls)}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _potential(raw) -> Union[PotentialSpec, str]:
    if isinstance(raw, str):
        return raw
    if not isinstance(raw, dict):
        raise ConfigError("potential must be a mapping {kind, parameters} or a file path")
    unknown = set(raw) - {"kind", "parameters"}
    if unknown:
        raise ConfigError(f"unknown keys in potential: {sorted(unknown)}")
    try:
        return PotentialSpec(raw.get("kind", ""), raw.get("parameters") or {})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"potential: {exc}") from exc


def config_from_dict(raw: dict, command: Optional[str] = None, base_dir=".") -> RunConfig:
    """Build a :class:`RunConfig` from a parsed mapping; ``command`` overrides the file."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    allowed = {"command", "potential", "grid", "times", "tolerances", "output"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    cmd = command or raw.get("command")
    if raw.get("command") and command and raw["command"] != command:
        raise ConfigError(f"command {command!r} conflicts with config command {raw['command']!r}")
    if "potential" not in raw:
        raise ConfigError("configuration needs a 'potential'")
    times = raw.get("times", [0.0])
    if not isinstance(times, (list, tuple)):
        times = [times]
    try:
        times = tuple(float(t) for t in times)
    except (TypeError, ValueError) as exc:
        raise ConfigError("times must be numbers") from exc
    return RunConfig(
        command=cmd,
        potential=_potential(raw["potential"]),
        grid=_section(GridConfig, raw.get("grid"), "grid"),
        times=times,
        tolerances=_section(Tolerances, raw.get("tolerances"), "tolerances"),
        output=_section(OutputConfig, raw.get("output"), "output"),
        base_dir=Path(base_dir),
    )


def load_config(path, command: Optional[str] = None) -> RunConfig:
    """Read a YAML or JSON configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return config_from_dict(raw, command, base_dir=path.parent)


# ---------------------------------------------------------------------------
# pipeline pieces


def _resolve(cfg: RunConfig, p: str) -> Path:
    path = Path(p)
    if not path.is_absolute():
        path = cfg.base_dir / path
    if not path.exists():
        raise ConfigError(f"referenced file {path} does not exist")
    return path


def _profile(cfg: RunConfig) -> PotentialProfile:
    if isinstance(cfg.potential, PotentialSpec):
        return sample(cfg.potential, cfg.grid.x_grid())
    path = _resolve(cfg, cfg.potential)
    if path.suffix.lower() != ".csv":
        raise ConfigError(f"command {cfg.command!r} needs potential samples (.csv), got {path.name}")
    return read_profile_csv(path)


def _direct(cfg: RunConfig, q: PotentialProfile, threads: int) -> ScatteringData:
    tol = cfg.tolerances
    return scatter(
        q, cfg.grid.momentum_grid(), kappa_max=tol.kappa_max, k_floor=tol.k_floor,
        tail_tol=tol.tail_tol, jump_options={"stab_tol": tol.jump_stab_tol}, n_jobs=threads,
        method=tol.ode_method, step=tol.ode_step,
    )


def _scattering_input(cfg: RunConfig, threads: int) -> ScatteringData:
    if isinstance(cfg.potential, str) and Path(cfg.potential).suffix.lower() == ".json":
        return read_scattering(_resolve(cfg, cfg.potential))
    return _direct(cfg, _profile(cfg), threads)


def _time_tag(t: float) -> str:
    return repr(float(t))


def _write_frame(q: PotentialProfile, out: Path, fmt: str) -> Path:
    stem = f"q_t{_time_tag(q.t)}"
    if fmt == "csv":
        return write_profile_csv(q, out / f"{stem}.csv")
    return write_json({"t": q.t, "x": q.x_grid, "q": q.q}, out / f"{stem}.json")


def _exact(cfg: RunConfig, q0: PotentialProfile):
    """Reference q(x, t): the input potential at t = 0, and the travelling wave for solitons."""
    spec = cfg.potential
    if isinstance(spec, PotentialSpec) and spec.kind == "soliton":
        kappa, x0 = spec.parameters["kappa"], spec.parameters["x0"]
        return lambda x, t: -2.0 * kappa**2 / np.cosh(kappa * (x - x0 - 4.0 * kappa**2 * t)) ** 2
    f = q0.evaluator()
    return lambda x, t: f(x) if t == 0.0 else None


def _interior(n: int, fraction: float = INTERIOR) -> slice:
    margin = int(round(0.5 * (1.0 - fraction) * n))
    return slice(margin, n - margin)


def _invert_frames(cfg: RunConfig, S: ScatteringData, threads: int) -> List[PotentialProfile]:
    tol = cfg.tolerances
    return solve_kdv(S, cfg.grid.x_grid(), cfg.times, tol.cg_tol, tol.solver, tol.limit, threads)


def run(cfg: RunConfig, out_dir=None, threads: int = 1) -> int:
    """Execute a configuration and write its artifacts.

    Returns
    -------
    int
        Exit status: 0 success, 2 numerical failure (recorded in report.json).
        Configuration errors raise :class:`ConfigError`.
    """
    out = Path(out_dir if out_dir is not None else cfg.output.path)
    out.mkdir(parents=True, exist_ok=True)
    threads = max(1, int(threads))
    start = time.perf_counter()
    try:
        if cfg.command == "scatter":
            S = _direct(cfg, _profile(cfg), threads)
            write_scattering(S, out / "scattering.json")
            logger.info("scatter: %d bound states, %d jumps", len(S.bound_states), len(S.jumps))
        elif cfg.command in ("invert", "evolve"):
            S = _scattering_input(cfg, threads)
            for q in _invert_frames(cfg, S, threads):
                path = _write_frame(q, out, cfg.output.format)
                logger.info("wrote %s", path)
        elif cfg.command == "roundtrip":
            write_json(_roundtrip(cfg, out, threads, start), out / "report.json")
        elif cfg.command == "validate":
            q = None
            if isinstance(cfg.potential, str) and Path(cfg.potential).suffix.lower() == ".json":
                S = read_scattering(_resolve(cfg, cfg.potential))
            else:
                q = _profile(cfg)
                S = _direct(cfg, q, threads)
            write_json(validate(q, S).to_dict(), out / "validation.json")
    except NumericalFailure as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        write_json({
            "command": cfg.command,
            "status": "numerical_failure",
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }, out / "report.json")
        return 2
    logger.info("%s finished in %.2f s", cfg.command, time.perf_counter() - start)
    return 0


def _roundtrip(cfg: RunConfig, out: Path, threads: int, start: float) -> dict:
    q0 = _profile(cfg)
    S = _direct(cfg, q0, threads)
    frames = _invert_frames(cfg, S, threads)
    exact = _exact(cfg, q0)
    errors = []
    for q in frames:
        _write_frame(q, out, cfg.output.format)
        ref = exact(q.x_grid, q.t)
        if ref is None:
            errors.append({"t": q.t, "max_abs_error": None})
            continue
        sl = _interior(q.x_grid.size)
        errors.append({"t": q.t, "max_abs_error": float(np.max(np.abs(q.q[sl] - ref[sl])))})
    measured = [e["max_abs_error"] for e in errors if e["max_abs_error"] is not None]
    return {
        "command": "roundtrip",
        "status": "ok",
        "version": __version__,
        "max_abs_error": max(measured) if measured else None,
        "interior_fraction": INTERIOR,
        "errors": errors,
        "bound_states": [{"kappa": b.kappa, "c": b.c} for b in S.bound_states],
        "max_abs_reflection": float(np.max(np.abs(S.reflection.values))),
        "unitarity_residual": S.meta.get("unitarity_residual"),
        "max_cg_residual": max(f.meta["max_residual"] for f in frames),
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kdv-ist", description=__doc__.split("\n")[0])
    p.add_argument("command", nargs="?", choices=COMMANDS,
                   help="pipeline to run (defaults to the config's 'command')")
    p.add_argument("--config", required=True, help="YAML or JSON run configuration")
    p.add_argument("--out", help="output directory (overrides output.path)")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.command)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        return run(cfg, args.out, args.threads)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"kdv-ist: configuration error: {exc}", file=sys.stderr)
        return 1
    except (ISTError, ArithmeticError) as exc:
        print(f"kdv-ist: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
