"""TOML run configuration with strict schema checking."""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, ParameterError
from .model import AMU, DEFAULT_LATTICE_DEPTH_ER, SystemParams

MODES = ("trajectories", "temperature-scan", "tilt-scan", "selftrap")

# key -> (type, default); a default of ... means required
SYSTEM_SCHEMA = {
    "impurity_mass_u": (float, ...),
    "boson_mass_u": (float, ...),
    "kappa_over_g": (float, ...),
    "dimension": (int, 1),
    "mean_spacing_nm": (float, ...),
    "lattice_spacing_nm": (float, ...),
    "lattice_depth_er": (float, DEFAULT_LATTICE_DEPTH_ER),
    "hopping_er": (float, ...),
    "healing_length_nm": (float, ...),
}
SOLVER_SCHEMA = {
    "dt": (float, None),
    "t_final": (float, 10.0),
    "n_sites": (int, None),
    "grid_tol": (float, 1e-8),
    "phi_tol": (float, 5e-3),
    "check_convergence": (bool, True),
    "step_halving": (bool, True),
    "halving_tol": (float, 1e-5),
}
SWEEP_SCHEMA = {
    "mode": (str, "trajectories"),
    "temperatures": (list, [0.0]),
    "tilts": (list, [0.0]),
    "t_d": (float, 10.0),
    "dimensions": (list, [2, 3]),
}
OUTPUT_SCHEMA = {
    "directory": (str, None),
    "plots": (bool, True),
    "stride": (int, 5),
}
SCHEMA = {"system": SYSTEM_SCHEMA, "solver": SOLVER_SCHEMA, "sweep": SWEEP_SCHEMA, "output": OUTPUT_SCHEMA}
POSITIVE = {"solver.dt", "solver.t_final", "solver.grid_tol", "solver.phi_tol", "solver.halving_tol", "sweep.t_d",
            "output.stride", "system.impurity_mass_u", "system.boson_mass_u",
            "system.mean_spacing_nm", "system.lattice_spacing_nm", "system.hopping_er",
            "system.healing_length_nm", "system.lattice_depth_er"}


@dataclass
class SolverConfig:
    dt: float | None = None
    t_final: float = 10.0
    n_sites: int | None = None
    grid_tol: float = 1e-8
    phi_tol: float = 5e-3
    check_convergence: bool = True
    step_halving: bool = True
    halving_tol: float = 1e-5


@dataclass
class SweepConfig:
    mode: str = "trajectories"
    temperatures: list = field(default_factory=lambda: [0.0])
    tilts: list = field(default_factory=lambda: [0.0])
    t_d: float = 10.0
    dimensions: list = field(default_factory=lambda: [2, 3])


@dataclass
class OutputConfig:
    directory: str | None = None
    plots: bool = True
    stride: int = 5


@dataclass
class RunConfig:
    system: dict
    solver: SolverConfig
    sweep: SweepConfig
    output: OutputConfig
    name: str = "run"

    def params(self) -> SystemParams:
        s = self.system
        d = s["mean_spacing_nm"] * 1e-9
        try:
            return SystemParams(
                impurity_mass=s["impurity_mass_u"] * AMU,
                boson_mass=s["boson_mass_u"] * AMU,
                kappa_over_g=s["kappa_over_g"],
                density=d ** -s["dimension"],
                dimension=s["dimension"],
                lattice_spacing=s["lattice_spacing_nm"] * 1e-9,
                lattice_depth=s["lattice_depth_er"],
                hopping=s["hopping_er"],
                healing_length=s["healing_length_nm"] * 1e-9,
            )
        except ParameterError as exc:
            raise ConfigError("system", str(exc)) from exc

    def to_dict(self):
        return {"name": self.name, "system": dict(self.system), "solver": asdict(self.solver),
                "sweep": asdict(self.sweep), "output": asdict(self.output)}


def _check_type(path, value, kind):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {type(value).__name__}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {type(value).__name__}")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ConfigError(path, f"expected an array, got {type(value).__name__}")
        for i, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{path}[{i}]", "expected a number")
        return list(value)
    if not isinstance(value, kind):
        raise ConfigError(path, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _section(data, name):
    schema = SCHEMA[name]
    raw = data.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(name, "expected a table")
    for key in raw:
        if key not in schema:
            raise ConfigError(f"{name}.{key}", f"unknown key (allowed: {', '.join(schema)})")
    out = {}
    for key, (kind, default) in schema.items():
        path = f"{name}.{key}"
        if key not in raw:
            if default is ...:
                raise ConfigError(path, "required key missing")
            out[key] = default
            continue
        value = _check_type(path, raw[key], kind)
        if path in POSITIVE and value <= 0:
            raise ConfigError(path, f"must be strictly positive, got {value}")
        out[key] = value
    return out


def parse_config(data: dict, name="run") -> RunConfig:
    for key in data:
        if key not in SCHEMA:
            raise ConfigError(key, f"unknown section (allowed: {', '.join(SCHEMA)})")
    system = _section(data, "system")
    if system["dimension"] not in (1, 2, 3):
        raise ConfigError("system.dimension", "must be 1, 2 or 3")
    solver = SolverConfig(**_section(data, "solver"))
    if solver.n_sites is not None and (solver.n_sites < 3 or solver.n_sites % 2 == 0):
        raise ConfigError("solver.n_sites", "must be odd and >= 3")
    sweep = SweepConfig(**_section(data, "sweep"))
    if sweep.mode not in MODES:
        raise ConfigError("sweep.mode", f"must be one of {', '.join(MODES)}")
    if any(t < 0 for t in sweep.temperatures):
        raise ConfigError("sweep.temperatures", "temperatures must be non-negative")
    if not sweep.temperatures:
        raise ConfigError("sweep.temperatures", "need at least one temperature")
    if sweep.mode == "tilt-scan" and len(sweep.tilts) < 6:
        raise ConfigError("sweep.tilts", "a tilt scan needs at least 6 tilts")
    if any(d not in (2, 3) for d in sweep.dimensions):
        raise ConfigError("sweep.dimensions", "critical couplings exist for D = 2, 3 only")
    output = OutputConfig(**_section(data, "output"))
    cfg = RunConfig(system=system, solver=solver, sweep=sweep, output=output, name=name)
    cfg.params()
    return cfg


def loads(text: str, name="run") -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<toml>", str(exc)) from exc
    return parse_config(data, name)


def load(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<toml>", str(exc)) from exc
    from pathlib import Path

    return parse_config(data, Path(path).stem)
