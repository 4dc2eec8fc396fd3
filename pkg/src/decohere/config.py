"""Run configuration: TOML files with unit-bearing values.

Schema (all values SI unless a unit suffix is given)::

    [particle]
    effective_area = "5e-18 m2"
    heat_capacity = "12000 kB"        # or "inf", or J/K
    mass = "1e5 amu"
    temperature = "1000 K"            # single T0, or
    temperatures = ["300 K", "1 kK"]  # a list, or
    temperatures = {start = "300 K", stop = "5000 K", num = 30, spacing = "log"}

    [geometry]
    slit_separation = ["50 nm", "1 um"]   # scalar or list
    flight_distance = "1 m"
    velocity = "100 m/s"                  # or time_of_flight = "10 ms"
    coherence_slit_distance = "1 m"       # optional

    [emission]
    model = "greybody"                    # or "tabulated"
    spectrum = "spectrum.dat"             # tabulated only, relative to the config file
    heat_capacity_correction = true

    [task]
    name = "tau-sweep"                    # tau-sweep | pattern | montecarlo | cooling
    # task options, see TASK_OPTIONS

    [output]
    directory = "out"
    svg = true
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli

from .constants import AMU, KB

TASKS = ("tau-sweep", "pattern", "montecarlo", "cooling")

UNITS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "μm": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "area": {"m2": 1.0, "m^2": 1.0, "cm2": 1e-4, "um2": 1e-12, "nm2": 1e-18, "nm^2": 1e-18},
    "mass": {"kg": 1.0, "g": 1e-3, "amu": AMU, "u": AMU, "Da": AMU},
    "temperature": {"K": 1.0, "kK": 1e3},
    "heat_capacity": {"J/K": 1.0, "kB": KB, "k_B": KB},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "μs": 1e-6, "µs": 1e-6, "ns": 1e-9},
    "velocity": {"m/s": 1.0, "km/s": 1e3},
}

TASK_OPTIONS = {
    "tau-sweep": {},
    "pattern": {"slit_width": "length", "n_slits": int, "screen_periods": float, "screen_points": int,
                "window_periods": float, "velocity_spread": float, "velocity_samples": int,
                "with_cooling": bool},
    "montecarlo": {"trials": int, "mode": str, "times_of_flight": "time", "seed": int},
    "cooling": {"t_end": "time", "points": int, "spacing": str},
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|inf)\s*([^\s\d].*?)?\s*$")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


def parse_quantity(value, dimension: str, key: str, allow_inf: bool = False, allow_zero: bool = False) -> float:
    """Convert ``12000 kB``, ``"50 nm"`` or a bare number to SI."""
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a {dimension} (number or '<number> <unit>'), got {value!r}")
    if isinstance(value, (int, float)):
        number, scale = float(value), 1.0
    elif isinstance(value, str):
        match = _QUANTITY.match(value)
        if not match:
            raise ConfigError(f"{key}: expected a {dimension} like '1.5 {next(iter(UNITS[dimension]))}', "
                              f"got {value!r}")
        number = float(match.group(1))
        unit = match.group(2)
        if unit is None:
            scale = 1.0
        elif unit in UNITS[dimension]:
            scale = UNITS[dimension][unit]
        else:
            raise ConfigError(f"{key}: unknown {dimension} unit {unit!r}; use one of {sorted(UNITS[dimension])}")
    else:
        raise ConfigError(f"{key}: expected a {dimension}, got {type(value).__name__}")
    out = number * scale
    if math.isinf(out) and not allow_inf:
        raise ConfigError(f"{key}: must be finite")
    if not (out > 0 or (allow_zero and out == 0)):
        raise ConfigError(f"{key}: must be positive, got {value!r}")
    return out


def _quantity_list(value, dimension, key, allow_zero=False):
    if isinstance(value, list):
        if not value:
            raise ConfigError(f"{key}: empty list")
        return [parse_quantity(v, dimension, f"{key}[{i}]", allow_zero=allow_zero) for i, v in enumerate(value)]
    if isinstance(value, dict):
        unknown = set(value) - {"start", "stop", "num", "spacing"}
        if unknown:
            raise ConfigError(f"{key}: unknown range keys {sorted(unknown)}")
        try:
            start = parse_quantity(value["start"], dimension, f"{key}.start")
            stop = parse_quantity(value["stop"], dimension, f"{key}.stop")
            num = value["num"]
        except KeyError as exc:
            raise ConfigError(f"{key}: range needs start, stop and num (missing {exc.args[0]})") from None
        if not isinstance(num, int) or num < 1:
            raise ConfigError(f"{key}.num: expected a positive integer, got {num!r}")
        spacing = value.get("spacing", "log")
        if spacing == "log":
            return [float(v) for v in np.geomspace(start, stop, num)]
        if spacing == "linear":
            return [float(v) for v in np.linspace(start, stop, num)]
        raise ConfigError(f"{key}.spacing: expected 'log' or 'linear', got {spacing!r}")
    return [parse_quantity(value, dimension, key, allow_zero=allow_zero)]


def _table(raw, name, required=True):
    block = raw.get(name)
    if block is None:
        if required:
            raise ConfigError(f"[{name}]: missing block")
        return {}
    if not isinstance(block, dict):
        raise ConfigError(f"[{name}]: expected a table")
    return block


def _reject_unknown(block, name, allowed):
    unknown = set(block) - set(allowed)
    if unknown:
        raise ConfigError(f"[{name}]: unknown keys {sorted(unknown)}")


@dataclass(frozen=True)
class ParticleConfig:
    effective_area: float
    heat_capacity: float
    mass: float
    temperatures: tuple


@dataclass(frozen=True)
class GeometryConfig:
    slit_separations: tuple
    flight_distance: float
    velocity: float
    coherence_slit_distance: float | None = None


@dataclass(frozen=True)
class EmissionConfig:
    model: str = "greybody"
    spectrum: Path | None = None
    heat_capacity_correction: bool = True


@dataclass(frozen=True)
class OutputConfig:
    directory: Path = Path("out")
    svg: bool = True


@dataclass(frozen=True)
class RunConfig:
    particle: ParticleConfig
    geometry: GeometryConfig
    emission: EmissionConfig
    task: str
    options: dict = field(default_factory=dict)
    output: OutputConfig = field(default_factory=OutputConfig)
    digest: str = ""

    def option(self, name, default=None):
        return self.options.get(name, default)


def _parse_particle(raw, task):
    block = _table(raw, "particle")
    _reject_unknown(block, "particle", ("effective_area", "heat_capacity", "mass", "temperature", "temperatures"))
    for key in ("effective_area", "heat_capacity", "mass"):
        if key not in block:
            raise ConfigError(f"particle.{key}: missing")
    if ("temperature" in block) == ("temperatures" in block):
        raise ConfigError("particle: give exactly one of temperature, temperatures")
    key = "temperature" if "temperature" in block else "temperatures"
    temps = _quantity_list(block[key], "temperature", f"particle.{key}", allow_zero=task == "pattern")
    return ParticleConfig(
        parse_quantity(block["effective_area"], "area", "particle.effective_area"),
        parse_quantity(block["heat_capacity"], "heat_capacity", "particle.heat_capacity", allow_inf=True),
        parse_quantity(block["mass"], "mass", "particle.mass"),
        tuple(temps),
    )


def _parse_geometry(raw):
    block = _table(raw, "geometry")
    _reject_unknown(block, "geometry", ("slit_separation", "flight_distance", "velocity", "time_of_flight",
                                        "coherence_slit_distance"))
    for key in ("slit_separation", "flight_distance"):
        if key not in block:
            raise ConfigError(f"geometry.{key}: missing")
    L = parse_quantity(block["flight_distance"], "length", "geometry.flight_distance")
    if ("velocity" in block) == ("time_of_flight" in block):
        raise ConfigError("geometry: give exactly one of velocity, time_of_flight")
    if "velocity" in block:
        v = parse_quantity(block["velocity"], "velocity", "geometry.velocity")
    else:
        v = L / parse_quantity(block["time_of_flight"], "time", "geometry.time_of_flight")
    coh = block.get("coherence_slit_distance")
    return GeometryConfig(
        tuple(_quantity_list(block["slit_separation"], "length", "geometry.slit_separation")),
        L, v,
        None if coh is None else parse_quantity(coh, "length", "geometry.coherence_slit_distance"),
    )


def _parse_emission(raw, base: Path):
    block = _table(raw, "emission", required=False)
    _reject_unknown(block, "emission", ("model", "spectrum", "heat_capacity_correction"))
    model = block.get("model", "greybody")
    if model not in ("greybody", "tabulated"):
        raise ConfigError(f"emission.model: expected 'greybody' or 'tabulated', got {model!r}")
    hcc = block.get("heat_capacity_correction", True)
    if not isinstance(hcc, bool):
        raise ConfigError(f"emission.heat_capacity_correction: expected a boolean, got {hcc!r}")
    spectrum = None
    if model == "tabulated":
        if "spectrum" not in block:
            raise ConfigError("emission.spectrum: required for the tabulated model")
        if not isinstance(block["spectrum"], str):
            raise ConfigError("emission.spectrum: expected a file path string")
        spectrum = (base / block["spectrum"]).resolve()
        if not spectrum.is_file():
            raise ConfigError(f"emission.spectrum: file not found: {spectrum}")
        from .emission import load_spectrum

        try:
            load_spectrum(spectrum)
        except ValueError as exc:
            raise ConfigError(f"emission.spectrum: {exc}") from None
    elif "spectrum" in block:
        raise ConfigError("emission.spectrum: only valid with model = 'tabulated'")
    return EmissionConfig(model, spectrum, hcc)


def _parse_options(block, task):
    schema = TASK_OPTIONS[task]
    _reject_unknown(block, "task", ("name", *schema))
    out = {}
    for key, kind in schema.items():
        if key not in block:
            continue
        value = block[key]
        name = f"task.{key}"
        if isinstance(kind, str):
            out[key] = (tuple(_quantity_list(value, kind, name)) if key == "times_of_flight"
                        else parse_quantity(value, kind, name))
        elif kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
                raise ConfigError(f"{name}: expected a nonnegative number, got {value!r}")
            out[key] = float(value)
        elif kind is int:
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ConfigError(f"{name}: expected a nonnegative integer, got {value!r}")
            out[key] = value
        elif not isinstance(value, kind):
            raise ConfigError(f"{name}: expected {kind.__name__}, got {value!r}")
        else:
            out[key] = value
    return out


def parse_config(raw: dict, base: Path | str = ".", task: str | None = None) -> RunConfig:
    """Validate a parsed TOML document. ``task`` (from the command line) must agree with ``[task].name``."""
    base = Path(base)
    tblock = _table(raw, "task", required=False)
    name = tblock.get("name", task)
    if name is None:
        raise ConfigError("task.name: missing (or pass the task on the command line)")
    if name not in TASKS:
        raise ConfigError(f"task.name: expected one of {TASKS}, got {name!r}")
    if task is not None and task != name:
        raise ConfigError(f"task.name: config is for {name!r} but {task!r} was requested")
    _reject_unknown(raw, "top level", ("particle", "geometry", "emission", "task", "output"))
    oblock = _table(raw, "output", required=False)
    _reject_unknown(oblock, "output", ("directory", "svg"))
    svg = oblock.get("svg", True)
    if not isinstance(svg, bool):
        raise ConfigError(f"output.svg: expected a boolean, got {svg!r}")
    output = OutputConfig(base / oblock.get("directory", "out"), svg)
    digest = hashlib.sha256(repr(sorted(_flatten(raw))).encode()).hexdigest()
    return RunConfig(_parse_particle(raw, name), _parse_geometry(raw), _parse_emission(raw, base), name,
                     _parse_options(tblock, name), output, digest)


def _flatten(raw, prefix=""):
    for key, value in raw.items():
        if isinstance(value, dict):
            yield from _flatten(value, f"{prefix}{key}.")
        else:
            yield f"{prefix}{key}", repr(value)


def load_config(path, task: str | None = None) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw, path.parent, task)
