"""Batch tasks behind the command line: sweeps, patterns, Monte Carlo, cooling."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .decoherence import (
    BeamGeometry,
    decoherence_time_closed,
    decoherence_time_inverted,
    decoherence_time_quadrature,
    thermal_exponent,
)
from .emission import EmissionModel, ParticleModel, analytic_cooling, cool, load_spectrum, total_rate
from .interference import (
    ApertureModel,
    IntensityPattern,
    VelocityDistribution,
    apply_decoherence,
    extract_visibility,
    far_field_pattern,
    intensity_with_velocity_spread,
    kernel_for_pattern,
    screen_grid,
)
from .montecarlo import MODES, RNG_ALGORITHM, estimate_visibility
from .svg import PALETTE, LinePlot
from .tables import SweepResult, write_table

COLUMNS = {
    "tau-sweep": ("slit_separation_m", "T0_K", "tau_th_s", "tau_inf_s", "ratio", "method", "status"),
    "pattern": ("r_m", "intensity"),
    "visibility": ("slit_separation_m", "T0_K", "time_of_flight_s", "visibility_analytic",
                   "visibility_unperturbed", "visibility_decohered", "kernel_area", "status"),
    "montecarlo": ("slit_separation_m", "T0_K", "time_of_flight_s", "mode", "trials", "seed",
                   "visibility_analytic", "mc_mean", "mc_std_error", "z_score", "status"),
    "cooling": ("T0_K", "t_s", "T_numeric_K", "T_analytic_K"),
}


class TaskError(ValueError):
    pass


def build_model(config: RunConfig, temperature: float) -> EmissionModel:
    p = config.particle
    particle = ParticleModel(p.effective_area, p.heat_capacity, p.mass, temperature)
    e = config.emission
    if e.model == "greybody":
        return EmissionModel.greybody(particle, e.heat_capacity_correction)
    omega, sigma = load_spectrum(e.spectrum)
    return EmissionModel.tabulated(particle, omega, sigma, e.heat_capacity_correction)


def build_geometry(config: RunConfig, slit_separation: float, velocity: float | None = None) -> BeamGeometry:
    g = config.geometry
    return BeamGeometry(slit_separation, g.flight_distance, g.velocity if velocity is None else velocity,
                        config.particle.mass, g.coherence_slit_distance)


def metadata(config: RunConfig, task: str, **extra) -> dict:
    meta = {"tool": f"decohere {__version__}", "task": task, "config_sha256": config.digest,
            "columns": ",".join(COLUMNS[task])}
    meta.update(extra)
    return meta


def parallel_map(func, items, workers: int = 1):
    """``map`` over a process pool; results keep the order of ``items``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _error_status(exc: Exception) -> str:
    return f"error: {type(exc).__name__}: {exc}".replace("\n", " ")


# -- tau sweep ---------------------------------------------------------------

def _tau_point(args):
    config, d, T0 = args
    model = build_model(config, T0)
    geometry = build_geometry(config, d)
    method = "inverted+closed" if model.kind == "greybody" else "inverted+quadrature"
    try:
        if model.kind == "greybody":
            tau_inf = decoherence_time_closed(geometry, model.particle, T0)
        else:
            tau_inf = decoherence_time_quadrature(geometry, model, T0)
        result = decoherence_time_inverted(geometry, model, with_cooling=True)
    except (ArithmeticError, ValueError) as exc:
        return (d, T0, None, None, None, method, _error_status(exc))
    ratio = result.value / tau_inf if math.isfinite(tau_inf) else None
    if result.status == "no_emission":
        ratio = None
    return (d, T0, result.value, tau_inf, ratio, method, result.status)


def run_tau_sweep(config: RunConfig, workers: int = 1) -> SweepResult:
    """Cooled decoherence time and its C_V -> infinity counterpart over (d, T0)."""
    points = [(config, d, T) for d in sorted(config.geometry.slit_separations)
              for T in sorted(config.particle.temperatures)]
    rows = parallel_map(_tau_point, points, workers)
    return SweepResult(COLUMNS["tau-sweep"], rows, metadata(config, "tau-sweep"))


def plot_tau_sweep(result: SweepResult) -> LinePlot:
    plot = LinePlot("initial temperature T0 [K]", "decoherence time [s]", xlog=True, ylog=True)
    recs = result.records()
    for i, d in enumerate(sorted({r["slit_separation_m"] for r in recs})):
        sel = [r for r in recs if r["slit_separation_m"] == d]
        T = [r["T0_K"] for r in sel]
        cooled = [r["tau_th_s"] if r["tau_th_s"] is not None else math.nan for r in sel]
        limit = [r["tau_inf_s"] if r["tau_inf_s"] is not None else math.nan for r in sel]
        color = PALETTE[i % len(PALETTE)]
        plot.add(T, cooled, f"d = {d * 1e9:g} nm", color=color)
        plot.add(T, limit, dashed=True, color=color)
    return plot


# -- pattern -----------------------------------------------------------------

def run_pattern(config: RunConfig) -> dict:
    """Unperturbed and decohered far-field patterns plus extracted visibilities."""
    if len(config.geometry.slit_separations) != 1 or len(config.particle.temperatures) != 1:
        raise TaskError("pattern task needs a single slit_separation and a single temperature")
    d = config.geometry.slit_separations[0]
    T0 = config.particle.temperatures[0]
    geometry = build_geometry(config, d)
    aperture = ApertureModel(d, config.option("slit_width", d / 5), config.option("n_slits", 2))
    period = geometry.fringe_period
    n = config.option("screen_points", 4097)
    r = screen_grid(config.option("screen_periods", 40.0) * period, n)
    spread = config.option("velocity_spread", 0.0)
    if spread > 0:
        g = VelocityDistribution.gaussian(geometry.momentum, spread, config.option("velocity_samples", 41))
        clean = intensity_with_velocity_spread(aperture, geometry, g, r)
    else:
        clean = far_field_pattern(aperture, geometry, r)
    with_cooling = config.option("with_cooling", True)
    half = 0.5 * config.option("window_periods", 4.0) * period
    window = (-half, half)
    status = "ok"
    if T0 == 0:
        blurred, analytic, area = IntensityPattern(clean.r, clean.values.copy(), dict(clean.meta)), 1.0, 1.0
    else:
        model = build_model(config, T0)
        if total_rate(model, T0) == 0:
            blurred, analytic, area = IntensityPattern(clean.r, clean.values.copy(), dict(clean.meta)), 1.0, 1.0
        else:
            kernel = kernel_for_pattern(clean, geometry, model, with_cooling)
            blurred = apply_decoherence(clean, kernel)
            analytic = math.exp(-thermal_exponent(geometry, model, with_cooling))
            area = kernel.area()
    v_clean = extract_visibility(clean, window, period)
    try:
        v_blur = extract_visibility(blurred, window, period)
    except ValueError as exc:
        v_blur, status = None, _error_status(exc)
    meta = metadata(config, "pattern", fringe_period_m=repr(period), with_cooling=with_cooling)
    vis = SweepResult(COLUMNS["visibility"],
                      [(d, T0, geometry.time_of_flight, analytic, v_clean, v_blur, area, status)],
                      metadata(config, "visibility", with_cooling=with_cooling))
    return {
        "pattern": SweepResult(COLUMNS["pattern"], list(zip(clean.r.tolist(), clean.values.tolist())), meta),
        "pattern_decohered": SweepResult(COLUMNS["pattern"], list(zip(blurred.r.tolist(), blurred.values.tolist())),
                                         dict(meta, decohered=True)),
        "visibility": vis,
    }


def plot_pattern(results: dict) -> LinePlot:
    plot = LinePlot("screen coordinate r [m]", "probability density [1/m]")
    clean = results["pattern"]
    blurred = results["pattern_decohered"]
    plot.add(clean.column("r_m"), clean.column("intensity"), "unperturbed")
    plot.add(blurred.column("r_m"), blurred.column("intensity"), "decohered")
    return plot


# -- Monte Carlo -------------------------------------------------------------

def _mc_point(args):
    config, d, T0, tau, mode, trials, seed = args
    model = build_model(config, T0)
    geometry = build_geometry(config, d, config.geometry.flight_distance / tau)
    try:
        analytic = math.exp(-thermal_exponent(geometry, model, True))
        mean, err = estimate_visibility(geometry, model, mode, trials, seed)
    except (ArithmeticError, ValueError) as exc:
        return (d, T0, tau, mode, trials, seed, None, None, None, None, _error_status(exc))
    if err > 0:
        z = (mean - analytic) / err
    else:
        z = 0.0 if mean == analytic else math.copysign(math.inf, mean - analytic)
    return (d, T0, tau, mode, trials, seed, analytic, mean, err, z, "ok")


def run_montecarlo(config: RunConfig, workers: int = 1, seed: int | None = None) -> SweepResult:
    """Analytic visibility against the Monte Carlo estimate at each parameter point."""
    mode = config.option("mode", "poisson_cooling")
    if mode not in MODES:
        raise TaskError(f"task.mode: expected one of {MODES}, got {mode!r}")
    trials = config.option("trials", 10000)
    if trials < 100:
        raise TaskError("task.trials: at least 100 trials are required")
    seed = config.option("seed", 0) if seed is None else seed
    taus = config.option("times_of_flight", (config.geometry.flight_distance / config.geometry.velocity,))
    points = [(config, d, T, tau, mode, trials, seed) for d in sorted(config.geometry.slit_separations)
              for T in sorted(config.particle.temperatures) for tau in sorted(taus)]
    rows = parallel_map(_mc_point, points, workers)
    return SweepResult(COLUMNS["montecarlo"], rows, metadata(config, "montecarlo", rng=RNG_ALGORITHM))


# -- cooling -----------------------------------------------------------------

def cooling_times(t_end: float, points: int, spacing: str) -> np.ndarray:
    if points < 2:
        raise TaskError("task.points: need at least 2 points")
    if spacing == "linear":
        return np.linspace(0.0, t_end, points)
    if spacing == "log":
        return np.concatenate([[0.0], np.geomspace(t_end * 1e-6, t_end, points - 1)])
    raise TaskError(f"task.spacing: expected 'log' or 'linear', got {spacing!r}")


def run_cooling(config: RunConfig) -> SweepResult:
    """Numerical cooling curve next to the closed-form greybody law."""
    if math.isinf(config.particle.heat_capacity):
        raise TaskError("cooling undefined at infinite heat capacity")
    t_end = config.option("t_end", config.geometry.flight_distance / config.geometry.velocity)
    t = cooling_times(t_end, config.option("points", 101), config.option("spacing", "log"))
    rows = []
    for T0 in sorted(config.particle.temperatures):
        model = build_model(config, T0)
        numeric = np.asarray(cool(model, t_end)(t), float)
        numeric[0] = T0
        exact = analytic_cooling(model.particle, t)
        rows.extend(zip([T0] * t.size, t.tolist(), numeric.tolist(), exact.tolist()))
    return SweepResult(COLUMNS["cooling"], rows,
                       metadata(config, "cooling", analytic="greybody cooling law"))


def plot_cooling(result: SweepResult) -> LinePlot:
    plot = LinePlot("time [s]", "temperature [K]", xlog=True)
    recs = [r for r in result.records() if r["t_s"] > 0]
    for i, T0 in enumerate(sorted({r["T0_K"] for r in recs})):
        sel = [r for r in recs if r["T0_K"] == T0]
        color = PALETTE[i % len(PALETTE)]
        plot.add([r["t_s"] for r in sel], [r["T_numeric_K"] for r in sel], f"T0 = {T0:g} K", color=color)
        plot.add([r["t_s"] for r in sel], [r["T_analytic_K"] for r in sel], dashed=True, color=color)
    return plot


# -- dispatch ----------------------------------------------------------------

def run_task(config: RunConfig, out: Path | None = None, workers: int = 1, seed: int | None = None) -> dict:
    """Run ``config.task``, write CSV (and SVG) files and return ``{name: path}``."""
    out = Path(out) if out is not None else config.output.directory
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    if config.task == "tau-sweep":
        result = run_tau_sweep(config, workers)
        written["tau_sweep"] = write_table(out / "tau_sweep.csv", result)
        if config.output.svg:
            written["tau_sweep_svg"] = plot_tau_sweep(result).save(out / "tau_sweep.svg")
    elif config.task == "pattern":
        results = run_pattern(config)
        for name, table in results.items():
            written[name] = write_table(out / f"{name}.csv", table)
        if config.output.svg:
            written["pattern_svg"] = plot_pattern(results).save(out / "pattern.svg")
    elif config.task == "montecarlo":
        result = run_montecarlo(config, workers, seed)
        written["montecarlo"] = write_table(out / "montecarlo.csv", result)
    elif config.task == "cooling":
        result = run_cooling(config)
        written["cooling"] = write_table(out / "cooling.csv", result)
        if config.output.svg:
            written["cooling_svg"] = plot_cooling(result).save(out / "cooling.svg")
    else:
        raise TaskError(f"unknown task {config.task!r}")
    return written
