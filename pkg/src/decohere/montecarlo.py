"""Monte Carlo emission histories: a stochastic check of the visibility formula.

Why the average of a product of sincs reproduces the analytic visibility:
a photon of frequency w emitted at time t, while the path separation is
s(t), multiplies the fringe term by the isotropic average of its recoil
phase, ``sinc(w s(t) / c)``. For a Poisson process with intensity
``R(w; T(t))`` in (t, w), the expectation of a product over events of
``g(t, w)`` is ``exp(-int dt int dw R (1 - g))`` (the probability generating
functional). With ``g = sinc`` this is exactly the exponential visibility
law, so the trajectory mean is an oracle that shares no code with the
quadrature pipeline beyond the spectrum and the cooling curve.

Sampling uses thinning of the marked process. At the current time the
majorant is the spectrum at a reference temperature ``T_ref >= T(t)``;
candidates get a frequency from an inverse-CDF table at ``T_ref`` and are
accepted with probability ``phi(u) / phi(u_ref)`` (ratio of statistical
factors, never above 1 because the temperature never rises). The first
majorant is the initial total rate; it is refreshed at every candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import C, HBAR, KB
from .decoherence import BeamGeometry
from .emission import EmissionModel, cool, total_rate
from .numerics import sinc

MODES = ("poisson_cooling", "microcanonical")
RNG_ALGORITHM = "numpy PCG64 seeded by SeedSequence(seed, spawn_key)"
TABLE_POINTS = 4096
# tabulated spectra: sampling tables on 1% temperature steps
TEMPERATURE_STEP = 1.01
TEMPERATURE_FLOOR = 1.0
BLOCK_SIZE = 4096
_TRAJECTORY_KEY = 0
_BLOCK_KEY = 1


class MajorantError(RuntimeError):
    """The emission rate rose above its majorant (temperature increased)."""


@dataclass(frozen=True)
class EmissionEvent:
    time: float
    omega: float

    def __post_init__(self):
        if not self.time >= 0:
            raise ValueError("event time must be nonnegative")
        if not self.omega > 0:
            raise ValueError("photon frequency must be positive")


@dataclass(frozen=True)
class TrajectoryResult:
    events: list = field(default_factory=list)
    fringe_factor: float = 1.0
    final_temperature: float = math.nan

    def __post_init__(self):
        if abs(self.fringe_factor) > 1 + 1e-12:
            raise ValueError("fringe factor must lie in [-1, 1]")

    @property
    def emitted_energy(self) -> float:
        return float(math.fsum(HBAR * e.omega for e in self.events))


class _InverseCdf:
    """Sampler for a piecewise-linear density on a grid (exact within cells)."""

    def __init__(self, x, density):
        x = np.asarray(x, float)
        f = np.clip(np.asarray(density, float), 0.0, None)
        cell = 0.5 * (f[1:] + f[:-1]) * np.diff(x)
        self.x = x
        self.f = f
        self.cdf = np.concatenate([[0.0], np.cumsum(cell)])
        self.mass = float(self.cdf[-1])

    def sample(self, uniform):
        target = uniform * self.mass
        k = np.searchsorted(self.cdf, target, side="right") - 1
        k = np.clip(k, 0, self.x.size - 2)
        m = target - self.cdf[k]
        h = self.x[k + 1] - self.x[k]
        fa = self.f[k]
        fb = self.f[k + 1]
        # solve fa s + (fb - fa) s^2 / (2h) = m in the stable form
        disc = np.maximum(fa * fa + 2.0 * (fb - fa) * m / h, 0.0)
        denom = fa + np.sqrt(disc)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(denom > 0, 2.0 * m / denom, 0.0)
        return self.x[k] + np.clip(s, 0.0, h)


class _Spectrum:
    """Majorant rates and candidate frequencies for one emission model."""

    def __init__(self, model: EmissionModel, points: int = TABLE_POINTS):
        self.model = model
        self.points = points
        self._tables = {}
        if model.kind == "greybody":
            u = np.linspace(0.0, model.cutoff_u(), points)
            self._u_table = _InverseCdf(u, u * u * model.statistical_factor(u))
            self._rate_per_t3 = (model.particle.effective_area / (2 * np.pi * C) ** 2
                                 * (KB / HBAR) ** 3 * model.moment(2))

    def reference(self, T):
        """Majorant temperature for current temperature ``T``."""
        if self.model.kind == "greybody":
            return np.asarray(T, float)
        k = np.ceil(np.log(T) / math.log(TEMPERATURE_STEP) - 1e-12)
        return TEMPERATURE_STEP ** k

    def _table(self, T_ref: float) -> _InverseCdf:
        key = float(T_ref)
        table = self._tables.get(key)
        if table is None:
            m = self.model
            lo, hi, _ = m.frequency_window(key)
            knots = m.omega_table[(m.omega_table > lo) & (m.omega_table < hi)]
            w = np.union1d(np.linspace(lo, hi, self.points), knots)
            dens = m.area(w) * w * w / (2 * np.pi * C) ** 2 * m.statistical_factor(HBAR * w / (KB * key))
            table = _InverseCdf(w, dens) if hi > lo else None
            self._tables[key] = table
        return table

    def rate(self, T_ref):
        T_ref = np.asarray(T_ref, float)
        if self.model.kind == "greybody":
            return self._rate_per_t3 * T_ref**3
        out = np.empty(T_ref.shape)
        for value in np.unique(T_ref):
            table = self._table(value)
            out[T_ref == value] = 0.0 if table is None else table.mass
        return out

    def sample(self, T_ref, uniform):
        T_ref = np.asarray(T_ref, float)
        if self.model.kind == "greybody":
            return self._u_table.sample(uniform) * KB * T_ref / HBAR
        out = np.empty(T_ref.shape)
        for value in np.unique(T_ref):
            sel = T_ref == value
            out[sel] = self._table(value).sample(uniform[sel])
        return out

    def acceptance(self, omega, T, T_ref):
        phi = self.model.statistical_factor
        return phi(HBAR * omega / (KB * T)) / phi(HBAR * omega / (KB * T_ref))


def _separation(geometry: BeamGeometry, t):
    t = np.asarray(t, float)
    d = geometry.slit_separation
    tf = geometry.front_time
    tau = geometry.time_of_flight
    after = d * (1.0 - (t - tf) / tau)
    if tf == 0:
        return after
    return np.where(t < tf, d * t / tf, after)


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _rng(seed: int, key: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(key, index))))


def _simulate_block(geometry: BeamGeometry, model: EmissionModel, mode: str, rng: np.random.Generator,
                    n: int, spectrum: _Spectrum | None = None, trajectory=None, record: bool = False):
    """Run ``n`` independent histories side by side.

    Returns fringe factors, final temperatures, event counts, emitted energies
    and (if ``record``) per-trial event lists.
    """
    particle = model.particle
    T0 = particle.initial_temperature
    t_end = geometry.total_time
    factor = np.ones(n)
    counts = np.zeros(n, dtype=np.int64)
    energy = np.zeros(n)
    events = [[] for _ in range(n)] if record else None
    micro = mode == "microcanonical" and particle.cools
    temp_now = np.full(n, T0)
    if model.is_dark or total_rate(model, T0) == 0:
        return factor, temp_now, counts, energy, events
    if spectrum is None:
        spectrum = _Spectrum(model)
    if not micro and particle.cools and trajectory is None:
        trajectory = cool(model, t_end)

    def temperature(idx, t):
        if micro:
            return temp_now[idx]
        if trajectory is None:
            return np.full(idx.size, T0)
        return np.asarray(trajectory(t), float)

    t = np.zeros(n)
    active = np.arange(n)
    while active.size:
        T_ref = spectrum.reference(temperature(active, t[active]))
        rate = spectrum.rate(T_ref)
        live = rate > 0
        active, T_ref, rate = active[live], T_ref[live], rate[live]
        if not active.size:
            break
        tc = t[active] + rng.standard_exponential(active.size) / rate
        u_omega = rng.random(active.size)
        u_accept = rng.random(active.size)
        inside = tc < t_end
        active, T_ref, tc = active[inside], T_ref[inside], tc[inside]
        u_omega, u_accept = u_omega[inside], u_accept[inside]
        if not active.size:
            break
        T_c = temperature(active, tc)
        if np.any(T_c > T_ref * (1 + 1e-9)):
            raise MajorantError("emission rate exceeded its majorant; temperature increased during flight")
        omega = spectrum.sample(T_ref, u_omega)
        hit = (omega > 0) & (u_accept < spectrum.acceptance(omega, T_c, T_ref))
        idx = active[hit]
        w = omega[hit]
        factor[idx] *= sinc(w * _separation(geometry, tc[hit]) / C)
        counts[idx] += 1
        energy[idx] += HBAR * w
        if micro:
            temp_now[idx] = np.maximum(temp_now[idx] - HBAR * w / particle.heat_capacity, TEMPERATURE_FLOOR)
        if record:
            for i, ti, wi in zip(idx, tc[hit], w):
                events[i].append(EmissionEvent(float(ti), float(wi)))
        t[active] = tc
    if micro or not particle.cools:
        final = temp_now
    else:
        final = np.full(n, _temperature_at(trajectory, t_end, T0))
    return factor, final, counts, energy, events


def _temperature_at(trajectory, t, default):
    return default if trajectory is None else float(trajectory(t))


def simulate_trajectory(geometry: BeamGeometry, model: EmissionModel, mode: str = "poisson_cooling",
                        seed: int = 0, trial_index: int = 0) -> TrajectoryResult:
    """One emission history along the flight.

    ``mode="poisson_cooling"`` draws events from the time-dependent rate of
    the deterministic cooling curve; ``mode="microcanonical"`` lowers the
    temperature by ``hbar w / C_V`` at each emission (floored at 1 K).
    """
    _check_mode(mode)
    factor, final, _, _, events = _simulate_block(geometry, model, mode, _rng(seed, _TRAJECTORY_KEY, trial_index),
                                                  1, record=True)
    return TrajectoryResult(events[0], float(factor[0]), float(final[0]))


@dataclass(frozen=True)
class MonteCarloSample:
    """Per-trial results of a batch run."""

    fringe_factor: np.ndarray
    final_temperature: np.ndarray
    event_count: np.ndarray
    emitted_energy: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.mean(self.fringe_factor))

    @property
    def std_error(self) -> float:
        n = self.fringe_factor.size
        return float(np.std(self.fringe_factor, ddof=1) / math.sqrt(n))


def sample_trajectories(geometry: BeamGeometry, model: EmissionModel, mode: str = "poisson_cooling",
                        trials: int = 1000, seed: int = 0, block_size: int = BLOCK_SIZE) -> MonteCarloSample:
    """Simulate ``trials`` histories in vectorized blocks.

    Block ``k`` draws from its own stream ``(seed, k)``, so the result depends
    only on ``(seed, trials, block_size)`` and not on how blocks are scheduled.
    """
    _check_mode(mode)
    if trials < 1:
        raise ValueError("trials must be positive")
    spectrum = None if model.is_dark else _Spectrum(model)
    trajectory = None
    if mode == "poisson_cooling" and model.particle.cools and not model.is_dark:
        trajectory = cool(model, geometry.total_time)
    parts = []
    for k, start in enumerate(range(0, trials, block_size)):
        n = min(block_size, trials - start)
        parts.append(_simulate_block(geometry, model, mode, _rng(seed, _BLOCK_KEY, k), n,
                                     spectrum, trajectory)[:4])
    return MonteCarloSample(*(np.concatenate(col) for col in zip(*parts)))


def estimate_visibility(geometry: BeamGeometry, model: EmissionModel, mode: str = "poisson_cooling",
                        trials: int = 1000, seed: int = 0) -> tuple[float, float]:
    """Mean fringe factor and its standard error over ``trials`` histories."""
    if trials < 100:
        raise ValueError("trials must be at least 100")
    sample = sample_trajectories(geometry, model, mode, trials, seed)
    if not np.any(sample.event_count):
        return 1.0, 0.0
    return sample.mean, sample.std_error
