"""Thermal photon emission of a hot particle and its radiative cooling.

The spectral photon emission rate of a particle with effective emission
area ``A`` and heat capacity ``C_V`` is the greybody form

    R(w; T) = A w^2 / (2 pi c)^2 * exp(-u - k_B u^2 / (2 C_V)),  u = hbar w / k_B T,

where the quadratic term accounts for the drop of the microcanonical
temperature on emission. A tabulated model replaces ``A`` by ``4 sigma_abs(w)``
(spherical particle) and keeps the statistical factor unchanged; this is an
approximation for strongly coloured emitters.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from .constants import C, HBAR, KB
from .numerics import QuadratureSpec, integrate, integrate_ode

SPECTRUM_HEADER = ("omega_rad_per_s", "sigma_abs_m2")

# the exponential factor is cut where it falls below this fraction of its peak
TAIL_FRACTION = 1e-18
_TAIL_LOG = -math.log(TAIL_FRACTION)

# physics-level quadrature: relative accuracy only, rates span many decades
SPECTRAL_QUADRATURE = QuadratureSpec(rel_tol=1e-10, abs_tol=0.0, max_subdivisions=2000)


class EmissionDomainError(ValueError):
    pass


@dataclass(frozen=True)
class ParticleModel:
    """Radiating particle.

    Parameters
    ----------
    effective_area : float
        Emissivity times surface area [m^2].
    heat_capacity : float
        Heat capacity C_V [J/K]; ``math.inf`` disables cooling.
    mass : float
        Particle mass [kg].
    initial_temperature : float
        Internal temperature when entering the interferometer [K].
    """

    effective_area: float
    heat_capacity: float
    mass: float
    initial_temperature: float

    def __post_init__(self):
        for name in ("effective_area", "heat_capacity", "mass", "initial_temperature"):
            value = getattr(self, name)
            if not value > 0 or math.isnan(value):
                raise ValueError(f"{name} must be positive, got {value!r}")
        for name in ("effective_area", "mass", "initial_temperature"):
            if math.isinf(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.heat_capacity_kb < 20:
            warnings.warn(
                f"C_V = {self.heat_capacity_kb:g} k_B is too small for the heat-capacity "
                "expansion of the cooling law to be meaningful",
                stacklevel=3,
            )

    @classmethod
    def from_kb(cls, effective_area, heat_capacity_kb, mass, initial_temperature):
        """Construct with the heat capacity given in multiples of k_B."""
        return cls(effective_area, heat_capacity_kb * KB, mass, initial_temperature)

    @property
    def heat_capacity_kb(self) -> float:
        return self.heat_capacity / KB

    @property
    def cools(self) -> bool:
        return math.isfinite(self.heat_capacity)

    def at_temperature(self, temperature: float) -> "ParticleModel":
        return replace(self, initial_temperature=float(temperature))


@dataclass(frozen=True, eq=False)
class EmissionModel:
    """Spectral emission model, either ``"greybody"`` or ``"tabulated"``.

    ``heat_capacity_correction=False`` drops the quadratic C_V term from the
    statistical factor (the C_V -> infinity spectrum) while the particle can
    still cool.
    """

    particle: ParticleModel
    kind: str = "greybody"
    omega_table: np.ndarray | None = None
    sigma_table: np.ndarray | None = None
    heat_capacity_correction: bool = True

    def __post_init__(self):
        if self.kind == "greybody":
            if self.omega_table is not None or self.sigma_table is not None:
                raise ValueError("greybody model takes no spectrum table")
        elif self.kind == "tabulated":
            omega = np.asarray(self.omega_table, dtype=float)
            sigma = np.asarray(self.sigma_table, dtype=float)
            _check_table(omega, sigma)
            object.__setattr__(self, "omega_table", omega)
            object.__setattr__(self, "sigma_table", sigma)
        else:
            raise ValueError(f"unknown emission kind {self.kind!r}")

    @classmethod
    def greybody(cls, particle: ParticleModel, heat_capacity_correction: bool = True):
        return cls(particle, "greybody", heat_capacity_correction=heat_capacity_correction)

    @classmethod
    def tabulated(cls, particle: ParticleModel, omega, sigma_abs, heat_capacity_correction: bool = True):
        return cls(particle, "tabulated", np.asarray(omega, float), np.asarray(sigma_abs, float),
                   heat_capacity_correction)

    @classmethod
    def from_spectrum_file(cls, particle: ParticleModel, path, heat_capacity_correction: bool = True):
        omega, sigma = load_spectrum(path)
        return cls.tabulated(particle, omega, sigma, heat_capacity_correction)

    def with_particle(self, particle: ParticleModel) -> "EmissionModel":
        return EmissionModel(particle, self.kind, self.omega_table, self.sigma_table,
                             self.heat_capacity_correction)

    def at_temperature(self, temperature: float) -> "EmissionModel":
        return self.with_particle(self.particle.at_temperature(temperature))

    def without_heat_capacity_correction(self) -> "EmissionModel":
        """Same model with the C_V -> infinity statistical factor."""
        return EmissionModel(self.particle, self.kind, self.omega_table, self.sigma_table, False)

    @property
    def spectral_heat_capacity_kb(self) -> float:
        """C_V / k_B entering the statistical factor (inf when disabled)."""
        if not self.heat_capacity_correction:
            return math.inf
        return self.particle.heat_capacity_kb

    def area(self, omega):
        """Effective emission area at ``omega`` [m^2]."""
        if self.kind == "greybody":
            return np.full(np.shape(omega), self.particle.effective_area)
        return 4.0 * np.interp(omega, self.omega_table, self.sigma_table, left=0.0, right=0.0)

    def statistical_factor(self, u):
        """``exp(-u - u^2 k_B / 2 C_V)`` as a function of ``u = hbar w / k_B T``."""
        x = self.spectral_heat_capacity_kb
        u = np.asarray(u, dtype=float)
        if math.isinf(x):
            return np.exp(-u)
        return np.exp(-u - 0.5 * u * u / x)

    def cutoff_u(self) -> float:
        """Reduced frequency where the statistical factor drops to TAIL_FRACTION."""
        x = self.spectral_heat_capacity_kb
        if math.isinf(x):
            return _TAIL_LOG
        return x * (math.sqrt(1.0 + 2.0 * _TAIL_LOG / x) - 1.0)

    def frequency_window(self, temperature: float):
        """Integration range ``(lo, hi, breakpoints)`` covering the emission at T."""
        hi = self.cutoff_u() * KB * temperature / HBAR
        if self.kind == "greybody":
            return 0.0, hi, ()
        lo = float(self.omega_table[0])
        hi = min(hi, float(self.omega_table[-1]))
        knots = self.omega_table[(self.omega_table > lo) & (self.omega_table < hi)]
        if knots.size > 400:
            knots = ()
        return lo, max(hi, lo), tuple(knots)

    def moment(self, n: int) -> float:
        """``int_0^inf u^n * statistical_factor(u) du`` (greybody normalization)."""
        x = self.spectral_heat_capacity_kb
        return _reduced_moment(n, x)

    @cached_property
    def is_dark(self) -> bool:
        return self.kind == "tabulated" and not np.any(self.sigma_table > 0)


@lru_cache(maxsize=256)
def _reduced_moment(n: int, x: float) -> float:
    if math.isinf(x):
        return float(math.factorial(n))
    u_max = x * (math.sqrt(1.0 + 2.0 * _TAIL_LOG * 2 / x) - 1.0)
    return integrate(lambda u: u**n * np.exp(-u - 0.5 * u * u / x), 0.0, u_max,
                     QuadratureSpec(1e-13, 0.0, 500))


def _check_table(omega, sigma):
    if omega.ndim != 1 or omega.shape != sigma.shape:
        raise ValueError("spectrum table needs two 1-D columns of equal length")
    if omega.size < 2:
        raise ValueError("spectrum table needs at least 2 points")
    if not np.all(np.isfinite(omega)) or not np.all(np.isfinite(sigma)):
        raise ValueError("spectrum table contains non-finite values")
    if np.any(np.diff(omega) <= 0):
        raise ValueError("spectrum frequencies must be strictly increasing")
    if omega[0] < 0:
        raise ValueError("spectrum frequencies must be nonnegative")
    if np.any(sigma < 0):
        raise ValueError("absorption cross sections must be nonnegative")


def _check_temperature(temperature):
    if not temperature > 0:
        raise EmissionDomainError(f"temperature must be positive, got {temperature!r}")


def spectral_rate(model: EmissionModel, omega, temperature: float):
    """Spectral photon emission rate [photons / s per rad/s]."""
    _check_temperature(temperature)
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise EmissionDomainError("frequency must be nonnegative")
    u = HBAR * omega / (KB * temperature)
    out = model.area(omega) * omega**2 / (2 * np.pi * C) ** 2 * model.statistical_factor(u)
    return out if out.ndim else float(out)


def spectral_integral(model: EmissionModel, temperature: float, weight=None,
                      spec: QuadratureSpec = SPECTRAL_QUADRATURE) -> float:
    """``int_0^inf dw R(w; T) * weight(w)`` over the emission window."""
    _check_temperature(temperature)
    lo, hi, knots = model.frequency_window(temperature)
    if hi <= lo or model.is_dark:
        return 0.0
    scale = KB * temperature / HBAR
    pref = 1.0 / (2 * np.pi * C) ** 2

    def integrand(w):
        u = w / scale
        val = model.area(w) * w * w * pref * model.statistical_factor(u)
        if weight is not None:
            val = val * weight(w)
        return val

    return integrate(integrand, lo, hi, spec, knots)


def _greybody_prefactor(model: EmissionModel, temperature: float) -> float:
    return model.particle.effective_area / (2 * np.pi * C) ** 2 * (KB * temperature / HBAR) ** 3


def total_rate(model: EmissionModel, temperature: float) -> float:
    """Total photon emission rate [1/s]."""
    _check_temperature(temperature)
    if model.kind == "greybody":
        return _greybody_prefactor(model, temperature) * model.moment(2)
    return spectral_integral(model, temperature)


def energy_loss_rate(model: EmissionModel, temperature: float) -> float:
    """Radiated power ``int dw hbar w R(w; T)`` [W]."""
    _check_temperature(temperature)
    if model.kind == "greybody":
        return float(_greybody_prefactor(model, temperature) * KB * temperature * model.moment(3))
    return spectral_integral(model, temperature, lambda w: HBAR * w)


@dataclass(frozen=True)
class CoolingTrajectory:
    """Internal temperature along the flight; callable at any ``t`` in range."""

    t: np.ndarray
    temperature: np.ndarray
    solution: object = field(repr=False, default=None)

    def __post_init__(self):
        if np.any(self.temperature <= 0):
            raise ValueError("cooling trajectory reached a non-positive temperature")
        if np.any(np.diff(self.temperature) > 0):
            raise ValueError("cooling trajectory must be non-increasing")

    @property
    def initial_temperature(self) -> float:
        return float(self.temperature[0])

    @property
    def final_temperature(self) -> float:
        return float(self.temperature[-1])

    def __call__(self, t):
        if self.solution is None:
            t = np.asarray(t, dtype=float)
            out = np.full(t.shape, self.temperature[0])
            return out if out.ndim else float(out)
        return self.solution(t)


COOLING_ODE = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-10)


def cool(model: EmissionModel, t_span, spec: QuadratureSpec = COOLING_ODE) -> CoolingTrajectory:
    """Solve ``dT/dt = -energy_loss_rate(T) / C_V`` from the particle's T0.

    ``t_span`` is ``(0, tau)`` or just ``tau``.
    """
    if np.ndim(t_span) == 0:
        t_span = (0.0, float(t_span))
    t0, t1 = map(float, t_span)
    if t1 < t0:
        raise ValueError("cooling span must be increasing")
    particle = model.particle
    T0 = particle.initial_temperature
    if not particle.cools or t1 == t0:
        return CoolingTrajectory(np.array([t0, t1]) if t1 > t0 else np.array([t0]),
                                 np.full(2 if t1 > t0 else 1, T0))
    heat_capacity = particle.heat_capacity

    if model.kind == "greybody":
        # P(T) = P(1 K) * T^4 exactly for the greybody spectrum
        p1 = energy_loss_rate(model, 1.0)

        def rhs(t, T):
            return -p1 * T**4 / heat_capacity if T > 0 else 0.0
    else:
        def rhs(t, T):
            return -energy_loss_rate(model, T) / heat_capacity if T > 0 else 0.0

    sol = integrate_ode(rhs, T0, (t0, t1), spec)
    return CoolingTrajectory(sol.t, sol.y, sol)


def cooling_parameter(particle: ParticleModel) -> float:
    """Growth rate of ``T_inf^-3(t)``: ``9 k_B^4 A F(C_V/k_B) / (2 pi^2 c^2 hbar^3 C_V)``."""
    if not particle.cools:
        raise ValueError("analytic cooling law needs a finite heat capacity")
    x = particle.heat_capacity_kb
    F = 1.0 - 10.0 / x + 105.0 / x**2
    return 9 * KB**4 * particle.effective_area * F / (2 * np.pi**2 * C**2 * HBAR**3 * particle.heat_capacity)


def analytic_cooling(particle: ParticleModel, t):
    """Closed-form greybody cooling ``T0 [1 + T0^3 / T_inf^3(t)]^(-1/3)``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    T0 = particle.initial_temperature
    out = T0 * (1.0 + T0**3 * cooling_parameter(particle) * t) ** (-1.0 / 3.0)
    return out if out.ndim else float(out)


def load_spectrum(path):
    """Read a two-column ``omega_rad_per_s,sigma_abs_m2`` spectrum file."""
    path = Path(path)
    rows = []
    header_seen = False
    with path.open(newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            cells = [c.strip() for c in next(csv.reader([stripped]))]
            if not header_seen:
                if tuple(cells) != SPECTRUM_HEADER:
                    raise ValueError(f"{path}:{lineno}: expected header {','.join(SPECTRUM_HEADER)}")
                header_seen = True
                continue
            if len(cells) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(cells)}")
            try:
                rows.append((float(cells[0]), float(cells[1])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not header_seen:
        raise ValueError(f"{path}: missing header line")
    data = np.array(rows, dtype=float).reshape(-1, 2)
    try:
        _check_table(data[:, 0], data[:, 1])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return data[:, 0], data[:, 1]


def write_spectrum(path, omega, sigma_abs, comment: str | None = None):
    path = Path(path)
    with path.open("w", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(",".join(SPECTRUM_HEADER) + "\n")
        for w, s in zip(omega, sigma_abs):
            fh.write(f"{float(w):.17g},{float(s):.17g}\n")
