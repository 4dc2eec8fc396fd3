"""Decoherence functions, visibility reduction and thermal decoherence times.

Convention: a particle enters the interferometer at ``t = 0`` with the
initial temperature of its :class:`ParticleModel`. Without a coherence slit
the double slit sits at ``t = 0``; with one, the particle first flies the
coherence-slit distance (path separation growing from 0 to ``d``) and then
the slit-to-screen distance (separation shrinking from ``d`` to 0).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .constants import C, HBAR, KB
from .emission import (
    SPECTRAL_QUADRATURE,
    EmissionModel,
    ParticleModel,
    cool,
    energy_loss_rate,
    spectral_integral,
    total_rate,
)
from .numerics import (
    QuadratureSpec,
    RootFindingError,
    find_root,
    integrate,
    one_minus_si_ratio,
    one_minus_sinc,
    sinc,
)

TIME_QUADRATURE = QuadratureSpec(rel_tol=1e-9, abs_tol=0.0, max_subdivisions=500)

TEMPERATURE_SEARCH_RANGE = (1.0, 1e6)


class NoEmissionError(ValueError):
    pass


class KernelResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class BeamGeometry:
    """Far-field double-slit layout (SI units)."""

    slit_separation: float
    flight_distance: float
    velocity: float
    mass: float
    coherence_slit_distance: float | None = None

    def __post_init__(self):
        for name in ("slit_separation", "flight_distance", "velocity", "mass"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.coherence_slit_distance is not None and not self.coherence_slit_distance > 0:
            raise ValueError("coherence_slit_distance must be positive when given")

    @property
    def time_of_flight(self) -> float:
        return self.flight_distance / self.velocity

    @property
    def front_time(self) -> float:
        if self.coherence_slit_distance is None:
            return 0.0
        return self.coherence_slit_distance / self.velocity

    @property
    def total_time(self) -> float:
        return self.front_time + self.time_of_flight

    @property
    def momentum(self) -> float:
        return self.mass * self.velocity

    @property
    def de_broglie_wavelength(self) -> float:
        return 2 * np.pi * HBAR / self.momentum

    @property
    def fringe_period(self) -> float:
        return self.de_broglie_wavelength * self.flight_distance / self.slit_separation

    @property
    def coherence_factor(self) -> float:
        """Decoherence-rate multiplier from the coherence-slit section (2 for equal distances)."""
        if self.coherence_slit_distance is None:
            return 1.0
        return 1.0 + self.coherence_slit_distance / self.flight_distance

    def with_time_of_flight(self, tau: float) -> "BeamGeometry":
        """Same layout flown at the velocity giving slit-to-screen time ``tau``."""
        return replace(self, velocity=self.flight_distance / tau)

    def with_slit_separation(self, d: float) -> "BeamGeometry":
        return replace(self, slit_separation=d)

    def segments(self, separation: float | None = None):
        """``(t_start, t_end, separation(t))`` for each flight section."""
        d = self.slit_separation if separation is None else separation
        out = []
        tf = self.front_time
        if tf > 0:
            out.append((0.0, tf, lambda t: d * np.asarray(t) / tf))
        tau = self.time_of_flight
        out.append((tf, tf + tau, lambda t: d * (1.0 - (np.asarray(t) - tf) / tau)))
        return out


class DecoherenceFunction:
    """Isotropic decoherence function eta(|R|) with eta(0) = 1."""

    def __init__(self, func, kind: str):
        self._func = func
        self.kind = kind

    def __call__(self, R):
        R = np.asarray(R, dtype=float)
        out = np.where(R == 0, 1.0, self._func(np.abs(R)))
        return out if out.ndim else float(out)

    @classmethod
    def radiative(cls, model: EmissionModel, temperature: float) -> "DecoherenceFunction":
        """Rate-weighted average of ``sinc(w R / c)`` over the emission spectrum."""
        return radiative_decoherence_function(model, temperature)

    @classmethod
    def isotropic_numeric(cls, separations, values) -> "DecoherenceFunction":
        """Linear interpolation of sampled eta; constant beyond the last sample."""
        R = np.asarray(separations, dtype=float)
        eta = np.asarray(values, dtype=float)
        if R.ndim != 1 or R.shape != eta.shape or np.any(np.diff(R) <= 0) or R[0] < 0:
            raise ValueError("separations must be increasing, nonnegative, matching values")
        if np.any(np.abs(eta) > 1 + 1e-12):
            raise ValueError("|eta| must not exceed 1")
        if R[0] > 0:
            R = np.concatenate([[0.0], R])
            eta = np.concatenate([[1.0], eta])
        elif eta[0] != 1.0:
            raise ValueError("eta(0) must equal 1")
        return cls(lambda r: np.interp(r, R, eta), "isotropic_numeric")

    @classmethod
    def custom(cls, func) -> "DecoherenceFunction":
        return cls(lambda r: np.asarray(func(r), dtype=float), "custom")


class _RadiativeEtaTable:
    """eta(R) tabulated against ``b = k_B T R / (hbar c)`` on a log grid.

    For the greybody spectrum eta depends on ``b`` only, so one table serves
    every temperature. Tabulated spectra get a table per temperature.
    """

    B_MIN, B_MAX, N = 1e-3, 1e2, 801

    def __init__(self, model: EmissionModel, temperature: float):
        self.model = model
        self.temperature = temperature
        self.scale = KB * temperature / (HBAR * C)  # b per metre
        norm = spectral_integral(model, temperature)
        self.norm = norm
        # eta is bounded by 1, so an absolute tolerance relative to the norm suffices
        self._spec = QuadratureSpec(1e-10, 1e-13 * norm, SPECTRAL_QUADRATURE.max_subdivisions)
        w2 = spectral_integral(model, temperature, lambda w: (w / C) ** 2) / norm
        w4 = spectral_integral(model, temperature, lambda w: (w / C) ** 4) / norm
        self._k2 = w2 / self.scale**2
        self._k4 = w4 / self.scale**4
        b = np.geomspace(self.B_MIN, self.B_MAX, self.N)
        vals = np.array([self._direct(bi) for bi in b])
        self._spline = CubicSpline(np.log(b), vals)

    def _direct(self, b):
        R = b / self.scale
        return spectral_integral(self.model, self.temperature, lambda w: sinc(w * R / C),
                                 self._spec) / self.norm

    def __call__(self, R):
        b = np.atleast_1d(np.asarray(R, dtype=float) * self.scale)
        out = np.empty_like(b)
        low = b < self.B_MIN
        high = b > self.B_MAX
        mid = ~(low | high)
        b2 = b[low] ** 2
        out[low] = 1.0 - self._k2 * b2 / 6.0 + self._k4 * b2 * b2 / 120.0
        out[mid] = self._spline(np.log(b[mid]))
        out[high] = [self._oscillatory(bi) for bi in b[high]]
        return out.reshape(np.shape(R))

    def _oscillatory(self, b):
        # sin-weighted quadrature (QAWO) copes with many oscillations per panel
        k = b / self.scale / C
        lo, hi, knots = self.model.frequency_window(self.temperature)
        edges = np.unique(np.concatenate([[lo], np.asarray(knots, float), [hi]]))
        pref = 1.0 / (2 * np.pi * C) ** 2
        unit = KB * self.temperature / HBAR

        def f(w):
            return self.model.area(w) * w * pref * self.model.statistical_factor(w / unit) / k

        total = 0.0
        for a, z in zip(edges[:-1], edges[1:]):
            total += quad(f, a, z, weight="sin", wvar=k, epsabs=1e-12 * self.norm, limit=500)[0]
        return total / self.norm


@lru_cache(maxsize=32)
def _greybody_eta_table(heat_capacity_kb: float) -> _RadiativeEtaTable:
    # unit particle at the temperature where k_B T / (hbar c) = 1 / m, so b = R
    particle = ParticleModel(1.0, heat_capacity_kb * KB, 1.0, HBAR * C / KB)
    return _RadiativeEtaTable(EmissionModel.greybody(particle), particle.initial_temperature)


class _ScaledEta:
    def __init__(self, table, temperature):
        self.table = table
        self.factor = KB * temperature / (HBAR * C) / table.scale

    def __call__(self, R):
        return self.table(np.asarray(R) * self.factor)


def eta_radiative(model: EmissionModel, temperature: float, R):
    """Radiative decoherence function at separation(s) ``R`` [m]."""
    return radiative_decoherence_function(model, temperature)(R)


def radiative_decoherence_function(model: EmissionModel, temperature: float) -> DecoherenceFunction:
    if total_rate(model, temperature) <= 0:
        raise NoEmissionError("decoherence function undefined; no emission")
    if model.kind == "greybody":
        table = _ScaledEta(_greybody_eta_table(model.spectral_heat_capacity_kb), temperature)
    else:
        table = _RadiativeEtaTable(model, temperature)
    return DecoherenceFunction(table, "radiative")


def visibility_general(geometry: BeamGeometry, rate, eta: DecoherenceFunction,
                       spec: QuadratureSpec = TIME_QUADRATURE) -> float:
    """Visibility from an event rate ``gamma(t)`` [1/s] and decoherence function.

    ``rate`` is a constant or a vectorized callable of the time since the
    particle entered the interferometer.
    """
    if callable(rate):
        gamma = rate
    else:
        if rate < 0:
            raise ValueError("rate must be nonnegative")
        if rate == 0:
            return 1.0
        gamma = lambda t: np.full(np.shape(t), float(rate))  # noqa: E731
    exponent = 0.0
    for t0, t1, sep in geometry.segments():
        exponent += integrate(lambda t: gamma(t) * (1.0 - eta(sep(t))), t0, t1, spec)
    return math.exp(-exponent)


def _resolving_spec(model, temperature, separation, spec):
    # oscillatory weights at large separations cannot meet a pure relative
    # tolerance; add an absolute floor on the scale of the expected result
    if spec is None:
        spec = SPECTRAL_QUADRATURE
    b = KB * temperature * separation / (HBAR * C)
    floor = 1e-2 * spec.rel_tol * total_rate(model, temperature) * min(1.0, b * b)
    return QuadratureSpec(spec.rel_tol, max(spec.abs_tol, floor), max(spec.max_subdivisions, 20000))


def separation_decoherence_rate(model: EmissionModel, temperature: float, separation: float,
                                spec: QuadratureSpec | None = None) -> float:
    """``int dw R(w; T) [1 - sinc(w s / c)]``, the rate of events resolving ``s``."""
    if separation == 0:
        return 0.0
    spec = _resolving_spec(model, temperature, separation, spec)
    return spectral_integral(model, temperature, lambda w: one_minus_sinc(w * separation / C), spec)


class _GreybodyResolvingRate:
    """``G(b) = int du u^2 phi(u) [1 - sinc(u b)]`` for the greybody statistical factor phi.

    The greybody resolving rate is ``A / (2 pi c)^2 (k_B T / hbar)^3 G(b)``
    with ``b = k_B T s / (hbar c)``, so one table per C_V serves every
    temperature and separation. Spline in log-log between B_MIN and B_MAX,
    small-``b`` series below, the ``b -> inf`` limit above.
    """

    B_MIN, B_MAX, N = 1e-3, 1e3, 601

    def __init__(self, heat_capacity_kb: float):
        self.x = heat_capacity_kb
        if math.isinf(heat_capacity_kb):
            return
        particle = ParticleModel(1.0, heat_capacity_kb * KB, 1.0, 1.0)
        model = EmissionModel.greybody(particle)
        u_max = model.cutoff_u()
        phi = model.statistical_factor
        self.m2 = model.moment(2)
        self.m4 = model.moment(4)
        self.m6 = model.moment(6)
        b = np.geomspace(self.B_MIN, self.B_MAX, self.N)
        vals = []
        for bi in b:
            size = min(self.m2, self.m4 * bi * bi / 6)
            spec = QuadratureSpec(1e-12, 1e-12 * size, 5000)
            vals.append(integrate(lambda u: u * u * phi(u) * one_minus_sinc(u * bi), 0.0, u_max, spec))
        self._spline = CubicSpline(np.log(b), np.log(vals))

    def __call__(self, b):
        b = np.asarray(b, dtype=float)
        if math.isinf(self.x):
            b2 = b * b
            return 2 * b2 * (2 + b2) / (1 + b2) ** 2
        out = np.empty_like(b)
        low = b < self.B_MIN
        high = b > self.B_MAX
        mid = ~(low | high)
        b2 = b[low] ** 2
        out[low] = self.m4 * b2 / 6 - self.m6 * b2 * b2 / 120
        out[mid] = np.exp(self._spline(np.log(b[mid])))
        out[high] = self.m2
        return out


@lru_cache(maxsize=32)
def _greybody_resolving_rate(heat_capacity_kb: float) -> _GreybodyResolvingRate:
    return _GreybodyResolvingRate(heat_capacity_kb)


def greybody_resolving_rate(model: EmissionModel, temperature, separation):
    """Vectorized :func:`separation_decoherence_rate` for greybody models (tabulated in b)."""
    if model.kind != "greybody":
        raise ValueError("greybody model required")
    T = np.asarray(temperature, dtype=float)
    b = KB * T * np.asarray(separation, dtype=float) / (HBAR * C)
    pref = model.particle.effective_area / (2 * np.pi * C) ** 2 * (KB * T / HBAR) ** 3
    return pref * _greybody_resolving_rate(model.spectral_heat_capacity_kb)(b)


def _averaged_rate(model: EmissionModel, temperature: float, separation: float,
                   spec: QuadratureSpec | None = None) -> float:
    # time average of separation_decoherence_rate over a linear ramp 0 -> s
    if separation == 0:
        return 0.0
    spec = _resolving_spec(model, temperature, separation, spec)
    return spectral_integral(model, temperature, lambda w: one_minus_si_ratio(w * separation / C), spec)


def thermal_exponent(geometry: BeamGeometry, model: EmissionModel, with_cooling: bool = True,
                     separation: float | None = None, spec: QuadratureSpec = TIME_QUADRATURE,
                     trajectory=None) -> float:
    """``-log V`` for heat radiation along the flight.

    ``separation`` overrides the slit separation (used for the kernel, where
    ``d -> |q| L / p_z``). A precomputed cooling ``trajectory`` covering the
    flight may be passed to avoid re-solving the cooling equation.
    """
    d = geometry.slit_separation if separation is None else separation
    if d == 0:
        return 0.0
    particle = model.particle
    T0 = particle.initial_temperature
    inner = spec.tighter(10)
    inner = QuadratureSpec(min(inner.rel_tol, SPECTRAL_QUADRATURE.rel_tol), 0.0,
                           SPECTRAL_QUADRATURE.max_subdivisions)
    if not (with_cooling and particle.cools):
        return geometry.total_time * _averaged_rate(model, T0, d, inner)
    if trajectory is None:
        trajectory = cool(model, geometry.total_time)
    exponent = 0.0
    for t0, t1, sep in geometry.segments(d):
        if model.kind == "greybody":
            def integrand(t, sep=sep):
                return greybody_resolving_rate(model, trajectory(t), sep(t))
        else:
            def integrand(t, sep=sep):
                temps = np.atleast_1d(trajectory(t))
                seps = np.atleast_1d(sep(t))
                return np.array([separation_decoherence_rate(model, float(T), float(s), inner)
                                 for T, s in zip(temps, seps)])

        exponent += integrate(integrand, t0, t1, spec)
    return exponent


def visibility_thermal(geometry: BeamGeometry, model: EmissionModel, with_cooling: bool = True,
                       spec: QuadratureSpec = TIME_QUADRATURE) -> float:
    """Fringe visibility reduction by the particle's own heat radiation."""
    return math.exp(-thermal_exponent(geometry, model, with_cooling, spec=spec))


def scaling_function(x):
    """``f(x) = 2x^3 - x^3/(1+x^2) - x^2 arctan(x)``, with f(x) ~ (4/3) x^5 for small x."""
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    small = np.abs(flat) < 0.5
    if small.any():
        xs = flat[small]
        x2 = xs * xs
        power = xs**5
        total = np.zeros_like(xs)
        for k in range(1, 40):
            total += (-1) ** (k + 1) * power * (2 * k + 2) / (2 * k + 1)
            power = power * x2
        out[small] = total
    if (~small).any():
        xl = flat[~small]
        out[~small] = 2 * xl**3 - xl**3 / (1 + xl**2) - xl**2 * np.arctan(xl)
    out = out.reshape(x.shape)
    return out if out.ndim else float(out)


def reduced_temperature(temperature: float, separation: float) -> float:
    """``x = k_B T d / (hbar c)``."""
    return KB * temperature * separation / (HBAR * C)


def decoherence_time_quadrature(geometry: BeamGeometry, model: EmissionModel, temperature: float,
                                spec: QuadratureSpec = SPECTRAL_QUADRATURE) -> float:
    """Thermal decoherence time by spectral quadrature with the C_V -> infinity spectrum.

    Returns ``math.inf`` when nothing is emitted.
    """
    flat = model.without_heat_capacity_correction()
    rate = _averaged_rate(flat, temperature, geometry.slit_separation, spec)
    rate *= geometry.coherence_factor
    return math.inf if rate == 0 else 1.0 / rate


def decoherence_time_closed(geometry: BeamGeometry, particle: ParticleModel, temperature: float) -> float:
    """Closed-form greybody decoherence time ``(2 pi)^2 d^3 / (A c f(x))``."""
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    d = geometry.slit_separation
    x = reduced_temperature(temperature, d)
    rate = particle.effective_area * C / ((2 * np.pi) ** 2 * d**3) * scaling_function(x)
    return 1.0 / (rate * geometry.coherence_factor)


def decoherence_time_smallx(geometry: BeamGeometry, particle: ParticleModel, temperature: float) -> float:
    """Leading small-``x`` decoherence time, proportional to ``1 / (d^2 T^5)``."""
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    d = geometry.slit_separation
    x = reduced_temperature(temperature, d)
    if x > 0.3:
        warnings.warn(f"k_B T d / (hbar c) = {x:.3g} is not small; the T^5 law is inaccurate",
                      stacklevel=2)
    rate = particle.effective_area * d**2 / (3 * np.pi**2 * C**4) * (KB * temperature / HBAR) ** 5
    return 1.0 / (rate * geometry.coherence_factor)


def asymptotic_exponent(geometry: BeamGeometry, model: EmissionModel,
                        spec: QuadratureSpec = TIME_QUADRATURE) -> float:
    """Limit of ``-log V`` for infinitely slow flight of a cooling particle.

    Every photon then sees the full separation ``d``, so the exponent is
    ``int_0^inf dt Gamma(T(t), d) = C_V int_0^T0 dT Gamma(T, d) / P(T)``.
    Infinite for a particle that does not cool.
    """
    particle = model.particle
    if not particle.cools:
        return math.inf
    d = geometry.slit_separation
    T0 = particle.initial_temperature

    def integrand(T):
        out = np.empty(np.shape(T))
        for i, Ti in enumerate(np.atleast_1d(T)):
            power = energy_loss_rate(model, float(Ti))
            out[i] = 0.0 if power == 0 else separation_decoherence_rate(model, float(Ti), d) / power
        return out

    return particle.heat_capacity * integrate(integrand, 0.0, T0, spec)


@dataclass(frozen=True)
class DecoherenceTime:
    """Flight time at which the visibility has dropped to 1/e."""

    value: float
    status: str = "ok"

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def decoherence_time_inverted(geometry: BeamGeometry, model: EmissionModel, with_cooling: bool = True,
                              max_factor: float = 1e6) -> DecoherenceTime:
    """Solve ``visibility_thermal(tau) = 1/e`` for the time of flight ``tau``.

    Status is ``"ok"``, or ``"no_crossing"`` with ``value = inf`` when cooling
    stops the visibility from ever reaching 1/e.
    """
    T0 = model.particle.initial_temperature
    if total_rate(model, T0) == 0:
        return DecoherenceTime(math.inf, "no_emission")
    probe = geometry.with_time_of_flight(1.0)
    if not (with_cooling and model.particle.cools):
        return DecoherenceTime(1.0 / thermal_exponent(probe, model, with_cooling=False))

    if geometry.coherence_slit_distance is None and asymptotic_exponent(geometry, model) <= 1.0:
        return DecoherenceTime(math.inf, "no_crossing")

    def excess(log_tau):
        return thermal_exponent(geometry.with_time_of_flight(math.exp(log_tau)), model, True) - 1.0

    guess = 1.0 / thermal_exponent(probe, model, with_cooling=False)
    lo = math.log(guess)
    while excess(lo) > 0:
        lo -= math.log(2.0)
    hi = lo + math.log(2.0)
    limit = lo + math.log(max_factor)
    while excess(hi) <= 0:
        hi += math.log(2.0)
        if hi > limit:
            return DecoherenceTime(math.inf, "no_crossing")
    log_tau = find_root(excess, (hi - math.log(2.0), hi), tol=1e-11)
    return DecoherenceTime(math.exp(log_tau))


def invert_for_temperature(geometry: BeamGeometry, model: EmissionModel, target_tau: float,
                           with_cooling: bool = True) -> float:
    """Initial temperature at which the visibility after ``target_tau`` equals 1/e."""
    if not target_tau > 0:
        raise ValueError("target_tau must be positive")
    geom = geometry.with_time_of_flight(target_tau)

    def excess(log_T):
        m = model.at_temperature(math.exp(log_T))
        if total_rate(m, m.particle.initial_temperature) == 0:
            return -1.0
        return thermal_exponent(geom, m, with_cooling) - 1.0

    lo_lim, hi_lim = (math.log(v) for v in TEMPERATURE_SEARCH_RANGE)
    start = math.log(model.particle.initial_temperature)
    start = min(max(start, lo_lim), hi_lim)
    step = math.log(2.0)
    lo = hi = start
    f_start = excess(start)
    if f_start > 0:
        while True:
            lo = max(lo - step, lo_lim)
            if excess(lo) <= 0:
                hi = lo + step if lo + step < start else start
                break
            if lo == lo_lim:
                raise RootFindingError(f"no temperature in {TEMPERATURE_SEARCH_RANGE} K brackets the target")
    else:
        while True:
            hi = min(hi + step, hi_lim)
            if excess(hi) > 0:
                lo = max(hi - step, start)
                break
            if hi == hi_lim:
                raise RootFindingError(f"no temperature in {TEMPERATURE_SEARCH_RANGE} K brackets the target")
    return math.exp(find_root(excess, (lo, hi), tol=1e-11))


def gaussian_kernel_width(geometry: BeamGeometry, particle: ParticleModel, temperature: float) -> float:
    """Width of the small-``x`` Gaussian blurring kernel [m]."""
    L = geometry.flight_distance
    pz = geometry.momentum
    var = (2 * geometry.mass * particle.effective_area * (KB * temperature) ** 5
           * (L / (HBAR * pz)) ** 3 / (3 * np.pi**2 * C**4))
    return math.sqrt(var)


def momentum_grid(q_max: float, n: int) -> np.ndarray:
    """Uniform FFT-ordered (zero-centred) momentum grid with ``n`` points."""
    dq = q_max / (n // 2)
    return dq * (np.arange(n) - n // 2)


def _check_momentum_grid(q):
    q = np.asarray(q, dtype=float)
    n = q.size
    if q.ndim != 1 or n < 4:
        raise ValueError("q_grid must be 1-D with at least 4 points")
    dq = np.diff(q)
    if np.any(dq <= 0) or not np.allclose(dq, dq[0], rtol=1e-9, atol=0):
        raise ValueError("q_grid must be uniform and increasing")
    zero = n // 2
    if abs(q[zero]) > 1e-9 * dq[0]:
        raise ValueError("q_grid must contain q = 0 at index n // 2")
    sym = q[1:] if n % 2 == 0 else q
    if not np.allclose(sym, -sym[::-1], rtol=1e-9, atol=1e-9 * dq[0]):
        raise ValueError("q_grid must be symmetric about zero")
    return q, float(dq[0])


@dataclass(frozen=True)
class DecoherenceKernel:
    """Blurring kernel: Fourier-domain damping and real-space ``h(s)``.

    ``q`` and ``s`` are FFT-conjugate grids (``dq * ds * n = 2 pi hbar``).
    """

    q: np.ndarray
    damping: np.ndarray
    s: np.ndarray
    h: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        zero = self.q.size // 2
        if self.damping[zero] != 1.0:
            raise ValueError("damping at q = 0 must equal 1")
        if np.any(self.damping < 0) or np.any(self.damping > 1 + 1e-12):
            raise ValueError("damping must lie in [0, 1]")

    @property
    def ds(self) -> float:
        return float(self.s[1] - self.s[0])

    def area(self) -> float:
        return float(np.sum(self.h) * self.ds)

    def second_moment(self) -> float:
        return float(np.sum(self.s**2 * self.h) * self.ds)

    def damping_at(self, q):
        return np.interp(np.abs(q), self.q[self.q.size // 2:], self.damping[self.q.size // 2:])

    @classmethod
    def from_damping(cls, q, damping, meta=None) -> "DecoherenceKernel":
        q, dq = _check_momentum_grid(q)
        damping = np.asarray(damping, dtype=float)
        n = q.size
        ds = 2 * np.pi * HBAR / (n * dq)
        s = ds * (np.arange(n) - n // 2)
        h = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(damping))).real * n * dq / (2 * np.pi * HBAR)
        return cls(q, damping, s, h, dict(meta or {}))


def build_kernel(geometry: BeamGeometry, model: EmissionModel, with_cooling: bool, q_grid,
                 max_step: float = 0.2) -> DecoherenceKernel:
    """Decoherence kernel on ``q_grid`` (see :func:`momentum_grid`).

    The damping at momentum ``q`` is the visibility for the separation
    ``|q| L / p_z``. Raises :class:`KernelResolutionError` when adjacent
    damping samples differ by more than ``max_step``.
    """
    q, dq = _check_momentum_grid(q_grid)
    scale = geometry.flight_distance / geometry.momentum
    n = q.size
    # |q| takes the values k * dq, k = 0 .. n // 2, on both odd and even grids
    qabs = dq * np.arange(n // 2 + 1)
    trajectory = cool(model, geometry.total_time) if with_cooling else None
    exps = np.array([thermal_exponent(geometry, model, with_cooling, separation=qi * scale,
                                      trajectory=trajectory) for qi in qabs])
    half = np.exp(-exps)
    half[0] = 1.0
    steps = np.abs(np.diff(half))
    if np.any(steps > max_step):
        k = int(np.argmax(steps > max_step))
        raise KernelResolutionError(
            f"momentum grid too coarse: damping changes by {steps[k]:.3g} between "
            f"q={qabs[k]:.3g} and q={qabs[k + 1]:.3g}; refine dq below {dq:.3g}"
        )
    damping = half[np.abs(np.arange(n) - n // 2)]
    meta = {"with_cooling": with_cooling, "temperature": model.particle.initial_temperature}
    return DecoherenceKernel.from_damping(q, damping, meta)
