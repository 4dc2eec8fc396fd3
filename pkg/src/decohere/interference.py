"""Far-field multi-slit patterns and their blurring by decoherence.

Everything is one-dimensional along the fringe axis. A pattern for fixed
longitudinal momentum ``p_z`` is the transverse momentum distribution after
the grating mapped onto the screen, ``w_r(r) = (p_z / L) w_p(p_z r / L)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .constants import HBAR
from .decoherence import BeamGeometry, DecoherenceKernel, build_kernel, momentum_grid
from .emission import EmissionModel

NEGATIVITY_FLOOR = 1e-9


class GridResolutionError(ValueError):
    pass


class VisibilityFitError(ValueError):
    pass


@dataclass(frozen=True)
class ApertureModel:
    """Grating of ``n_slits`` slits of width ``slit_width`` spaced by ``slit_separation``.

    ``single_slit_density`` overrides the default Fraunhofer profile of a
    uniform slit; it must be a unit-normalized density in transverse momentum.
    """

    slit_separation: float
    slit_width: float
    n_slits: int = 2
    single_slit_density: Callable | None = None

    def __post_init__(self):
        if not 0 < self.slit_width < self.slit_separation:
            raise ValueError("need 0 < slit_width < slit_separation")
        if self.n_slits < 2:
            raise ValueError("need at least 2 slits")

    @property
    def kind(self) -> str:
        return "double_slit" if self.n_slits == 2 else "multi_slit"


def single_slit_density(aperture: ApertureModel, p):
    """Transverse momentum density behind one slit (default ``sinc^2(p a / 2 hbar)``)."""
    p = np.asarray(p, dtype=float)
    if aperture.single_slit_density is not None:
        return np.asarray(aperture.single_slit_density(p), dtype=float)
    a = aperture.slit_width
    arg = p * a / (2 * HBAR)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(arg == 0, 1.0, np.sin(arg) / arg)
    return a / (2 * np.pi * HBAR) * s * s


def grating_factor(aperture: ApertureModel, p):
    """``|sum_k exp(i k p d / hbar)|^2 / N``; equals ``1 + cos(p d / hbar)`` for two slits."""
    phi = np.asarray(p, dtype=float) * aperture.slit_separation / HBAR
    N = aperture.n_slits
    if N == 2:
        return 1.0 + np.cos(phi)
    half = 0.5 * phi
    s = np.sin(half)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.sin(N * half) ** 2 / (s * s)
    # at the principal maxima sin(phi/2) = 0 and the sum is N^2
    return np.where(np.abs(s) < 1e-12, float(N * N), ratio) / N


def momentum_distribution_after_slits(aperture: ApertureModel, p):
    out = grating_factor(aperture, p) * single_slit_density(aperture, p)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class IntensityPattern:
    """Screen intensity on a uniform grid symmetric about ``r = 0``."""

    r: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", v)
        check_screen_grid(r)
        if v.shape != r.shape:
            raise ValueError("values and grid differ in shape")
        if v.size and v.min() < -NEGATIVITY_FLOOR * max(v.max(), 0.0):
            raise ValueError("intensity pattern has negative values")

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])

    def total(self) -> float:
        return float(np.sum(self.values) * self.dr)


def screen_grid(half_width: float, n: int) -> np.ndarray:
    """Uniform grid of ``n`` (odd) points on ``[-half_width, half_width]``."""
    if n % 2 == 0:
        raise ValueError("use an odd number of points so that r = 0 is on the grid")
    return np.linspace(-half_width, half_width, n)


def check_screen_grid(r) -> float:
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size < 3:
        raise ValueError("screen grid must be 1-D with at least 3 points")
    dr = np.diff(r)
    if np.any(dr <= 0) or not np.allclose(dr, dr[0], rtol=1e-9, atol=0):
        raise ValueError("screen grid must be uniform and increasing")
    if not np.allclose(r, -r[::-1], rtol=0, atol=1e-9 * dr[0]):
        raise ValueError("screen grid must be symmetric about r = 0")
    return float(dr[0])


def _check_resolution(r, geometry: BeamGeometry, samples_per_period: int = 8):
    dr = check_screen_grid(r)
    period = geometry.fringe_period
    if dr > period / samples_per_period:
        raise GridResolutionError(
            f"screen grid spacing {dr:.4g} m under-resolves the fringe period {period:.4g} m; "
            f"use a spacing of at most {period / samples_per_period:.4g} m"
        )


def far_field_pattern(aperture: ApertureModel, geometry: BeamGeometry, r) -> IntensityPattern:
    """Unperturbed far-field probability density on the screen [1/m]."""
    if not math.isclose(aperture.slit_separation, geometry.slit_separation, rel_tol=1e-12):
        raise ValueError("aperture and geometry disagree on the slit separation")
    r = np.asarray(r, dtype=float)
    _check_resolution(r, geometry)
    pz, L = geometry.momentum, geometry.flight_distance
    values = pz / L * momentum_distribution_after_slits(aperture, pz * r / L)
    meta = {"p_z": pz, "fringe_period": geometry.fringe_period, "slit_separation": geometry.slit_separation,
            "flight_distance": L, "n_slits": aperture.n_slits, "slit_width": aperture.slit_width}
    return IntensityPattern(r, values, meta)


@dataclass(frozen=True)
class VelocityDistribution:
    """Discrete longitudinal momentum distribution: ``momenta`` with probability ``weights``."""

    momenta: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.momenta, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "momenta", p)
        object.__setattr__(self, "weights", w)
        if p.shape != w.shape or p.ndim != 1:
            raise ValueError("momenta and weights must be 1-D of equal length")
        if np.any(p <= 0):
            raise ValueError("longitudinal momenta must be positive")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")

    @classmethod
    def point(cls, momentum: float) -> "VelocityDistribution":
        return cls(np.array([momentum]), np.array([1.0]))

    @classmethod
    def gaussian(cls, mean: float, rel_width: float, n: int = 201, span: float = 4.0):
        """Gaussian of relative rms width ``rel_width`` sampled on ``n`` points within ``span`` sigma."""
        if n == 1 or rel_width == 0:
            return cls.point(mean)
        sigma = rel_width * mean
        p = np.linspace(mean - span * sigma, mean + span * sigma, n)
        p = p[p > 0]
        w = np.exp(-0.5 * ((p - mean) / sigma) ** 2)
        return cls(p, w / w.sum())


def intensity_with_velocity_spread(aperture: ApertureModel, geometry: BeamGeometry,
                                   g: VelocityDistribution, r) -> IntensityPattern:
    """Flux-weighted incoherent sum of fixed-``p_z`` patterns, normalized to unit area.

    Each momentum contributes ``g(p_z) (p_z / m) w_r(r; p_z)``; the result is
    divided by the mean flux so that a point mass reproduces
    :func:`far_field_pattern`.
    """
    flux = g.weights * g.momenta / geometry.mass
    total = np.zeros(np.shape(r))
    for pz, f in zip(g.momenta, flux):
        geom = replace(geometry, velocity=pz / geometry.mass)
        total += f * far_field_pattern(aperture, geom, r).values
    mean_p = float(np.sum(g.weights * g.momenta))
    meta = {"p_z": mean_p, "fringe_period": replace(geometry, velocity=mean_p / geometry.mass).fringe_period,
            "slit_separation": geometry.slit_separation, "flight_distance": geometry.flight_distance,
            "n_slits": aperture.n_slits, "slit_width": aperture.slit_width, "velocity_spread": True}
    return IntensityPattern(np.asarray(r, float), total / flux.sum(), meta)


def pattern_frequencies(pattern: IntensityPattern) -> np.ndarray:
    """Momenta conjugate to the screen grid, ``q = 2 pi hbar k / (n dr)`` in FFT order."""
    return 2 * np.pi * HBAR * np.fft.fftfreq(pattern.r.size, pattern.dr)


def kernel_for_pattern(pattern: IntensityPattern, geometry: BeamGeometry, model: EmissionModel,
                       with_cooling: bool = True, **kwargs) -> DecoherenceKernel:
    """Kernel on exactly the momentum grid conjugate to ``pattern``'s screen grid."""
    n = pattern.r.size
    dq = 2 * np.pi * HBAR / (n * pattern.dr)
    return build_kernel(geometry, model, with_cooling, momentum_grid(dq * (n // 2), n), **kwargs)


def apply_decoherence(pattern: IntensityPattern, kernel: DecoherenceKernel) -> IntensityPattern:
    """Convolve ``pattern`` with the kernel (periodic on the screen window).

    Done in the Fourier domain: each pattern frequency is multiplied by the
    kernel's damping, linearly interpolated in ``|q|`` when the grids are not
    commensurate.
    """
    q = pattern_frequencies(pattern)
    q_max = float(np.max(np.abs(kernel.q)))
    if np.max(np.abs(q)) > q_max * (1 + 1e-9):
        raise GridResolutionError(
            f"kernel momentum grid reaches {q_max:.4g} but the pattern needs {np.max(np.abs(q)):.4g}; "
            "build the kernel with kernel_for_pattern"
        )
    damping = kernel.damping_at(q)
    blurred = np.fft.ifft(np.fft.fft(pattern.values) * damping).real
    meta = dict(pattern.meta, decohered=True)
    return IntensityPattern(pattern.r, blurred, meta)


def extract_visibility(pattern: IntensityPattern, window=None, period: float | None = None,
                       method: str = "fit", degree: int = 4, harmonics: int = 6) -> float:
    """Local fringe visibility of ``pattern`` inside ``window = (r_lo, r_hi)``.

    ``method="fit"`` least-squares fits ``E(r) [1 + V cos(2 pi r / period + phi)]``
    with polynomial envelope (plus ``harmonics`` overtones of the fringe
    frequency) and returns V at the window centre.
    ``method="fourier"`` returns twice the ratio of the Fourier amplitude at
    the fringe frequency to the mean, over a whole number of periods.
    """
    if period is None:
        period = pattern.meta.get("fringe_period")
        if period is None:
            raise ValueError("fringe period unknown; pass period=")
    if window is None:
        window = (-2.0 * period, 2.0 * period)
    lo, hi = window
    if hi - lo < 3 * period * (1 - 1e-9):
        raise ValueError("visibility window must span at least 3 fringe periods")
    mask = (pattern.r >= lo) & (pattern.r <= hi)
    r = pattern.r[mask]
    y = pattern.values[mask]
    k = 2 * np.pi / period
    centre = 0.5 * (lo + hi)
    if method == "fit":
        rho = (r - centre) / (0.5 * (hi - lo))
        poly = np.vander(rho, degree + 1, increasing=True)
        # higher harmonics in the basis keep non-sinusoidal fringes out of the envelope
        per_period = period / float(r[1] - r[0])
        n_harm = max(1, min(harmonics, int(per_period / 2) - 1))
        blocks = [poly]
        for j in range(1, n_harm + 1):
            blocks += [poly * np.cos(j * k * r)[:, None], poly * np.sin(j * k * r)[:, None]]
        coef, *_ = np.linalg.lstsq(np.hstack(blocks), y, rcond=None)
        envelope = coef[0]
        cos_amp = coef[degree + 1]
        sin_amp = coef[2 * degree + 2]
        if envelope <= 0:
            raise VisibilityFitError("fitted envelope is not positive")
        V = math.hypot(cos_amp, sin_amp) / envelope
    elif method == "fourier":
        n_periods = math.floor((hi - lo) / period + 1e-9)
        span = n_periods * period
        sel = np.abs(r - centre) <= 0.5 * span
        r, y = r[sel], y[sel]
        # trapezoid weights over the whole-period window
        w = np.ones_like(r)
        w[0] = w[-1] = 0.5
        mean = np.sum(w * y)
        amp = abs(np.sum(w * y * np.exp(-1j * k * r)))
        if mean <= 0:
            raise VisibilityFitError("pattern has no intensity in the window")
        V = 2 * amp / mean
    else:
        raise ValueError(f"unknown method {method!r}")
    if not -0.05 <= V <= 1.05:
        raise VisibilityFitError(f"extracted visibility {V:.4g} outside [-0.05, 1.05]")
    return min(max(V, 0.0), 1.0)
