"""Numerical primitives: adaptive quadrature, sinc and sine integral, roots, ODEs.

Integrands passed to :func:`integrate` must be vectorized: they receive a
1-D array of abscissae and return an array of the same shape.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _scipy_integrate
from scipy import optimize as _scipy_optimize

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 500

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise ValueError(f"abs_tol must be nonnegative, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}")

    def tighter(self, factor: float = 10.0) -> "QuadratureSpec":
        return QuadratureSpec(self.rel_tol / factor, self.abs_tol / factor, self.max_subdivisions)


DEFAULT_QUADRATURE = QuadratureSpec()


class QuadratureError(ArithmeticError):
    """Quadrature failed; carries the best estimate and its error bound."""

    def __init__(self, message, estimate=math.nan, error=math.inf, abscissa=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.abscissa = abscissa


class RootFindingError(ArithmeticError):
    pass


class OdeError(ArithmeticError):
    """ODE integration failed; ``last_t``/``last_y`` hold the last valid state."""

    def __init__(self, message, last_t=math.nan, last_y=math.nan):
        super().__init__(message)
        self.last_t = last_t
        self.last_y = last_y


# Gauss-Kronrod 21-point rule (QUADPACK qk21), nodes on [-1, 1].
_GK21_NODES = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_GK21_NODES = np.concatenate([_GK21_NODES, -_GK21_NODES[-2::-1]])
_K21_WEIGHTS = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_K21_WEIGHTS = np.concatenate([_K21_WEIGHTS, _K21_WEIGHTS[-2::-1]])
# the 10-point Gauss rule lives on the odd-indexed Kronrod nodes
_G10_WEIGHTS = np.zeros(21)
_G10_WEIGHTS[1::2] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
    0.295524224714752870173892994651338,
    0.269266719309996355091226921569469,
    0.219086362515982043995534934228163,
    0.149451349150580593145776339657697,
    0.066671344308688137593568809893332,
]


def _gk21_panels(f, lo, hi):
    """Apply GK21 to several panels with a single vectorized call of ``f``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = center[:, None] + half[:, None] * _GK21_NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float)
    if y.shape != (x.size,):
        y = np.broadcast_to(y, x.shape).ravel()
    bad = ~np.isfinite(y)
    if bad.any():
        where = float(x.ravel()[np.argmax(bad)])
        raise QuadratureError(f"integrand is not finite at x={where!r}", abscissa=where)
    y = y.reshape(x.shape)
    kronrod = half * (y @ _K21_WEIGHTS)
    gauss = half * (y @ _G10_WEIGHTS)
    mean = kronrod / np.where(half != 0, 2 * half, 1.0)
    resasc = np.abs(half) * (np.abs(y - mean[:, None]) @ _K21_WEIGHTS)
    resabs = np.abs(half) * (np.abs(y) @ _K21_WEIGHTS)
    err = np.abs(kronrod - gauss)
    # QUADPACK error scaling
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where(resasc > 0, scaled, err)
    err = np.maximum(err, 50 * _EPS * resabs)
    return kronrod, err


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    points=(),
) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    ``b`` may be ``+inf``; the half line is mapped to ``[0, 1)`` by
    ``x = a + t / (1 - t)``. ``points`` are interior break points (finite
    ranges only) where ``f`` has kinks.

    Raises
    ------
    QuadratureError
        If the error bound ``max(abs_tol, rel_tol*|I|)`` is not met within
        ``spec.max_subdivisions`` panels, or ``f`` returns a non-finite value.
    """
    a = float(a)
    b = float(b)
    if math.isnan(a) or math.isnan(b):
        raise ValueError("integration limits must not be NaN")
    if a == b:
        return 0.0
    if b < a:
        return -integrate(f, b, a, spec, points)
    if math.isinf(a):
        raise ValueError("lower limit must be finite")

    if math.isinf(b):
        g = f

        def f(t):
            t = np.asarray(t, dtype=float)
            s = 1.0 - t
            return g(a + t / s) / (s * s)

        edges = [0.0, 1.0]
    else:
        edges = [a] + sorted(p for p in points if a < p < b) + [b]

    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    vals, errs = _gk21_panels(f, lo, hi)
    heap = [(-e, l, h, v) for l, h, v, e in zip(lo, hi, vals, errs)]
    heapq.heapify(heap)
    total = float(vals.sum())
    total_err = float(errs.sum())
    n_panels = len(heap)

    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if n_panels >= spec.max_subdivisions:
            raise QuadratureError(
                f"no convergence within {spec.max_subdivisions} subdivisions "
                f"(estimate {total!r}, error bound {total_err!r})",
                estimate=total,
                error=total_err,
            )
        neg_err, l, h, v = heapq.heappop(heap)
        m = 0.5 * (l + h)
        if not (l < m < h):
            raise QuadratureError(
                "panel width underflow", estimate=total, error=total_err, abscissa=m
            )
        pv, pe = _gk21_panels(f, [l, m], [m, h])
        total += float(pv.sum()) - v
        total_err += float(pe.sum()) + neg_err
        heapq.heappush(heap, (-pe[0], l, m, pv[0]))
        heapq.heappush(heap, (-pe[1], m, h, pv[1]))
        n_panels += 1
        if n_panels % 64 == 0:
            # resum to shed accumulated cancellation in the running totals
            total = math.fsum(item[3] for item in heap)
            total_err = math.fsum(-item[0] for item in heap)
    return total


SINC_SERIES_THRESHOLD = 1e-4


def sinc(x):
    """Unnormalized sinc, ``sin(x)/x`` with ``sinc(0) = 1``."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    small = np.abs(x) <= SINC_SERIES_THRESHOLD
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.sin(x) / x
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, direct)
    return out if out.ndim else float(out)


def one_minus_sinc(x):
    """``1 - sinc(x)`` without cancellation for small ``x``."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    small = np.abs(x) < 0.5
    series = x2 * (1 / 6 - x2 * (1 / 120 - x2 * (1 / 5040 - x2 * (
        1 / 362880 - x2 * (1 / 39916800 - x2 / 6227020800)))))
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = 1.0 - np.sin(x) / x
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


_SI_SERIES_MAX = 4.0


def _si_series(x):
    x2 = x * x
    term = x.copy()
    total = x.copy()
    for n in range(1, 40):
        term = term * (-x2) / ((2 * n) * (2 * n + 1))
        total = total + term / (2 * n + 1)
    return total


def _si_continued_fraction(x):
    # Si(x) = pi/2 + Im E1(i x); E1 by modified Lentz on its continued fraction
    b = 1.0 + 1j * x
    c = np.full(x.shape, 1e300, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for i in range(2, 10000):
        a = -float((i - 1) ** 2)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < 1e-16
        if done.all():
            break
    h = h * (np.cos(x) - 1j * np.sin(x))
    return 0.5 * np.pi + h.imag


def sine_integral(x):
    """Sine integral ``Si(x) = int_0^x sin(t)/t dt`` for ``x >= 0``.

    Power series up to x = 4, continued fraction for the exponential
    integral beyond; absolute accuracy about 1e-15 on both branches.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("sine_integral requires x >= 0")
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    low = flat <= _SI_SERIES_MAX
    if low.any():
        out[low] = _si_series(flat[low])
    if (~low).any():
        out[~low] = _si_continued_fraction(flat[~low])
    out = out.reshape(x.shape)
    return out if out.ndim else float(out)


def one_minus_si_ratio(y):
    """``1 - Si(y)/y`` for ``y >= 0``, series below y = 1 to avoid cancellation."""
    y = np.asarray(y, dtype=float)
    flat = np.atleast_1d(y).ravel()
    out = np.empty_like(flat)
    small = flat < 1.0
    if small.any():
        ys = flat[small]
        y2 = ys * ys
        term = np.ones_like(ys)
        total = np.zeros_like(ys)
        for n in range(1, 15):
            term = term * (-y2) / ((2 * n) * (2 * n + 1))
            total = total - term / (2 * n + 1)
        out[small] = total
    if (~small).any():
        yl = flat[~small]
        out[~small] = 1.0 - sine_integral(yl) / yl
    out = out.reshape(y.shape)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")


def find_root(f: Callable[[float], float], bracket, tol: float = 1e-12, rtol: float = 4 * _EPS) -> float:
    """Brent root of ``f`` inside ``bracket`` (a :class:`RootBracket` or pair)."""
    if not isinstance(bracket, RootBracket):
        bracket = RootBracket(*bracket)
    flo, fhi = f(bracket.lo), f(bracket.hi)
    if flo == 0:
        return bracket.lo
    if fhi == 0:
        return bracket.hi
    if np.sign(flo) == np.sign(fhi):
        raise RootFindingError(
            f"invalid bracket [{bracket.lo}, {bracket.hi}]: f has the same sign at both ends "
            f"({flo!r}, {fhi!r})"
        )
    return float(_scipy_optimize.brentq(f, bracket.lo, bracket.hi, xtol=tol, rtol=rtol, maxiter=500))


@dataclass(frozen=True)
class OdeSolution:
    """Sampled solution of a scalar ODE with dense output."""

    t: np.ndarray
    y: np.ndarray
    _dense: object = None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self._dense is None:
            out = np.full(t.shape, self.y[0])
        else:
            t_clip = np.clip(t, self.t[0], self.t[-1])
            out = np.asarray(self._dense(t_clip)).reshape(t.shape)
        return out if out.ndim else float(out)


def integrate_ode(rhs, y0: float, t_span, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> OdeSolution:
    """Integrate the scalar ODE ``dy/dt = rhs(t, y)`` with adaptive DOP853 steps."""
    t0, t1 = map(float, t_span)
    if not math.isfinite(y0):
        raise ValueError(f"initial value must be finite, got {y0}")
    if t1 == t0:
        return OdeSolution(np.array([t0]), np.array([float(y0)]))
    sol = _scipy_integrate.solve_ivp(
        lambda t, y: [rhs(t, y[0])],
        (t0, t1),
        [float(y0)],
        method="DOP853",
        rtol=max(spec.rel_tol, 100 * _EPS),
        atol=spec.abs_tol,
        dense_output=True,
    )
    if sol.status != 0:
        raise OdeError(f"ODE integration failed: {sol.message}", sol.t[-1], sol.y[0, -1])
    return OdeSolution(sol.t, sol.y[0], lambda t: sol.sol(t)[0])
