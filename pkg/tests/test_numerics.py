import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sint
from scipy.special import sici

from decohere.numerics import (
    OdeError,
    QuadratureError,
    QuadratureSpec,
    RootBracket,
    RootFindingError,
    find_root,
    integrate,
    integrate_ode,
    one_minus_si_ratio,
    one_minus_sinc,
    sinc,
    sine_integral,
)


class TestQuadratureSpec:
    def test_defaults(self):
        spec = QuadratureSpec()
        assert spec.rel_tol == 1e-9 and spec.max_subdivisions == 500

    @pytest.mark.parametrize("kwargs", [dict(rel_tol=0, abs_tol=0), dict(rel_tol=-1), dict(max_subdivisions=0)])
    def test_rejects_bad(self, kwargs):
        with pytest.raises(ValueError):
            QuadratureSpec(**kwargs)

    def test_tighter(self):
        assert QuadratureSpec(1e-6, 1e-10).tighter(10).rel_tol == pytest.approx(1e-7)


class TestIntegrate:
    def test_polynomial_exact(self):
        assert integrate(lambda x: 3 * x**2, 0.0, 2.0) == pytest.approx(8.0, rel=1e-14)

    def test_planck_moment(self):
        # int_0^inf u^3 / (e^u - 1) du = pi^4 / 15
        def planck(u):
            with np.errstate(over="ignore"):
                return u**3 / np.expm1(np.maximum(u, 1e-300))

        val = integrate(planck, 0.0, math.inf, QuadratureSpec(1e-12, 0.0, 500))
        assert val == pytest.approx(math.pi**4 / 15, rel=1e-11)

    def test_gamma_function_half_line(self):
        for n in range(5):
            val = integrate(lambda u: u**n * np.exp(-u), 0.0, math.inf, QuadratureSpec(1e-12, 0.0))
            assert val == pytest.approx(math.factorial(n), rel=1e-11)

    def test_kink_with_break_point(self):
        f = lambda x: np.abs(x - 0.3)
        assert integrate(f, 0.0, 1.0, points=(0.3,)) == pytest.approx(0.29, rel=1e-13)

    def test_reversed_limits(self):
        assert integrate(np.cos, 1.0, 0.0) == pytest.approx(-math.sin(1.0), rel=1e-13)

    def test_empty_interval(self):
        assert integrate(np.exp, 2.0, 2.0) == 0.0

    def test_nonfinite_reports_abscissa(self):
        with pytest.raises(QuadratureError) as err, np.errstate(divide="ignore"):
            integrate(lambda x: 1.0 / (x - 0.5), 0.0, 1.0)
        assert err.value.abscissa is not None

    def test_divergent_reports_estimate(self):
        with pytest.raises(QuadratureError) as err:
            integrate(lambda x: 1.0 / np.sqrt(np.abs(x)) ** 2.5, 1e-300, 1.0, QuadratureSpec(1e-10, 0.0, 50))
        assert err.value.error > 0

    def test_oscillatory_against_scipy(self):
        f = lambda x: np.sin(40 * x) * np.exp(-x)
        ref, _ = sint.quad(lambda x: math.sin(40 * x) * math.exp(-x), 0, 10, limit=500, epsabs=0, epsrel=1e-12)
        assert integrate(f, 0.0, 10.0, QuadratureSpec(1e-11, 0.0)) == pytest.approx(ref, rel=1e-10)

    @given(st.floats(0.1, 10.0), st.floats(0.1, 5.0))
    def test_exponential_family(self, a, b):
        # int_0^b a e^{-a x} dx = 1 - e^{-a b}
        val = integrate(lambda x: a * np.exp(-a * x), 0.0, b)
        assert val == pytest.approx(-math.expm1(-a * b), rel=1e-9)


class TestSinc:
    def test_zero(self):
        assert sinc(0.0) == 1.0
        assert one_minus_sinc(0.0) == 0.0

    @given(st.floats(-50, 50))
    def test_matches_definition(self, x):
        ref = 1.0 if x == 0 else math.sin(x) / x
        assert sinc(x) == pytest.approx(ref, rel=1e-14, abs=1e-16)

    @given(st.floats(1e-8, 0.5))
    def test_one_minus_sinc_small_argument(self, x):
        # series 1 - sinc = x^2/6 - x^4/120 + x^6/5040 - ...
        ref = x * x / 6 - x**4 / 120 + x**6 / 5040 - x**8 / 362880 + x**10 / 39916800
        assert one_minus_sinc(x) == pytest.approx(ref, rel=1e-13)

    def test_vectorized_shape(self):
        assert sinc(np.zeros((2, 3))).shape == (2, 3)


class TestSineIntegral:
    def test_reference_values(self):
        # Si(pi) (Wilbraham-Gibbs constant) and Si(inf) = pi/2
        assert sine_integral(math.pi) == pytest.approx(1.8519370519824662, rel=1e-14)
        assert sine_integral(1e8) == pytest.approx(math.pi / 2, rel=1e-8)

    def test_against_scipy_across_split(self):
        x = np.concatenate([np.geomspace(1e-6, 100, 400), [3.999999, 4.0, 4.000001, 16.0]])
        assert np.max(np.abs(sine_integral(x) - sici(x)[0])) < 5e-15

    def test_small_and_limit(self):
        assert sine_integral(0.0) == 0.0
        assert sine_integral(1.0) == pytest.approx(0.9460830704, abs=1e-10)
        assert abs(sine_integral(1e6) - math.pi / 2) < 1e-5

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            sine_integral(-1.0)

    @given(st.floats(0, 1e4))
    def test_bounded_by_gibbs_value(self, x):
        assert 0 <= sine_integral(x) <= 1.8519370519824662 + 1e-15

    def test_one_minus_ratio_small(self):
        # 1 - Si(y)/y = y^2/18 - y^4/600 + ...
        y = 1e-3
        assert one_minus_si_ratio(y) == pytest.approx(y * y / 18 - y**4 / 600, rel=1e-12)

    @given(st.floats(1e-3, 200))
    def test_one_minus_ratio_bounds(self, y):
        v = one_minus_si_ratio(y)
        assert 0 < v < 1.2
        assert v == pytest.approx(1 - sici(y)[0] / y, rel=1e-10, abs=1e-15)


class TestRootFinding:
    def test_sqrt2(self):
        assert find_root(lambda x: x * x - 2, (0.0, 2.0)) == pytest.approx(math.sqrt(2), rel=1e-13)

    def test_same_sign_bracket(self):
        with pytest.raises(RootFindingError):
            find_root(lambda x: x * x + 1, (0.0, 2.0))

    def test_bad_bracket(self):
        with pytest.raises(ValueError):
            RootBracket(1.0, 1.0)

    def test_endpoint_root(self):
        assert find_root(lambda x: x - 1.0, RootBracket(1.0, 3.0)) == 1.0


class TestOde:
    def test_exponential_decay(self):
        sol = integrate_ode(lambda t, y: -2.0 * y, 1.0, (0.0, 3.0), QuadratureSpec(1e-12, 1e-14))
        t = np.linspace(0, 3, 7)
        assert np.allclose(sol(t), np.exp(-2 * t), rtol=1e-10)

    def test_cubic_cooling_law(self):
        # dT/dt = -k T^4 has T = T0 (1 + 3 k T0^3 t)^(-1/3)
        k, T0 = 1e-9, 1000.0
        sol = integrate_ode(lambda t, y: -k * y**4, T0, (0.0, 2.0), QuadratureSpec(1e-11, 1e-10))
        assert sol(2.0) == pytest.approx(T0 * (1 + 3 * k * T0**3 * 2.0) ** (-1 / 3), rel=1e-9)

    def test_zero_span(self):
        assert integrate_ode(lambda t, y: y, 2.0, (1.0, 1.0))(1.0) == 2.0

    def test_failure_raises(self):
        # blows up in finite time at t = 1
        with pytest.raises(OdeError):
            integrate_ode(lambda t, y: y * y, 1.0, (0.0, 2.0))

    def test_nonfinite_initial(self):
        with pytest.raises(ValueError):
            integrate_ode(lambda t, y: y, math.nan, (0.0, 1.0))
