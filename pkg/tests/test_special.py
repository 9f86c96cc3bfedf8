import math

import numpy as np
import pytest

from fhnet.common import NumericalError
from fhnet.special import QuadratureSpec, erf, gauss_2f1, log_gamma, simpson


def series_2f1(a, b, c, x, max_terms=200000):
    """Independent oracle: power series after the Pfaff transform.

    2F1([a,b];c;x) = (1-x)^(-a) 2F1([a, c-b]; c; x/(x-1)), whose argument
    lies in [0, 1) for x <= 0, so the plain series converges.
    """
    if x == 0.0:
        return 1.0
    w = x / (x - 1.0)
    term = 1.0
    total = 1.0
    for n in range(max_terms):
        term *= (a + n) * (c - b + n) / ((c + n) * (n + 1.0)) * w
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
    else:
        raise RuntimeError("oracle series did not converge")
    return (1.0 - x) ** (-a) * total


def series_erf(x, max_terms=80):
    term = x
    total = x
    for n in range(1, max_terms):
        term *= -x * x / n
        total += term / (2 * n + 1)
    return 2.0 / math.sqrt(math.pi) * total


class TestSimpson:
    def test_exact_for_cubics(self):
        spec = QuadratureSpec(panels=2)
        assert simpson(lambda x: x ** 2, 0.0, 1.0, spec) == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert simpson(lambda x: x ** 3 - 2 * x, 0.0, 2.0, spec) == pytest.approx(0.0, abs=1e-13)

    def test_exponential(self):
        assert simpson(np.exp, 0.0, 1.0) == pytest.approx(math.e - 1.0, abs=1e-9)

    def test_semi_infinite_unit_mass(self):
        spec = QuadratureSpec(panels=64, transform="semi_infinite", tol=1e-10)
        assert simpson(lambda x: np.exp(-x), 0.0, spec=spec) == pytest.approx(1.0, abs=1e-8)

    def test_semi_infinite_shifted(self):
        spec = QuadratureSpec(panels=64, transform="semi_infinite", tol=1e-10)
        assert simpson(lambda x: np.exp(-x), 2.0, spec=spec) == pytest.approx(math.exp(-2.0), abs=1e-8)

    def test_nonconvergence_raises_with_estimate(self):
        rng = np.random.default_rng(0)

        def noisy(x):
            return np.asarray(x) + rng.standard_normal(np.shape(x))

        with pytest.raises(NumericalError) as err:
            simpson(noisy, 0.0, 1.0, QuadratureSpec(panels=4, tol=1e-15))
        assert err.value.last_estimate is not None

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(panels=3)
        with pytest.raises(ValueError):
            QuadratureSpec(panels=-2)
        with pytest.raises(ValueError):
            QuadratureSpec(transform="laplace")
        with pytest.raises(ValueError):
            QuadratureSpec(tol=0.0)
        with pytest.raises(ValueError):
            simpson(np.exp, 1.0, 0.0)


class TestGauss2F1:
    def test_unit_at_zero(self):
        assert gauss_2f1(2.5, 1.7, 2.7, 0.0) == 1.0
        assert gauss_2f1(0.3, 0.6, 5.0, 0.0) == 1.0

    def test_log_identity(self):
        # 2F1([1,1];2;x) = -ln(1-x)/x
        assert gauss_2f1(1.0, 1.0, 2.0, -1.0) == pytest.approx(math.log(2.0), rel=1e-9)
        assert gauss_2f1(1.0, 1.0, 2.0, -4.0) == pytest.approx(math.log(5.0) / 4.0, rel=1e-9)

    def test_against_series_oracle_over_model_ranges(self):
        # parameter combinations produced by the averaged-outage closed form
        rng = np.random.default_rng(42)
        for _ in range(120):
            alpha = rng.uniform(2.5, 4.0)
            m = float(rng.integers(1, 6))
            l = float(rng.integers(0, 5))
            b = m + 2.0 / alpha
            y = rng.uniform(1e-3, 64.0)
            beta0 = rng.uniform(0.05, 50.0)
            x = -m * y / beta0
            mine = gauss_2f1(m + l, b, b + 1.0, x)
            ref = series_2f1(m + l, b, b + 1.0, x)
            assert mine == pytest.approx(ref, rel=1e-8)

    def test_half_integer_shape(self):
        # b < 1 exercises the left-endpoint substitution
        b = 0.5 + 2.0 / 3.0
        assert gauss_2f1(0.5, 0.5, 1.5, -2.0) == pytest.approx(series_2f1(0.5, 0.5, 1.5, -2.0), rel=1e-9)
        assert gauss_2f1(2.5, b, b + 1.0, -10.0) == pytest.approx(series_2f1(2.5, b, b + 1.0, -10.0), rel=1e-9)

    def test_spec_listed_value(self):
        got = gauss_2f1(2.5, 1.6667, 2.6667, -10.0)
        assert got == pytest.approx(series_2f1(2.5, 1.6667, 2.6667, -10.0), rel=1e-9)

    def test_domain_rejection(self):
        with pytest.raises(ValueError):
            gauss_2f1(1.0, 2.0, 1.5, -1.0)  # c <= b
        with pytest.raises(ValueError):
            gauss_2f1(1.0, -0.5, 1.5, -1.0)  # b <= 0
        with pytest.raises(ValueError):
            gauss_2f1(1.0, 1.0, 2.0, 0.5)  # x > 0


class TestScalarKernels:
    def test_erf_basics(self):
        assert erf(0.0) == 0.0
        assert erf(1.0) == pytest.approx(series_erf(1.0), abs=1e-12)
        assert erf(1.0) == pytest.approx(0.8427007929497149, abs=1e-12)
        for x in (0.3, 1.7, 2.5):
            assert erf(-x) == -erf(x)

    def test_log_gamma(self):
        assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-12)
        for x in (0.7, 1.3, 4.2):
            assert log_gamma(x + 1.0) == pytest.approx(log_gamma(x) + math.log(x), rel=1e-12)
        with pytest.raises(ValueError):
            log_gamma(0.0)
        with pytest.raises(ValueError):
            log_gamma(-1.5)
