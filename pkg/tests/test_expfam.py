"""Quadrature-backed checks of the four activation/prior families."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from pbn import expfam as ef
from pbn.errors import DomainError, ParameterError, RangeError

SPECS = [ef.GAUSSIAN, ef.TRUNC_GAUSSIAN, ef.EXPONENTIAL, ef.TRUNC_EXPONENTIAL]


def alpha_grid(spec, n=9):
    if spec.family is ef.Family.EXPONENTIAL:
        return np.linspace(-8.0, 0.45, n)
    return np.linspace(-6.0, 6.0, n)


def quad_moments(spec, alpha):
    """Mean and variance of p(.; alpha) by adaptive quadrature."""
    if spec.domain is ef.DomainKind.REALS:
        lo, hi = -np.inf, np.inf
    elif spec.domain is ef.DomainKind.POSITIVE:
        lo, hi = 0.0, np.inf
    else:
        lo, hi = 0.0, 1.0

    def f(x, k):
        return x ** k * math.exp(ef.log_density(spec, alpha, x))

    z = quad(f, lo, hi, args=(0,), limit=200)[0]
    m1 = quad(f, lo, hi, args=(1,), limit=200)[0]
    m2 = quad(f, lo, hi, args=(2,), limit=200)[0]
    return z, m1, m2 - m1 * m1


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family.value)
def test_density_normalizes_and_moments_match(spec):
    for a in alpha_grid(spec):
        z, mean, var = quad_moments(spec, a)
        assert abs(z - 1.0) <= 1e-8
        assert abs(ef.activation(spec, a) - mean) <= 1e-8
        assert abs(ef.activation_deriv(spec, a) - var) <= 1e-6


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family.value)
def test_cgf_derivatives(spec):
    h = 1e-5
    for a in alpha_grid(spec):
        if spec.family is ef.Family.EXPONENTIAL and a + h >= ef.EXP_ALPHA_MAX:
            continue
        assert ef.cgf(spec, 0.0) == pytest.approx(0.0, abs=1e-14)
        kp = (ef.cgf(spec, a + h) - ef.cgf(spec, a - h)) / (2 * h)
        lam = ef.activation(spec, a)
        assert abs(kp - lam) <= 1e-6 * max(1.0, abs(lam))
        lp = (ef.activation(spec, a + h) - ef.activation(spec, a - h)) / (2 * h)
        assert abs(lp - ef.activation_deriv(spec, a)) <= 1e-6 * max(1.0, abs(lp))
        l2 = (ef.activation_deriv(spec, a + h)
              - ef.activation_deriv(spec, a - h)) / (2 * h)
        assert abs(l2 - ef.activation_deriv2(spec, a)) <= 1e-5 * max(1.0, abs(l2))


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.family.value)
def test_activation_strictly_increasing(spec):
    grid = alpha_grid(spec, 41)
    lam = np.array([ef.activation(spec, a) for a in grid])
    assert np.all(np.diff(lam) > 0)
    for a in grid:
        assert ef.activation(spec, a + 1e-3) > ef.activation(spec, a)


def test_known_values():
    assert ef.log_density(ef.GAUSSIAN, 0.0, 0.0) == pytest.approx(
        -0.5 * math.log(2 * math.pi))
    assert ef.log_density(ef.EXPONENTIAL, 0.0, 2.0) == pytest.approx(
        math.log(0.5) - 1.0)
    assert ef.log_density(ef.TRUNC_EXPONENTIAL, 1.0, 1.0) == pytest.approx(
        math.log(1.0 / (math.e - 1.0)) + 1.0)
    assert ef.activation(ef.GAUSSIAN, 1.7) == 1.7
    assert ef.activation(ef.TRUNC_EXPONENTIAL, 1e-9) == pytest.approx(0.5)
    assert ef.activation(ef.TRUNC_GAUSSIAN, 0.0) == pytest.approx(
        math.sqrt(2.0 / math.pi))
    assert ef.activation_deriv(ef.GAUSSIAN, -3.2) == 1.0
    assert ef.activation_deriv(ef.TRUNC_EXPONENTIAL, 0.0) == pytest.approx(1 / 12)
    assert ef.activation_deriv(ef.EXPONENTIAL, 0.0) == pytest.approx(4.0)
    assert ef.cgf(ef.GAUSSIAN, 0.7) == pytest.approx(0.245)
    assert ef.cgf(ef.TRUNC_EXPONENTIAL, 1.0) == pytest.approx(math.log(math.e - 1))
    assert ef.activation_inverse(ef.GAUSSIAN, -2.3) == -2.3
    assert ef.activation_inverse(ef.TRUNC_EXPONENTIAL, 0.5) == pytest.approx(0.0, abs=1e-9)
    assert ef.activation_inverse(ef.EXPONENTIAL, 2.0) == pytest.approx(0.0)


def test_trunc_exponential_cgf_quadrature():
    got = ef.cgf(ef.TRUNC_EXPONENTIAL, 1.0)
    want = math.log(quad(lambda x: math.exp(1.0 * x), 0.0, 1.0)[0])
    assert got == pytest.approx(want, abs=1e-10)


def test_deep_negative_trunc_gaussian_is_stable():
    # the hazard branch must neither overflow nor lose the mean entirely
    for a in [-8.0, -30.0, -80.0, -300.0, -3000.0]:
        lam = ef.activation(ef.TRUNC_GAUSSIAN, a)
        lamp = ef.activation_deriv(ef.TRUNC_GAUSSIAN, a)
        assert 0 < lam < -1.0 / a * 1.01
        assert 0 < lamp < lam * lam * 1.3
    # cross-check one deep point against the series-free log-space identity
    a, t = -40.0, 40.0
    lam = ef.activation(ef.TRUNC_GAUSSIAN, a)
    ref = 1 / t - 2 / t**3 + 10 / t**5 - 74 / t**7 + 706 / t**9
    assert lam == pytest.approx(ref, rel=1e-11)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SPECS), st.floats(-20.0, 20.0))
def test_inverse_roundtrip(spec, a):
    if spec.family is ef.Family.EXPONENTIAL:
        a = min(a, 0.45)
    y = ef.activation(spec, a)
    back = ef.activation_inverse(spec, y)
    assert abs(ef.activation(spec, back) - y) <= 1e-10
    assert back == pytest.approx(a, abs=2e-7)


def test_errors():
    with pytest.raises(DomainError):
        ef.log_density(ef.TRUNC_EXPONENTIAL, 0.3, 1.5)
    with pytest.raises(DomainError):
        ef.log_density(ef.TRUNC_GAUSSIAN, 0.3, -0.1)
    with pytest.raises(ParameterError):
        ef.activation(ef.EXPONENTIAL, 0.5)
    with pytest.raises(ParameterError):
        ef.activation(ef.GAUSSIAN, np.nan)
    with pytest.raises(RangeError):
        ef.activation_inverse(ef.TRUNC_GAUSSIAN, -0.5)
    with pytest.raises(RangeError):
        ef.activation_inverse(ef.TRUNC_EXPONENTIAL, 1.0)
    with pytest.raises(ParameterError):
        ef.ExpFamilySpec(ef.Family.GAUSSIAN, beta=0.25)


def test_sampling_support_and_means():
    rng = np.random.default_rng(7)
    n = 200_000
    for spec, a in [(ef.GAUSSIAN, 3.0), (ef.TRUNC_GAUSSIAN, -1.5),
                    (ef.EXPONENTIAL, 0.1), (ef.TRUNC_EXPONENTIAL, -2.0)]:
        x = ef.sample(spec, a, rng, size=n)
        lam = ef.activation(spec, a)
        sd = math.sqrt(ef.activation_deriv(spec, a) / n)
        assert abs(x.mean() - lam) < 4 * sd
        assert spec.domain.contains(x)
    assert np.all(ef.sample(ef.TRUNC_EXPONENTIAL, np.zeros(1000), rng) <= 1.0)
