import math

import numpy as np
import pytest

from mckn.params import DomainError, MonomialWeight, derive, make_params
from mckn.quadrature import integrate_radial_mu_E, integrate_S
from mckn.special import (
    OptimalityWarning,
    closed_form_constants,
    cosh_profile_integral,
    log_gamma,
    optimal_constant,
    sphere_weight_area,
    z_constant,
)


def test_log_gamma_values():
    assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-15)
    assert log_gamma(2.5) == pytest.approx(math.log(3 * math.sqrt(math.pi) / 4), rel=1e-15)
    assert log_gamma(6.0) == pytest.approx(math.log(120.0), rel=1e-15)


def test_log_gamma_accuracy_range():
    # exp(log_gamma) vs Gamma through the recursion Gamma(x+1) = x Gamma(x)
    for x in np.linspace(0.5, 50.0, 250):
        lg = log_gamma(x + 1.0) - log_gamma(x)
        assert abs(math.exp(lg) / x - 1.0) < 1e-13


def test_log_gamma_domain():
    with pytest.raises(DomainError):
        log_gamma(0.0)
    with pytest.raises(DomainError):
        log_gamma(-1.0)


def test_sphere_weight_area_values():
    assert sphere_weight_area(MonomialWeight(3, (0, 0, 0))) == pytest.approx(
        4 * math.pi, rel=1e-14
    )
    assert sphere_weight_area(MonomialWeight(2, (1, 0))) == pytest.approx(2.0, rel=1e-14)
    assert sphere_weight_area(MonomialWeight(2, (0, 0))) == pytest.approx(
        2 * math.pi, rel=1e-14
    )


def test_sphere_area_matches_round_sphere():
    for d in (2, 3, 4, 5):
        exact = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
        assert sphere_weight_area(MonomialWeight(d, (0,) * d)) == pytest.approx(
            exact, rel=1e-13
        )


def test_sphere_area_permutation_invariance():
    w1 = MonomialWeight(3, (1.5, 0.5, 0.0))
    w2 = MonomialWeight(3, (0.5, 0.0, 1.5))
    assert sphere_weight_area(w1) == pytest.approx(sphere_weight_area(w2), rel=1e-15)


def test_cosh_profile_values():
    # int sech^2 = 2 via the tanh antiderivative
    assert cosh_profile_integral(1.0, 2.0) == pytest.approx(2.0, rel=1e-14)
    assert cosh_profile_integral(2.0, 2.0) == pytest.approx(1.0, rel=1e-14)
    assert cosh_profile_integral(1.0, 4.0) == pytest.approx(4.0 / 3.0, rel=1e-14)


def test_cosh_profile_quadrature_oracle():
    # midpoint rule on the rapidly decaying integrand as an independent check
    for alpha, n in [(1.0, 4.0), (0.25, 6.0), (2.0, 3.0)]:
        u = np.linspace(-40.0 / alpha, 40.0 / alpha, 40001)
        val = np.trapezoid(np.cosh(alpha * u) ** (-n), u)
        assert cosh_profile_integral(alpha, n) == pytest.approx(val, rel=1e-10)


def test_cosh_profile_domain():
    with pytest.raises(DomainError):
        cosh_profile_integral(0.0, 3.0)
    with pytest.raises(DomainError):
        cosh_profile_integral(1.0, -1.0)


def test_z_classical():
    p = make_params(3, (0, 0, 0), 0.0, 0.0)
    dp = derive(p)
    assert z_constant(p, dp) == pytest.approx(2 * math.pi**2, rel=1e-13)
    # independent oracle: radial quadrature of the profile times the area
    rad = integrate_radial_mu_E(
        lambda r: ((1 + r**2) / 2) ** (-3.0), dp, m=48
    )
    assert 4 * math.pi * rad == pytest.approx(2 * math.pi**2, rel=1e-12)


def test_z_charged_case():
    p = make_params(2, (1, 0), 0.0, 0.5)
    dp = derive(p)
    assert z_constant(p, dp) == pytest.approx(128.0 / 15.0, rel=1e-13)


def test_z_alpha_scaling():
    # Z scales as 1/alpha at fixed sphere factor and n
    p = make_params(2, (1, 0), 0.0, 0.5)
    dp = derive(p)
    z = z_constant(p, dp)
    assert z * dp.alpha == pytest.approx(
        sphere_weight_area(p.weight) * cosh_profile_integral(1.0, dp.n), rel=1e-13
    )


@pytest.mark.parametrize(
    "d,A,a,b",
    [
        (3, (0, 0, 0), 0.0, 0.0),
        (2, (1, 0), 0.0, 0.5),
        (2, (2, 0), 0.5, 5.0 / 6.0),
        (3, (1, 0, 0), 0.0, 0.3),
        (3, (1, 1, 0), 0.2, 0.6),
    ],
)
def test_z_matches_full_quadrature(d, A, a, b):
    p = make_params(d, A, a, b)
    dp = derive(p)
    z_quad = integrate_S(lambda y, th: 1.0, dp, p.weight, m=32)
    assert z_quad == pytest.approx(z_constant(p, dp), rel=1e-10)


def test_optimal_constant_classical():
    p = make_params(3, (0, 0, 0), 0.0, 0.0)
    dp = derive(p)
    assert optimal_constant(p, dp) == pytest.approx(
        4.0 / (3.0 * (2 * math.pi**2) ** (2.0 / 3.0)), rel=1e-14
    )


def test_optimal_constant_charged():
    p = make_params(2, (1, 0), 0.0, 0.5)
    dp = derive(p)
    expect = 4.0 / (0.0625 * 6 * 4 * (128.0 / 15.0) ** (1.0 / 3.0))
    assert optimal_constant(p, dp) == pytest.approx(expect, rel=1e-13)


def test_optimal_constant_decreasing_in_z():
    # same (alpha, n) with different Z: larger Z gives the smaller constant
    p1 = make_params(2, (1, 0), 0.0, 0.5)
    p2 = make_params(2, (2, 0), 0.5, 0.5 + 1.0 / 3.0)
    dp1, dp2 = derive(p1), derive(p2)
    assert dp1.alpha == pytest.approx(dp2.alpha) and dp1.n == pytest.approx(dp2.n)
    z1, z2 = z_constant(p1, dp1), z_constant(p2, dp2)
    c1, c2 = optimal_constant(p1, dp1), optimal_constant(p2, dp2)
    assert (z1 - z2) * (c1 - c2) < 0.0


def test_breaking_regime_warns():
    p = make_params(2, (1, 0), -0.5, -0.5)
    dp = derive(p)
    with pytest.warns(OptimalityWarning):
        optimal_constant(p, dp)


def test_closed_form_bundle():
    p = make_params(2, (1, 0), 0.0, 0.5)
    dp = derive(p)
    c = closed_form_constants(p, dp)
    assert c.Z == pytest.approx(c.sphere_area * c.profile_integral, rel=1e-15)
    assert c.sphere_area > 0 and c.profile_integral > 0 and c.C_opt > 0
