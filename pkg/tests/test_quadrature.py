import math

import numpy as np
import pytest

from mckn.params import DomainError, MonomialWeight, derive, make_params
from mckn.quadrature import (
    ConvergenceError,
    gauss_jacobi,
    integrate_E,
    integrate_radial_mu_E,
    integrate_S,
    integrate_sphere,
    sphere_rule,
    y_rule,
)
from mckn.special import cosh_profile_integral, sphere_weight_area, z_constant


def jacobi_moment(j, beta_left, beta_right):
    """int t^j (1-t)^bR (1+t)^bL dt via Beta integrals (binomial in 1+t).

    The alternating sum cancels catastrophically in doubles, so it runs at
    50 digits; the result is an independent oracle for rule exactness.
    """
    import mpmath

    with mpmath.workdps(50):
        bl, br = mpmath.mpf(beta_left), mpmath.mpf(beta_right)
        total = mpmath.mpf(0)
        for k in range(j + 1):
            total += (
                mpmath.binomial(j, k)
                * (-1) ** (j - k)
                * mpmath.mpf(2) ** (br + bl + k + 1)
                * mpmath.beta(bl + k + 1, br + 1)
            )
        return float(total)


@pytest.mark.parametrize("m", [2, 3, 5, 8, 13, 21, 32])
@pytest.mark.parametrize("beta", [-0.5, 0.0, 0.5, 2.0])
def test_jacobi_exactness(m, beta):
    rule = gauss_jacobi(m, beta, beta)
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(rule.weights > 0)
    assert np.all(np.abs(rule.nodes) < 1)
    for j in range(2 * m):
        exact = jacobi_moment(j, beta, beta)
        got = float(np.dot(rule.weights, rule.nodes**j))
        assert got == pytest.approx(exact, rel=1e-12, abs=1e-13)


def test_jacobi_asymmetric_exactness():
    # exponent n/2 - 1 with n = 6 on one side only
    rule = gauss_jacobi(10, 2.0, 0.5)
    for j in range(20):
        exact = jacobi_moment(j, 2.0, 0.5)
        assert float(np.dot(rule.weights, rule.nodes**j)) == pytest.approx(
            exact, rel=1e-12
        )


def test_jacobi_named_examples():
    rule = gauss_jacobi(2, 0.0, 0.0)
    assert float(np.dot(rule.weights, rule.nodes**2)) == pytest.approx(2.0 / 3.0)
    assert rule.measure_tag == "legendre[-1,1]"
    rule = gauss_jacobi(4, 0.5, 0.5)
    assert float(np.sum(rule.weights)) == pytest.approx(math.pi / 2.0, rel=1e-14)
    rule = gauss_jacobi(4, 2.0, 2.0)
    assert float(np.sum(rule.weights)) == pytest.approx(16.0 / 15.0, rel=1e-14)
    assert rule.measure_tag == "jacobi(2,2)"


def test_jacobi_domain_error():
    with pytest.raises(DomainError):
        gauss_jacobi(4, -1.0, 0.0)
    with pytest.raises(DomainError):
        gauss_jacobi(0, 0.0, 0.0)


def test_rules_bit_deterministic():
    r1 = gauss_jacobi(17, 0.75, -0.25)
    r2 = gauss_jacobi(17, 0.75, -0.25)
    assert np.array_equal(r1.nodes, r2.nodes)
    assert np.array_equal(r1.weights, r2.weights)
    p = MonomialWeight(3, (1, 1, 0))
    s1, s2 = sphere_rule(p, 24), sphere_rule(p, 24)
    assert np.array_equal(s1.points, s2.points)
    assert np.array_equal(s1.weights, s2.weights)


# --------------------------------------------------------------------------
# radial measure
# --------------------------------------------------------------------------

def test_radial_profile_matches_closed_form():
    p = make_params(2, (1, 0), 0.0, 0.5)
    dp = derive(p)
    val = integrate_radial_mu_E(
        lambda r: ((1 + r ** (2 * dp.alpha)) / 2) ** (-dp.n), dp, m=32
    )
    assert val == pytest.approx(cosh_profile_integral(dp.alpha, dp.n), rel=1e-12)


def test_radial_indicator_unit_ball():
    dp = derive(make_params(3, (0, 0, 0), 0.0, 0.0))
    val = integrate_radial_mu_E(lambda r: np.ones_like(r), dp, m=32, support=(0.0, 1.0))
    assert val == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_radial_decaying_tail():
    # r^{-2 alpha n} on (1, inf) integrates to 1/(alpha n) against r^{alpha n - 1}
    p = make_params(2, (1, 0), 0.0, 0.5)
    dp = derive(p)
    val = integrate_radial_mu_E(
        lambda r: r ** (-2 * dp.alpha * dp.n), dp, m=32, support=(1.0, math.inf)
    )
    assert val == pytest.approx(1.0 / (dp.alpha * dp.n), rel=1e-11)


def test_radial_nonconvergence_error():
    dp = derive(make_params(3, (0, 0, 0), 0.0, 0.0))
    # a jump inside the integration window defeats the doubling certificate
    with pytest.raises(ConvergenceError):
        integrate_radial_mu_E(
            lambda r: (r < 1.0).astype(float), dp, m=8, m_max=64
        )


# --------------------------------------------------------------------------
# sphere rules
# --------------------------------------------------------------------------

@pytest.mark.parametrize(
    "d,A",
    [(2, (1, 0)), (2, (2, 0)), (2, (0, 0)), (3, (0, 0, 0)), (3, (1, 0, 0)),
     (3, (1, 1, 0)), (3, (1.5, 0.5, 2.0))],
)
def test_sphere_rule_invariants(d, A):
    w = MonomialWeight(d, A)
    rule = sphere_rule(w, 32)
    norms = np.linalg.norm(rule.points, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-14)
    assert np.all(rule.weights > 0)
    for i in w.charged:
        assert np.all(rule.points[:, i] > 0)
    area = float(np.sum(rule.weights))
    assert area == pytest.approx(sphere_weight_area(w), rel=1e-10)


def test_sphere_moment_examples():
    w = MonomialWeight(3, (0, 0, 0))
    val = integrate_sphere(lambda th: th[2] ** 2, w, m=24)
    assert val == pytest.approx(4 * math.pi / 3, rel=1e-12)
    w = MonomialWeight(2, (1, 0))
    val = integrate_sphere(lambda th: th[0], w, m=24)
    assert val == pytest.approx(math.pi / 2, rel=1e-12)


def test_sphere_dimension_error():
    with pytest.raises(DomainError):
        sphere_rule(MonomialWeight(4, (1, 0, 0, 0)), 16)


def test_sphere_shifted_rule():
    # moving one power of theta_1 from measure to integrand is exact
    w = MonomialWeight(2, (2, 0))
    direct = integrate_sphere(lambda th: th[0] ** 2, w, m=32)
    shifted = integrate_sphere(lambda th: th[0] ** 3, w, m=32, shift_axis=0)
    assert direct == pytest.approx(shifted, rel=1e-12)


# --------------------------------------------------------------------------
# measure on S
# --------------------------------------------------------------------------

def test_integrate_S_total_and_moments():
    p = make_params(2, (1, 0), 0.0, 0.5)
    dp = derive(p)
    Z = z_constant(p, dp)
    assert integrate_S(lambda y, th: 1.0, dp, p.weight, m=24) == pytest.approx(
        Z, rel=1e-11
    )
    assert abs(integrate_S(lambda y, th: y, dp, p.weight, m=24)) < 1e-12
    assert integrate_S(lambda y, th: y**2, dp, p.weight, m=24) == pytest.approx(
        Z / (dp.n + 1.0), rel=1e-11
    )


def test_y_rule_moments():
    dp = derive(make_params(2, (1, 0), 0.0, 0.5))
    y, w = y_rule(dp, 24)
    base = math.sqrt(math.pi) * math.exp(
        math.lgamma(dp.n / 2) - math.lgamma((dp.n + 1) / 2)
    ) / dp.alpha
    assert float(np.sum(w)) == pytest.approx(base, rel=1e-13)
    assert float(np.dot(w, y**2)) == pytest.approx(base / (dp.n + 1), rel=1e-12)


def test_integrate_E_tensor():
    # full measure of the unit ball on E: area * 1/(alpha n)
    p = make_params(2, (1, 0), 0.0, 0.5)
    dp = derive(p)
    val = integrate_E(lambda r, th: 1.0, dp, p.weight, m=24, r_support=(0.0, 1.0))
    expect = sphere_weight_area(p.weight) / (dp.alpha * dp.n)
    assert val == pytest.approx(expect, rel=1e-11)
