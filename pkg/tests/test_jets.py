import numpy as np
import pytest

from mckn import jets
from mckn.jets import Jet


def poly(v):
    x, y, z = v
    return 2.0 + x * y - 0.5 * z**3 + x**2 * z - y * y * y + 0.25 * x * y * z


def test_polynomial_jets_exact():
    pt = np.array([0.7, -0.3, 1.2])
    x, y, z = Jet.variables(pt)
    f = poly([x, y, z])
    # analytic derivatives of the polynomial
    xv, yv, zv = pt
    assert f.value == pytest.approx(poly(pt), rel=1e-15)
    grad = np.array([
        yv + 2 * xv * zv + 0.25 * yv * zv,
        xv - 3 * yv**2 + 0.25 * xv * zv,
        -1.5 * zv**2 + xv**2 + 0.25 * xv * yv,
    ])
    np.testing.assert_allclose(f.grad, grad, rtol=1e-14)
    assert f.hess[0, 0] == pytest.approx(2 * zv, rel=1e-14)
    assert f.hess[0, 1] == pytest.approx(1 + 0.25 * zv, rel=1e-14)
    assert f.third[0, 0, 2] == pytest.approx(2.0, rel=1e-14)
    assert f.third[0, 1, 2] == pytest.approx(0.25, rel=1e-14)


def test_symmetry_of_tensors():
    pt = np.array([0.5, 1.5, -0.8])
    x, y, z = Jet.variables(pt)
    f = jets.exp(0.3 * x * y) * (z + 2.0) ** 1.5 + jets.sin(x * z)
    assert np.allclose(f.hess, np.swapaxes(f.hess, 0, 1))
    for perm in [(0, 2, 1), (1, 0, 2), (2, 1, 0)]:
        assert np.allclose(f.third, np.transpose(f.third, perm))


def test_jets_vs_finite_differences():
    pt = np.array([0.6, 0.9])

    def g(v):
        x, y = v
        return jets.exp(x * y * 0.5) + jets.log(2.0 + x) * y**2 + jets.sqrt(1.0 + x * x)

    x, y = Jet.variables(pt)
    f = g([x, y])
    h = 1e-5

    def val(q):
        return g([q[0], q[1]])

    num_grad = np.zeros(2)
    num_hess = np.zeros((2, 2))
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        num_grad[i] = (val(pt + e) - val(pt - e)) / (2 * h)
        num_hess[i, i] = (val(pt + e) - 2 * val(pt) + val(pt - e)) / h**2
    e01 = np.array([h, h])
    e10 = np.array([h, -h])
    num_hess[0, 1] = num_hess[1, 0] = (
        val(pt + e01) - val(pt + e10) - val(pt - e10) + val(pt - e01)
    ) / (4 * h * h)
    np.testing.assert_allclose(f.grad, num_grad, rtol=1e-6)
    np.testing.assert_allclose(f.hess, num_hess, rtol=1e-4)
    # third derivatives against central differences of the Hessian diagonal
    def hess00(q):
        xx, yy = Jet.variables(np.asarray(q, dtype=float))
        return g([xx, yy]).hess[0, 0]

    third000 = (hess00(pt + np.array([h, 0])) - hess00(pt - np.array([h, 0]))) / (2 * h)
    assert f.third[0, 0, 0] == pytest.approx(third000, rel=1e-6)


def test_partial_shifts_order():
    pt = np.array([1.1, 0.4])
    x, y = Jet.variables(pt)
    f = x**3 * y + y**2
    fx = f.partial(0)
    assert fx.order == 2
    assert fx.value == pytest.approx(3 * 1.1**2 * 0.4, rel=1e-14)
    assert fx.grad[0] == pytest.approx(6 * 1.1 * 0.4, rel=1e-14)
    assert fx.hess[0, 0] == pytest.approx(6 * 0.4, rel=1e-14)
    assert fx.partial(1).value == pytest.approx(3 * 1.1**2, rel=1e-14)


def test_batch_jets_match_scalar():
    pts = np.array([[0.3, 0.8, 1.4], [1.2, -0.5, 0.7]])  # (2 coords, 3 batch)
    xb, yb = Jet.variables(pts)
    fb = jets.cos(xb * yb) + xb**2.5
    for k in range(3):
        x, y = Jet.variables(pts[:, k])
        f = jets.cos(x * y) + x**2.5
        assert fb.value[k] == pytest.approx(f.value, rel=1e-15)
        np.testing.assert_allclose(fb.grad[:, k], f.grad, rtol=1e-15)
        np.testing.assert_allclose(fb.hess[:, :, k], f.hess, rtol=1e-15)
        np.testing.assert_allclose(fb.third[:, :, :, k], f.third, rtol=1e-15)


def test_division_and_rsub():
    pt = np.array([2.0])
    (x,) = Jet.variables(pt)
    f = (1.0 - x) / (1.0 + x)
    assert f.value == pytest.approx(-1.0 / 3.0, rel=1e-15)
    assert f.grad[0] == pytest.approx(-2.0 / 9.0, rel=1e-14)


def test_lower_order_variables():
    pt = np.array([0.5, 0.5])
    x, y = Jet.variables(pt, order=1)
    f = x * y + x
    assert f.hess is None and f.order == 1
    assert f.grad[0] == pytest.approx(1.5)
