"""Deterministic quadrature against the singular weighted measures.

Radial integrals over (0, inf) with weight r^{alpha*n - 1} are computed with
the exact substitution y = (r^{2 alpha} - 1)/(r^{2 alpha} + 1), which turns
the measure into (1/alpha) (1 - y^2)^{n/2 - 1} (1 - y)^{-n} dy on (-1, 1);
the endpoint singularities become a single Jacobi weight and the remaining
factor is absorbed into the integrand.  Sphere rules for d = 2, 3 absorb the
monomial weight theta^A into Jacobi weights of the angle parametrization.

All rules are deterministic; integration certifies convergence by doubling
the node count until successive values agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi as _scipy_roots_jacobi


def _roots(m, alpha, beta):
    # scipy's symmetric (Gegenbauer) fast path emits spurious 0/0 warnings
    # from Newton polishing of already-converged nodes; values are fine
    with np.errstate(invalid="ignore", divide="ignore"):
        return _scipy_roots_jacobi(m, alpha, beta)

from .params import DerivedParams, DomainError, MonomialWeight


class ConvergenceError(RuntimeError):
    """Node doubling failed to stabilize the integral."""


# --------------------------------------------------------------------------
# 1D Jacobi rules
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule1D:
    nodes: np.ndarray
    weights: np.ndarray
    beta_left: float   # exponent of (1+t) at t = -1
    beta_right: float  # exponent of (1-t) at t = +1

    @property
    def measure_tag(self) -> str:
        if self.beta_left == 0.0 and self.beta_right == 0.0:
            return "legendre[-1,1]"
        return f"jacobi({self.beta_left:g},{self.beta_right:g})"


def gauss_jacobi(m: int, beta_left: float, beta_right: float) -> QuadratureRule1D:
    """m-node rule, exact to degree 2m-1 against (1-t)^bR (1+t)^bL on [-1,1]."""
    if m < 1:
        raise DomainError(f"need at least one node, got m={m}")
    if beta_left <= -1.0 or beta_right <= -1.0:
        raise DomainError(
            f"Jacobi exponents must exceed -1, got ({beta_left}, {beta_right})"
        )
    x, w = _roots(m, beta_right, beta_left)
    return QuadratureRule1D(nodes=x, weights=w, beta_left=beta_left, beta_right=beta_right)


def _jacobi_segment(m, beta_left, beta_right, lo, hi):
    """Nodes/weights on [lo, hi] subset [-1,1] for the global Jacobi weight.

    The weight factor singular at an endpoint touching +-1 is absorbed into a
    one-sided Jacobi rule; factors smooth on the segment are evaluated.
    """
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    at_left = lo == -1.0
    at_right = hi == 1.0
    if at_left and at_right:
        rule = gauss_jacobi(m, beta_left, beta_right)
        return rule.nodes, rule.weights
    if at_left:
        x, w = _roots(m, 0.0, beta_left)
        t = mid + half * x
        w = w * half ** (beta_left + 1.0) * (1.0 - t) ** beta_right
        return t, w
    if at_right:
        x, w = _roots(m, beta_right, 0.0)
        t = mid + half * x
        w = w * half ** (beta_right + 1.0) * (1.0 + t) ** beta_left
        return t, w
    x, w = _roots(m, 0.0, 0.0)
    t = mid + half * x
    w = w * half * (1.0 - t) ** beta_right * (1.0 + t) ** beta_left
    return t, w


def segmented_jacobi(m, beta_left, beta_right, breaks=None):
    """Piecewise rule on [-1,1]; `breaks` are interior split points."""
    if not breaks:
        rule = gauss_jacobi(m, beta_left, beta_right)
        return rule.nodes, rule.weights
    pts = [-1.0] + sorted(float(b) for b in breaks if -1.0 < b < 1.0) + [1.0]
    xs, ws = [], []
    for lo, hi in zip(pts[:-1], pts[1:]):
        x, w = _jacobi_segment(m, beta_left, beta_right, lo, hi)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


# --------------------------------------------------------------------------
# Radial measure on E
# --------------------------------------------------------------------------

def y_of_r(dp: DerivedParams, r):
    s = np.asarray(r, dtype=float) ** (2.0 * dp.alpha)
    return (s - 1.0) / (s + 1.0)


def r_of_y(dp: DerivedParams, y):
    y = np.asarray(y, dtype=float)
    return ((1.0 + y) / (1.0 - y)) ** (1.0 / (2.0 * dp.alpha))


def _radial_segments(dp: DerivedParams, support):
    r_lo, r_hi = support
    if r_lo < 0.0 or r_hi <= r_lo:
        raise DomainError(f"invalid radial support {support}")
    lo = -1.0 if r_lo == 0.0 else float(y_of_r(dp, r_lo))
    hi = 1.0 if math.isinf(r_hi) else float(y_of_r(dp, r_hi))
    return lo, hi


def integrate_radial_mu_E(
    f,
    dp: DerivedParams,
    m: int = 64,
    support=(0.0, math.inf),
    tol: float = 1e-10,
    m_max: int = 512,
    tail_sing: float = 0.0,
) -> float:
    """int f(r) r^{alpha n - 1} dr over the support (vectorized integrand).

    Note D - 1 - b p = alpha n - 1, so this is the radial factor of mu_E.
    `tail_sing` absorbs an extra (1-y)^{-tail_sing} of the transformed
    integrand into the rule: gradient-type integrands decay 2 alpha powers
    of r slower than the p-integrands and need tail_sing = 1 to stay
    spectral.
    """
    lo, hi = _radial_segments(dp, support)
    beta = dp.n / 2.0 - 1.0
    if beta - tail_sing <= -1.0:
        raise DomainError(f"tail singularity {tail_sing} not integrable for n={dp.n}")

    def eval_at(mm):
        y, w = _jacobi_segment(mm, beta, beta - tail_sing, lo, hi)
        r = r_of_y(dp, y)
        vals = np.asarray(f(r), dtype=float) * (1.0 - y) ** (tail_sing - dp.n)
        return float(np.dot(w, vals)) / dp.alpha

    return _doubling(eval_at, m, tol, m_max, label="radial mu_E")


def _doubling(eval_at, m, tol, m_max, label=""):
    prev = eval_at(m)
    mm = m
    while mm < m_max:
        mm = min(2 * mm, m_max)
        cur = eval_at(mm)
        if abs(cur - prev) <= tol * (1.0 + abs(cur)):
            return cur
        prev = cur
    raise ConvergenceError(
        f"{label}: doubling did not converge to {tol:g} by m={m_max}"
    )


# --------------------------------------------------------------------------
# Monomial sphere rules (d = 2, 3)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereRule:
    points: np.ndarray   # (N, d) unit vectors, charged coordinates positive
    weights: np.ndarray  # (N,), weight exponents absorbed
    exponents: tuple[float, ...]


def _angle_rule(m, lo, hi, e_lo, e_hi, density):
    """Gauss rule in the angle variable for a measure density(phi) dphi.

    The density vanishes like (phi-lo)^{e_lo} and (hi-phi)^{e_hi} at the
    endpoints; a Jacobi rule with those exponents absorbs the vanishing and
    the analytic nonvanishing remainder goes into the weights, so smooth
    integrands of the angle converge spectrally with positive weights.
    """
    x, w = _roots(m, e_hi, e_lo)
    half = 0.5 * (hi - lo)
    phi = 0.5 * (hi + lo) + half * x
    smooth = density(phi) * half / ((1.0 - x) ** e_hi * (1.0 + x) ** e_lo)
    return phi, w * smooth


def _circle_rule(m, e1, e2, pos1, pos2):
    """Rule for int g(phi) |cos|^{e1} |sin|^{e2} dphi on the admissible arc."""
    if pos1 or pos2:
        if pos1 and pos2:
            lo, hi, e_lo, e_hi = 0.0, math.pi / 2.0, e2, e1
        elif pos1:
            lo, hi, e_lo, e_hi = -math.pi / 2.0, math.pi / 2.0, e1, e1
        else:
            lo, hi, e_lo, e_hi = 0.0, math.pi, e2, e2

        def density(phi):
            rho = np.ones_like(phi)
            if e1 != 0.0:
                rho = rho * np.abs(np.cos(phi)) ** e1
            if e2 != 0.0:
                rho = rho * np.abs(np.sin(phi)) ** e2
            return rho

        phi, w = _angle_rule(m, lo, hi, e_lo, e_hi, density)
        return np.cos(phi), np.sin(phi), w
    # full circle, unweighted: midpoint trapezoid (spectral for periodic)
    phi = 2.0 * math.pi * (np.arange(m) + 0.5) / m
    w = np.full(m, 2.0 * math.pi / m)
    return np.cos(phi), np.sin(phi), w


def sphere_rule(weight: MonomialWeight, m: int, shift_axis: int | None = None) -> SphereRule:
    """Quadrature for int f(theta) theta^E dV over the monomial sphere.

    E equals the weight exponents, optionally with E[shift_axis] reduced by
    one (used for the drift integrals, where one power of a charged
    coordinate moves from the measure into the integrand denominator).
    """
    d = weight.d
    if d not in (2, 3):
        raise DomainError(f"deterministic sphere rules support d in {{2,3}}, got d={d}")
    expo = list(weight.A)
    if shift_axis is not None:
        if weight.A[shift_axis] <= 0.0:
            raise DomainError(f"axis {shift_axis} carries no weight to shift")
        expo[shift_axis] -= 1.0
    pos = [Ai > 0.0 for Ai in weight.A]

    if d == 2:
        c, s, w = _circle_rule(m, expo[0], expo[1], pos[0], pos[1])
        pts = np.stack([c, s], axis=1)
        return SphereRule(points=pts, weights=w, exponents=tuple(expo))

    # d = 3: polar angle psi (t = cos psi), then the (theta_1, theta_2) circle
    e12 = expo[0] + expo[1]
    if pos[2]:
        lo, hi, e_lo, e_hi = 0.0, math.pi / 2.0, e12 + 1.0, expo[2]
    else:
        lo, hi, e_lo, e_hi = 0.0, math.pi, e12 + 1.0, e12 + 1.0

    def density(psi):
        rho = np.sin(psi) ** (e12 + 1.0)
        if expo[2] != 0.0:
            rho = rho * np.cos(psi) ** expo[2]
        return rho

    psi, w3 = _angle_rule(m, lo, hi, e_lo, e_hi, density)
    t = np.cos(psi)
    rad = np.sin(psi)
    c, s, wc = _circle_rule(m, expo[0], expo[1], pos[0], pos[1])
    pts = np.empty((t.size * c.size, 3))
    pts[:, 0] = np.outer(rad, c).ravel()
    pts[:, 1] = np.outer(rad, s).ravel()
    pts[:, 2] = np.repeat(t, c.size)
    wts = np.outer(w3, wc).ravel()
    return SphereRule(points=pts, weights=wts, exponents=tuple(expo))


def integrate_sphere(
    f,
    weight: MonomialWeight,
    m: int = 64,
    tol: float = 1e-10,
    m_max: int = 512,
    shift_axis: int | None = None,
) -> float:
    """int f(theta) theta^A dV; f receives the d coordinate arrays."""

    def eval_at(mm):
        rule = sphere_rule(weight, mm, shift_axis=shift_axis)
        vals = np.asarray(f(list(rule.points.T)), dtype=float)
        return float(np.dot(rule.weights, np.broadcast_to(vals, rule.weights.shape)))

    return _doubling(eval_at, m, tol, m_max, label="sphere")


# --------------------------------------------------------------------------
# Measure on S = (-1,1) x sphere
# --------------------------------------------------------------------------

def y_rule(dp: DerivedParams, m: int, shift: float = 0.0, breaks=None):
    """Radial rule for (1-y^2)^{n/2-1+shift} dy / alpha on (-1, 1)."""
    beta = dp.n / 2.0 - 1.0 + shift
    if beta <= -1.0:
        raise DomainError(f"y-weight exponent {beta} not integrable")
    y, w = segmented_jacobi(m, beta, beta, breaks)
    return y, w / dp.alpha


def integrate_S(
    F,
    dp: DerivedParams,
    weight: MonomialWeight,
    m: int = 48,
    y_shift: float = 0.0,
    y_breaks=None,
    tol: float = 1e-10,
    m_max: int = 512,
) -> float:
    """int F(y, theta) (1-y^2)^{n/2-1+shift}/alpha dy dmu_theta.

    F receives (y_array, [theta component arrays]) over the tensor grid.
    """

    def eval_at(mm):
        y, wy = y_rule(dp, mm, shift=y_shift, breaks=y_breaks)
        sph = sphere_rule(weight, mm)
        ns = sph.weights.size
        yy = np.repeat(y, ns)
        comps = [np.tile(sph.points[:, i], y.size) for i in range(weight.d)]
        ww = np.outer(wy, sph.weights).ravel()
        vals = np.asarray(F(yy, comps), dtype=float)
        return float(np.dot(ww, np.broadcast_to(vals, ww.shape)))

    return _doubling(eval_at, m, tol, m_max, label="S")


def integrate_E(
    G,
    dp: DerivedParams,
    weight: MonomialWeight,
    m: int = 48,
    r_support=(0.0, math.inf),
    tol: float = 1e-10,
    m_max: int = 512,
) -> float:
    """int G(r, theta) r^{alpha n - 1} dr dmu_theta (full measure on E)."""
    lo, hi = _radial_segments(dp, r_support)
    beta = dp.n / 2.0 - 1.0

    def eval_at(mm):
        y, wy = _jacobi_segment(mm, beta, beta, lo, hi)
        r = r_of_y(dp, y)
        wy = wy * (1.0 - y) ** (-dp.n) / dp.alpha
        sph = sphere_rule(weight, mm)
        ns = sph.weights.size
        rr = np.repeat(r, ns)
        comps = [np.tile(sph.points[:, i], r.size) for i in range(weight.d)]
        ww = np.outer(wy, sph.weights).ravel()
        vals = np.asarray(G(rr, comps), dtype=float)
        return float(np.dot(ww, np.broadcast_to(vals, ww.shape)))

    return _doubling(eval_at, m, tol, m_max, label="E")
