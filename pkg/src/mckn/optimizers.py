"""Extremal family, sharp-inequality verification, and the E <-> S transport.

The Euclidean-side extremals are f(x) = (s + t |x|^{2 alpha})^{-(n-2)/2};
under the conformal map to S they become affine profiles (C + B y)^{-(n-2)/2}
with C = s + t, B = t - s, normalized in L^p exactly when C^2 - B^2 = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jets import Jet
from .params import CknParams, DerivedParams, DomainError
from .special import log_sphere_weight_area, z_constant
from .calculus import ModelE, ModelS, s_dirichlet, s_norm
from .quadrature import integrate_radial_mu_E
from .rng import stream


@dataclass(frozen=True)
class OptimizerE:
    """Radial extremal on E: profile (s + t r^{2 alpha})^{-(n-2)/2}."""

    s: float
    t: float
    dp: DerivedParams

    def __post_init__(self):
        if self.s <= 0.0 or self.t <= 0.0:
            raise DomainError(f"optimizer needs s, t > 0, got ({self.s}, {self.t})")

    def profile(self, r):
        """Radial profile; accepts floats, arrays, or radial jets."""
        dp = self.dp
        return (self.s + self.t * r ** (2.0 * dp.alpha)) ** (-(dp.n - 2.0) / 2.0)

    def __call__(self, x):
        r = np.sqrt(np.sum(np.asarray(x, dtype=float) ** 2, axis=0))
        return self.profile(r)


@dataclass(frozen=True)
class OptimizerS:
    """Compactified extremal: v(y) = (C + B y)^{-(n-2)/2} with C > |B|."""

    C: float
    B: float
    dp: DerivedParams

    def __post_init__(self):
        if self.C <= abs(self.B):
            raise DomainError(f"need C > |B|, got C={self.C}, B={self.B}")

    def phi(self, y):
        return self.C + self.B * y

    def profile(self, y):
        return self.phi(y) ** (-(self.dp.n - 2.0) / 2.0)

    def __call__(self, y, theta=None):
        return self.profile(y)

    @property
    def normalized(self) -> bool:
        return abs(self.C**2 - self.B**2 - 1.0) <= 1e-12

    @classmethod
    def from_rapidity(cls, tau: float, dp: DerivedParams) -> "OptimizerS":
        return cls(C=math.cosh(tau), B=math.sinh(tau), dp=dp)


def conformal_E_to_S(opt: OptimizerE) -> OptimizerS:
    return OptimizerS(C=opt.s + opt.t, B=opt.t - opt.s, dp=opt.dp)


def conformal_S_to_E(opt: OptimizerS) -> OptimizerE:
    return OptimizerE(s=(opt.C - opt.B) / 2.0, t=(opt.C + opt.B) / 2.0, dp=opt.dp)


def push_E_to_S(f, dp: DerivedParams):
    """Transport f on E to F on S with the conformal factor, preserving L^p.

    F(y, theta) = f(r(y), theta) * (1-y)^{-(n-2)/2}; the same works for jets.
    """

    def F(y, theta):
        s = (1.0 + y) * (1.0 - y) ** -1.0 if isinstance(y, Jet) else (1.0 + y) / (1.0 - y)
        r = s ** (1.0 / (2.0 * dp.alpha))
        return f(r, theta) * (1.0 - y) ** (-(dp.n - 2.0) / 2.0)

    return F


def pull_S_to_E(F, dp: DerivedParams):
    """Inverse transport: f(r, theta) = F(y(r), theta) * phi(r)^{-(n-2)/2}."""

    def f(r, theta):
        s = r ** (2.0 * dp.alpha)
        y = (s - 1.0) * (s + 1.0) ** -1.0 if isinstance(r, Jet) else (s - 1.0) / (s + 1.0)
        return F(y, theta) * ((1.0 + s) * 0.5) ** (-(dp.n - 2.0) / 2.0)

    return f


# --------------------------------------------------------------------------
# inequality sides
# --------------------------------------------------------------------------

def _profile_and_derivative(profile, r):
    (rj,) = Jet.variables(r[None, :], order=1)
    fj = profile(rj)
    return fj.value, fj.grad[0]


def ckn_sides(profile, params: CknParams, dp: DerivedParams, m: int = 48):
    """(lhs, rhs, ratio) of the weighted inequality for a radial profile.

    lhs = (int |f|^p |x|^{-bp} x^A dx)^{2/p}, rhs = int |grad f|^2 |x|^{-2a} x^A dx;
    both reduce to radial integrals against r^{alpha n - 1} dr, with the
    gradient integrand carrying the conformal factor r^{2(1-alpha)}.
    """
    area = math.exp(log_sphere_weight_area(params.weight))

    def p_integrand(r):
        return np.abs(profile(r)) ** dp.p

    def grad_integrand(r):
        _, df = _profile_and_derivative(profile, r)
        return df * df * r ** (2.0 * (1.0 - dp.alpha))

    lhs_raw = area * integrate_radial_mu_E(p_integrand, dp, m=m)
    rhs = area * integrate_radial_mu_E(grad_integrand, dp, m=m, tail_sing=1.0)
    lhs = lhs_raw ** (2.0 / dp.p)
    return lhs, rhs, lhs / rhs


def euler_lagrange_residual(opt: OptimizerE, params: CknParams, x) -> float:
    """Relative residual of -L_E f = alpha^2 n (n-2) s t f^{p-1} at x."""
    dp = opt.dp
    chart = ModelE(params, dp).chart(x)
    r2a = chart.r2**dp.alpha
    f = (opt.s + opt.t * r2a) ** (-(dp.n - 2.0) / 2.0)
    lhs = -chart.l(f)
    coef = dp.alpha**2 * dp.n * (dp.n - 2.0) * opt.s * opt.t
    rhs = coef * f.value ** (dp.p - 1.0)
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


def tight_sobolev_sides(F, params: CknParams, dp: DerivedParams, m: int = 40):
    """(lhs, rhs) of the tight inequality on the probability space mu_S/Z.

    lhs = ||F||_p^2, rhs = A_p int Gamma_S(F) dmu + ||F||_2^2 with
    A_p = 4/(alpha^2 n (n-2)); equality holds exactly for normalized affine
    optimizer profiles.
    """
    Z = z_constant(params, dp)
    model = ModelS.for_params(params, dp)
    a_p = 4.0 / (dp.alpha**2 * dp.n * (dp.n - 2.0))
    lhs = (s_norm(model, F, dp.p, m=m) / Z) ** (2.0 / dp.p)
    rhs = a_p * s_dirichlet(model, F, m=m) / Z + s_norm(model, F, 2.0, m=m) / Z
    return lhs, rhs


def phi_identity_residual(opt: OptimizerS, params: CknParams, y) -> float:
    """|Phi L_S Phi - (n/2) Gamma_S(Phi) - (n alpha^2/2)(1 - Phi^2)| at y.

    Zero exactly on the normalized family C^2 - B^2 = 1; in general the
    residual equals (n alpha^2/2) |C^2 - B^2 - 1|.
    """
    dp = opt.dp
    model = ModelS.for_params(params, dp)
    w = params.weight
    z0 = np.full((w.d - 1,) + np.shape(y), 0.8)
    chart = model.chart(np.asarray(y, dtype=float), z0)
    phi = opt.C + opt.B * chart.y
    val = (
        phi.value * chart.l(phi)
        - dp.n / 2.0 * chart.gamma(phi)
        - dp.n * dp.alpha**2 / 2.0 * (1.0 - phi.value**2)
    )
    return float(np.max(np.abs(val)))


def weyl_extension_check(masses, p: float):
    """(l1, lp2, equality) for the chamber-mass vector; lp2 <= l1 always.

    Equality holds exactly when at most one chamber carries mass, which is
    the mechanism forcing optimizers on the whole space to live on a single
    chamber.
    """
    if p <= 2.0:
        raise DomainError(f"needs p > 2, got p={p}")
    masses = np.asarray(masses, dtype=float)
    if np.any(masses < 0.0):
        raise DomainError("chamber masses must be nonnegative")
    l1 = float(np.sum(masses))
    lp2 = float(np.sum(masses ** (p / 2.0)) ** (2.0 / p))
    equality = int(np.count_nonzero(masses > 1e-14)) <= 1
    return l1, lp2, equality


# --------------------------------------------------------------------------
# seeded sharpness batteries
# --------------------------------------------------------------------------

def _random_poly_coeffs(gen, degree):
    return [gen.uniform(-1.0, 1.0) for _ in range(degree + 1)]


def _poly_eval(coeffs, x):
    acc = None
    for c in reversed(coeffs):
        acc = c if acc is None else acc * x + c
    return acc


def perturbed_profile(opt: OptimizerE, coeffs, eps: float):
    """Radial profile opt(r) (1 + eps q(y(r))) with q polynomial in y.

    Perturbing in the compactified variable keeps every integrand analytic
    on the closed interval, so the quadrature error stays far below the
    one-sided tolerance.
    """
    dp = opt.dp

    def profile(r):
        s = r ** (2.0 * dp.alpha)
        y = (s - 1.0) * (s + 1.0) ** -1.0 if isinstance(r, Jet) else (s - 1.0) / (s + 1.0)
        return opt.profile(r) * (1.0 + eps * _poly_eval(coeffs, y))

    return profile


def ckn_ratio_battery(params: CknParams, dp: DerivedParams, count: int, seed: int,
                      m: int = 40):
    """Max CKN ratio over random perturbed radial profiles (<= C_opt)."""
    gen = stream(seed, "ckn-ratio")
    worst = -math.inf
    for _ in range(count):
        opt = OptimizerE(gen.uniform(0.5, 2.0), gen.uniform(0.5, 2.0), dp)
        coeffs = _random_poly_coeffs(gen, 4)
        eps = 0.35 * gen.uniform(0.1, 1.0) / (sum(abs(c) for c in coeffs) + 1e-12)
        prof = perturbed_profile(opt, coeffs, eps)
        _, _, ratio = ckn_sides(prof, params, dp, m=m)
        worst = max(worst, ratio)
    return worst


def tight_sobolev_battery(params: CknParams, dp: DerivedParams, count: int, seed: int,
                          m: int = 32):
    """Max (lhs - rhs) over random perturbed functions on S (<= 0)."""
    gen = stream(seed, "tight-sobolev")
    worst = -math.inf
    for _ in range(count):
        base = OptimizerS.from_rapidity(gen.uniform(-0.8, 0.8), dp)
        coeffs = _random_poly_coeffs(gen, 3)
        eps = 0.3 * gen.uniform(0.1, 1.0) / (sum(abs(c) for c in coeffs) + 1e-12)
        ang = gen.uniform(-0.2, 0.2)

        def F(y, theta, _b=base, _c=coeffs, _e=eps, _a=ang):
            bump = 1.0 + _e * _poly_eval(_c, y) + _a * theta[-1] * y
            return _b.profile(y) * bump

        lhs, rhs = tight_sobolev_sides(F, params, dp, m=m)
        worst = max(worst, lhs - rhs)
    return worst
