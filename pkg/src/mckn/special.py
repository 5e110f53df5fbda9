"""Closed-form constants: weighted sphere area, profile integral, Z and C_opt.

All Gamma-function work is done in the log domain so that large monomial
dimensions D and generalized dimensions n never overflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .params import CknParams, DerivedParams, DomainError, Regime

LOG_SQRT_PI = 0.5 * math.log(math.pi)


class OptimalityWarning(UserWarning):
    """The closed-form constant is reported outside its proved regime."""


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if x <= 0.0:
        raise DomainError(f"log_gamma requires x > 0, got x={x}")
    return math.lgamma(x)


def log_sphere_weight_area(weight) -> float:
    """log of int_{S^{d-1}_*} theta^A dH^{d-1} (weighted area of the unit sphere).

    Closed form: D * prod Gamma((A_i+1)/2) / (2^k Gamma(1 + D/2)).
    Uncharged coordinates contribute Gamma(1/2) = sqrt(pi) and no halving.
    """
    D = weight.D
    s = math.log(D) - weight.k * math.log(2.0) - log_gamma(1.0 + D / 2.0)
    for Ai in weight.A:
        s += log_gamma((Ai + 1.0) / 2.0)
    return s


def sphere_weight_area(weight) -> float:
    return math.exp(log_sphere_weight_area(weight))


def log_cosh_profile_integral(alpha: float, n: float) -> float:
    """log of int_R cosh(alpha*u)^{-n} du = log( sqrt(pi)/alpha * G(n/2)/G((n+1)/2) )."""
    if alpha <= 0.0:
        raise DomainError(f"profile integral requires alpha > 0, got {alpha}")
    if n <= 0.0:
        raise DomainError(f"profile integral requires n > 0, got n={n}")
    return LOG_SQRT_PI - math.log(alpha) + log_gamma(n / 2.0) - log_gamma((n + 1.0) / 2.0)


def cosh_profile_integral(alpha: float, n: float) -> float:
    return math.exp(log_cosh_profile_integral(alpha, n))


def log_z_constant(params: CknParams, dp: DerivedParams) -> float:
    return log_sphere_weight_area(params.weight) + log_cosh_profile_integral(
        dp.alpha, dp.n
    )


def z_constant(params: CknParams, dp: DerivedParams) -> float:
    """Total weighted volume Z = mu_S(S): sphere area times the cosh profile."""
    return math.exp(log_z_constant(params, dp))


def optimal_constant(params: CknParams, dp: DerivedParams) -> float:
    """Sharp constant C_opt = 4 / (alpha^2 n (n-2) Z^{2/n}).

    Proved optimal in the symmetric/threshold regimes; in the breaking regime
    the same expression is returned with an OptimalityWarning attached.
    """
    if dp.regime is Regime.BREAKING:
        warnings.warn(
            "symmetry-breaking regime: the closed-form value is a lower bound "
            "for the optimal constant, not proved sharp",
            OptimalityWarning,
            stacklevel=2,
        )
    log_c = (
        math.log(4.0)
        - 2.0 * math.log(dp.alpha)
        - math.log(dp.n)
        - math.log(dp.n - 2.0)
        - (2.0 / dp.n) * log_z_constant(params, dp)
    )
    return math.exp(log_c)


@dataclass(frozen=True)
class ClosedFormConstants:
    sphere_area: float
    profile_integral: float
    Z: float
    C_opt: float


def closed_form_constants(params: CknParams, dp: DerivedParams) -> ClosedFormConstants:
    area = sphere_weight_area(params.weight)
    prof = cosh_profile_integral(dp.alpha, dp.n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OptimalityWarning)
        c_opt = optimal_constant(params, dp)
    return ClosedFormConstants(
        sphere_area=area, profile_integral=prof, Z=area * prof, C_opt=c_opt
    )
