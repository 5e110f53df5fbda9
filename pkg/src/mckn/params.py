"""Parameter algebra for the monomial CKN family.

The inequality is parametrized by a monomial weight x^A on R^d together with
two real exponents (a, b).  Everything downstream (constants, quadrature,
curvature checks) is a function of the derived quantities computed here:
the monomial dimension D, the critical exponent p, the generalized dimension
n and the parameter alpha, related by

    D = d + |A|,   p = 2D/(D-2+2(b-a)),   n = 2p/(p-2) = D/(1-(b-a)),
    alpha = 1 + a - b*p/2,

with the exact identities  alpha*n = D - b*p  and  2a = (D-2) - alpha*(n-2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class DomainError(ValueError):
    """Raised when parameters violate the admissible range."""


class Regime(enum.Enum):
    SYMMETRIC = "symmetric"
    THRESHOLD = "threshold"
    BREAKING = "breaking"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MonomialWeight:
    """Monomial weight x^A = prod |x_i|^{A_i} with nonnegative exponents."""

    d: int
    A: tuple[float, ...]

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"dimension d must be >= 2, got d={self.d}")
        if len(self.A) != self.d:
            raise DomainError(f"len(A)={len(self.A)} does not match d={self.d}")
        if any(Ai < 0 for Ai in self.A):
            raise DomainError(f"negative weight exponent in A={self.A}")
        object.__setattr__(self, "A", tuple(float(Ai) for Ai in self.A))

    @property
    def charged(self) -> tuple[int, ...]:
        """Indices K = {i : A_i > 0} (0-based)."""
        return tuple(i for i, Ai in enumerate(self.A) if Ai > 0)

    @property
    def k(self) -> int:
        return len(self.charged)

    @property
    def abs_A(self) -> float:
        return math.fsum(self.A)

    @property
    def D(self) -> float:
        return self.d + self.abs_A

    @property
    def last_axis_free(self) -> bool:
        return self.A[-1] == 0.0


@dataclass(frozen=True)
class CknParams:
    """Weight plus the two exponents (a, b) with 0 <= b-a < 1 and a < (D-2)/2."""

    weight: MonomialWeight
    a: float
    b: float

    def __post_init__(self):
        delta = self.b - self.a
        a_c = (self.weight.D - 2.0) / 2.0
        if delta < 0.0:
            raise DomainError(f"b - a = {delta} < 0 is outside the admissible range")
        if delta >= 1.0:
            if delta == 1.0:
                raise DomainError(
                    "b - a = 1 is the Hardy endpoint and is excluded"
                )
            raise DomainError(f"b - a = {delta} >= 1 is outside the admissible range")
        if self.a >= a_c:
            raise DomainError(
                f"a = {self.a} must be below the critical value a_c = {a_c}"
            )
        if self.weight.D - 2.0 + 2.0 * delta <= 0.0:
            raise DomainError(
                "degenerate exponent: D - 2 + 2(b-a) must be positive "
                f"(D={self.weight.D}, b-a={delta})"
            )


@dataclass(frozen=True)
class DerivedParams:
    D: float
    p: float
    n: float
    alpha: float
    a_c: float
    delta: float
    fs_lhs: float      # alpha^2
    fs_rhs: float      # (D-1)/(n-1)
    regime: Regime


def derive(params: CknParams, tie_tol: float = 1e-12) -> DerivedParams:
    """Compute all derived quantities and classify the Felli-Schneider regime."""
    D = params.weight.D
    delta = params.b - params.a
    p = 2.0 * D / (D - 2.0 + 2.0 * delta)
    n = 2.0 * p / (p - 2.0)
    alpha = 1.0 + params.a - params.b * p / 2.0
    fs_lhs = alpha * alpha
    fs_rhs = (D - 1.0) / (n - 1.0)
    dp = DerivedParams(
        D=D,
        p=p,
        n=n,
        alpha=alpha,
        a_c=(D - 2.0) / 2.0,
        delta=delta,
        fs_lhs=fs_lhs,
        fs_rhs=fs_rhs,
        regime=_classify(fs_lhs, fs_rhs, tie_tol),
    )
    return dp


def _classify(fs_lhs: float, fs_rhs: float, tol: float) -> Regime:
    if abs(fs_lhs - fs_rhs) <= tol:
        return Regime.THRESHOLD
    return Regime.SYMMETRIC if fs_lhs < fs_rhs else Regime.BREAKING


def felli_schneider(dp: DerivedParams, tol: float = 1e-12) -> Regime:
    """Regime from the Felli-Schneider comparison alpha^2 vs (D-1)/(n-1)."""
    return _classify(dp.fs_lhs, dp.fs_rhs, tol)


@dataclass(frozen=True)
class HypothesisReport:
    """Flags for the hypotheses under which the sharp constant is proved."""

    n_gt_4: bool
    last_exponent_zero: bool
    fs_condition: bool
    classification_strict: bool   # alpha^2 <= (D-1)/(n-1) < 1
    warnings: tuple[str, ...]

    @property
    def all_satisfied(self) -> bool:
        return self.n_gt_4 and self.last_exponent_zero and self.fs_condition


def theorem_hypotheses(params: CknParams, dp: DerivedParams) -> HypothesisReport:
    """Check the sharp-constant hypotheses; produces warnings, never errors.

    The n > 4 requirement backs density and regularity arguments and may not
    be optimal; it is always surfaced as a warning rather than a hard error.
    """
    warnings = []
    n_gt_4 = dp.n > 4.0
    if not n_gt_4:
        warnings.append(
            f"n = {dp.n:.12g} <= 4: density/regularity hypotheses not met; "
            "constants are still evaluated"
        )
    last_zero = params.weight.last_axis_free
    if not last_zero:
        warnings.append(
            "A_d != 0: the warped-product representation needs one uncharged axis"
        )
    fs = dp.fs_lhs <= dp.fs_rhs + 1e-15 or dp.regime is not Regime.BREAKING
    if dp.regime is Regime.BREAKING:
        fs = False
        warnings.append(
            "Felli-Schneider condition fails: optimizers cannot be radial; "
            "the closed-form constant is not proved optimal"
        )
    strict = fs and dp.fs_rhs < 1.0
    if fs and not strict:
        warnings.append(
            "(D-1)/(n-1) >= 1: optimizer classification at the threshold is "
            "not asserted"
        )
    return HypothesisReport(
        n_gt_4=n_gt_4,
        last_exponent_zero=last_zero,
        fs_condition=fs,
        classification_strict=strict,
        warnings=tuple(warnings),
    )


def interpolation_exponents(D: float, p: float) -> tuple[float, float]:
    """Interpolation data (theta, r) for p between 2 and the critical 2D/(D-2).

    theta solves 1/p = theta/2 + (1-theta)(D-2)/(2D) and r = D + (p/2)(2-D);
    they satisfy r = theta*p, i.e. 2r/(theta*p) = 2 away from theta = 0.
    """
    if D <= 2.0:
        raise DomainError(f"interpolation requires D > 2, got D={D}")
    q = 2.0 * D / (D - 2.0)
    if not (2.0 <= p <= q):
        raise DomainError(f"p={p} outside the interpolation range [2, {q}]")
    theta = (1.0 / p - 1.0 / q) / (0.5 - 1.0 / q)
    r = D + (p / 2.0) * (2.0 - D)
    return theta, r


def a_q_formula(nu: float, alpha: float, n: float) -> float:
    """Subcritical constant A_q = 4(nu-1) / (nu (nu-2) alpha^2 (n-1))."""
    return 4.0 * (nu - 1.0) / (nu * (nu - 2.0) * alpha * alpha * (n - 1.0))


def subcritical_constant(q: float, dp: DerivedParams) -> tuple[float, float]:
    """The pair (nu, A_q) of the subcritical tight inequality, for 2 < q < p.

    nu = 2q/(q-2) exceeds n on the admissible range and A_q tends to the
    tight-Sobolev constant 4/(alpha^2 n (n-2)) as q -> p.
    """
    if not (2.0 < q < dp.p):
        raise DomainError(f"q={q} outside the subcritical range (2, {dp.p})")
    nu = 2.0 * q / (q - 2.0)
    return nu, a_q_formula(nu, dp.alpha, dp.n)


def make_params(d: int, A, a: float, b: float) -> CknParams:
    """Convenience constructor used throughout the test batteries and CLI."""
    return CknParams(weight=MonomialWeight(d=d, A=tuple(A)), a=float(a), b=float(b))
