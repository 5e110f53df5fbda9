"""Gamma-calculus on the three weighted models.

Charts:
  * E: Euclidean coordinates x on R^d_* with conformal metric factor
    |x|^{2(alpha-1)} and measure |x|^{-bp} x^A dx.
  * monomial sphere: stereographic coordinates z in R^{d-1}, projected along
    the uncharged d-th axis from either pole (switch at |z| > 2, i.e.
    theta_d > 3/5); round metric is phi^{-2} delta with phi = (1+|z|^2)/2,
    log-weight W = |A| log phi - sum_i A_i log z_i.
  * S: warped coordinates (y, theta) in (-1,1) x sphere with
    Gamma_S(f) = alpha^2 (1-y^2) (d_y f)^2 + Gamma_theta(f)/(1-y^2),
    L_S f = alpha^2 [(1-y^2) f_yy - n y f_y] + L_theta f/(1-y^2).

Gamma_2 is assembled as L(Gamma(f))/2 - Gamma(f, Lf) from order-3 jets; no
finite differences anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jets import Jet
from .params import CknParams, DerivedParams, DomainError, MonomialWeight
from .quadrature import sphere_rule, y_rule
from .rng import SplitMix64, stream


class ChartError(ValueError):
    """Point outside the chart domain (charged coordinate <= 0, |y| >= 1, ...)."""


# --------------------------------------------------------------------------
# shared sphere-operator kernel (used by both the sphere chart and S chart)
# --------------------------------------------------------------------------

class _ThetaOps:
    """Carre du champ / generator of the weighted sphere acting on jets.

    Operates on jets over a chart whose sphere block occupies the indices in
    `zidx`; `zvars` are the coordinate jets of that block and `A` their
    weight exponents.
    """

    def __init__(self, phi, zvars, zidx, A, d, drift_scale=1.0):
        self.phi = phi
        self.phi2 = phi * phi
        self.zvars = zvars
        self.zidx = zidx
        self.A = A
        self.d = d
        self.drift_scale = drift_scale

    def gamma(self, F, H):
        s = None
        for i in self.zidx:
            t = F.partial(i) * H.partial(i)
            s = t if s is None else s + t
        return self.phi2 * s

    def _zdot(self, F):
        s = None
        for zv, i in zip(self.zvars, self.zidx):
            t = zv * F.partial(i)
            s = t if s is None else s + t
        return s

    def lap(self, F):
        s = None
        for i in self.zidx:
            t = F.partial(i).partial(i)
            s = t if s is None else s + t
        out = self.phi2 * s
        if self.d != 3:
            out = out + (3 - self.d) * (self.phi * self._zdot(F))
        return out

    def gamma_w(self, F):
        """Gamma_theta(W_theta, F); scaled by the bug-injection knob."""
        absA = math.fsum(self.A)
        out = None
        if absA != 0.0:
            out = (absA * self.phi) * self._zdot(F)
        for zv, i, Ai in zip(self.zvars, self.zidx, self.A):
            if Ai != 0.0:
                t = (self.phi2 * F.partial(i)) * (Ai * zv**-1.0)
                out = -t if out is None else out - t
        if out is None:
            return 0.0 * F
        if self.drift_scale != 1.0:
            out = out * self.drift_scale
        return out

    def l(self, F):
        return self.lap(F) - self.gamma_w(F)

    def gamma2(self, F):
        return self.l(self.gamma(F, F)) * 0.5 - self.gamma(F, self.l(F))


# --------------------------------------------------------------------------
# the monomial sphere
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MonomialSphere:
    """Unit sphere portion with charged coordinates positive, weight theta^A.

    Requires the last axis uncharged so the stereographic atlas can project
    along it.  `drift_scale` multiplies the W-drift; it exists only as a
    negative control for the verification suites (1.0 in real use).
    """

    weight: MonomialWeight
    drift_scale: float = 1.0

    def __post_init__(self):
        if not self.weight.last_axis_free:
            raise DomainError(
                "sphere chart needs A_d = 0 (projection along an uncharged axis)"
            )

    @property
    def d(self) -> int:
        return self.weight.d

    def chart_of(self, theta):
        """Chart coordinates (z, pole) of an ambient unit vector."""
        theta = np.asarray(theta, dtype=float)
        pole = -1 if theta[-1] > 0.6 else 1
        denom = 1.0 - pole * theta[-1]
        return theta[:-1] / denom, pole

    def chart(self, z, pole: int = 1, order: int = 3) -> "SphereChart":
        return SphereChart(self, z, pole, order)


class SphereChart:
    """Stereographic chart at a (possibly batched) point; holds coordinate jets."""

    def __init__(self, sphere: MonomialSphere, z, pole: int = 1, order: int = 3):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if z.shape[0] != sphere.d - 1:
            raise ChartError(f"chart expects {sphere.d - 1} coordinates")
        for i, Ai in enumerate(sphere.weight.A[:-1]):
            if Ai > 0.0 and np.any(z[i] <= 0.0):
                raise ChartError(f"charged chart coordinate z_{i+1} must be positive")
        self.sphere = sphere
        self.pole = pole
        self.z = Jet.variables(z, order)
        zz = None
        for zv in self.z:
            t = zv * zv
            zz = t if zz is None else zz + t
        self.phi = (zz + 1.0) * 0.5
        self.ops = _ThetaOps(
            self.phi,
            self.z,
            tuple(range(sphere.d - 1)),
            sphere.weight.A[:-1],
            sphere.d,
            sphere.drift_scale,
        )

    @property
    def theta(self) -> list[Jet]:
        """Ambient coordinate jets (theta_1, ..., theta_d)."""
        inv = self.phi**-1.0
        out = [zv * inv for zv in self.z]
        out.append(self.pole * (1.0 - inv))
        return out

    # value-level operators
    def gamma(self, F, H=None):
        H = F if H is None else H
        return self.ops.gamma(F, H).value

    def lap(self, F):
        return self.ops.lap(F).value

    def gamma_w(self, F):
        return self.ops.gamma_w(F).value

    def l(self, F):
        return self.ops.l(F).value

    def gamma2(self, F):
        return self.ops.gamma2(F).value


def cd_sphere_defect(chart: SphereChart, F: Jet):
    """Gamma_2(F) - (D-2) Gamma(F) - (L F)^2/(D-1); nonnegative on the sphere."""
    D = chart.sphere.weight.D
    g2 = chart.gamma2(F)
    g = chart.gamma(F)
    lf = chart.l(F)
    return g2 - (D - 2.0) * g - lf * lf / (D - 1.0)


def hessian_w_bound_residual(chart: SphereChart, F: Jet):
    """(identity residual, convexity slack) for the Hessian of the log-weight.

    identity: Hess W(grad F, grad F) computed from the explicit chart formula
    must equal Gamma(Gamma(W,F),F) - Gamma(Gamma(F)/2, W).
    slack:    Hess W(grad F, grad F) - |A| Gamma(F) - Gamma(W,F)^2/|A| >= 0,
    with equality when only one coordinate is charged.
    """
    ops = chart.ops
    A = ops.A
    absA = math.fsum(A)
    phi = chart.phi.value
    grads = [F.partial(i).value for i in ops.zidx]
    zvals = [zv.value for zv in ops.zvars]
    gradsq = sum(g * g for g in grads)
    zdotf = sum(zv * g for zv, g in zip(zvals, grads))
    drift = sum(Ai / zv * g for Ai, zv, g in zip(A, zvals, grads) if Ai != 0.0)
    hess_w = (
        absA * phi**2 * gradsq
        + absA * phi**2 * zdotf**2
        - 2.0 * phi**3 * drift * zdotf
        + phi**4
        * sum(Ai / zv**2 * g * g for Ai, zv, g in zip(A, zvals, grads) if Ai != 0.0)
    )
    via_gamma = (
        ops.gamma(ops.gamma_w(F), F).value - ops.gamma_w(ops.gamma(F, F) * 0.5).value
    )
    identity_residual = np.abs(hess_w - via_gamma)
    if absA == 0.0:
        raise DomainError("convexity slack needs |A| > 0")
    gw = ops.gamma_w(F).value
    slack = hess_w - absA * ops.gamma(F, F).value - gw * gw / absA
    return identity_residual, slack


# --------------------------------------------------------------------------
# model E
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelE:
    params: CknParams
    dp: DerivedParams

    def chart(self, x, order: int = 3) -> "EChart":
        return EChart(self, x, order)

    def log_weight(self, x):
        """W_E = -log x^A - (alpha(n-d) - |A|)/2 * log |x|^2."""
        x = np.asarray(x, dtype=float)
        w = self.params.weight
        s = -sum(Ai * np.log(xi) for Ai, xi in zip(w.A, x) if Ai != 0.0)
        coef = (self.dp.alpha * (self.dp.n - w.d) - w.abs_A) / 2.0
        return s - coef * np.log(np.sum(x * x, axis=0))


class EChart:
    def __init__(self, model: ModelE, x, order: int = 3):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        w = model.params.weight
        if x.shape[0] != w.d:
            raise ChartError(f"chart expects {w.d} coordinates")
        r2 = np.sum(x * x, axis=0)
        if np.any(r2 == 0.0):
            raise ChartError("the origin is outside the chart")
        for i, Ai in enumerate(w.A):
            if Ai > 0.0 and np.any(x[i] <= 0.0):
                raise ChartError(f"charged coordinate x_{i+1} must be positive")
        self.model = model
        self.x = Jet.variables(x, order)
        rr = None
        for xv in self.x:
            t = xv * xv
            rr = t if rr is None else rr + t
        self.r2 = rr

    def gamma(self, F, H=None):
        H = F if H is None else H
        s = None
        for i in range(len(self.x)):
            t = F.partial(i) * H.partial(i)
            s = t if s is None else s + t
        return (self.r2 ** (1.0 - self.model.dp.alpha) * s).value

    def l(self, F):
        """L_E F = |x|^{2(1-alpha)} (Lap F - 2a (x.grad F)/|x|^2 + sum A_i F_i/x_i)."""
        w = self.model.params.weight
        a = self.model.params.a
        lap = None
        xdot = None
        for i, xv in enumerate(self.x):
            t = F.partial(i).partial(i)
            lap = t if lap is None else lap + t
            u = xv * F.partial(i)
            xdot = u if xdot is None else xdot + u
        core = lap - (2.0 * a) * (xdot * self.r2**-1.0)
        for i, Ai in enumerate(w.A):
            if Ai != 0.0:
                core = core + Ai * (F.partial(i) * self.x[i] ** -1.0)
        return (self.r2 ** (1.0 - self.model.dp.alpha) * core).value


# --------------------------------------------------------------------------
# model S (warped product)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelS:
    dp: DerivedParams
    sphere: MonomialSphere

    @classmethod
    def for_params(cls, params: CknParams, dp: DerivedParams, drift_scale: float = 1.0):
        return cls(dp=dp, sphere=MonomialSphere(params.weight, drift_scale))

    def chart(self, y, z, pole: int = 1, order: int = 3) -> "SChart":
        return SChart(self, y, z, pole, order)


class SChart:
    """Combined chart (y, z): index 0 is y, the rest is the sphere block."""

    def __init__(self, model: ModelS, y, z, pole: int = 1, order: int = 3):
        y = np.asarray(y, dtype=float)
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if np.any(np.abs(y) >= 1.0):
            raise ChartError("|y| must be < 1")
        w = model.sphere.weight
        for i, Ai in enumerate(w.A[:-1]):
            if Ai > 0.0 and np.any(z[i] <= 0.0):
                raise ChartError(f"charged chart coordinate z_{i+1} must be positive")
        self.model = model
        self.pole = pole
        pt = np.concatenate([np.broadcast_to(y, (1,) + np.shape(y)), z], axis=0)
        jv = Jet.variables(pt, order)
        self.y = jv[0]
        self.z = jv[1:]
        zz = None
        for zv in self.z:
            t = zv * zv
            zz = t if zz is None else zz + t
        self.phi = (zz + 1.0) * 0.5
        self.ops = _ThetaOps(
            self.phi,
            self.z,
            tuple(range(1, w.d)),
            w.A[:-1],
            w.d,
            model.sphere.drift_scale,
        )
        self.one_minus_y2 = 1.0 - self.y * self.y

    @property
    def theta(self) -> list[Jet]:
        inv = self.phi**-1.0
        out = [zv * inv for zv in self.z]
        out.append(self.pole * (1.0 - inv))
        return out

    def gamma_jet(self, F, H):
        al2 = self.model.dp.alpha**2
        rad = (al2 * self.one_minus_y2) * (F.partial(0) * H.partial(0))
        ang = self.ops.gamma(F, H) * self.one_minus_y2**-1.0
        return rad + ang

    def l_jet(self, F):
        dp = self.model.dp
        al2 = dp.alpha**2
        fy = F.partial(0)
        rad = al2 * (self.one_minus_y2 * fy.partial(0) - (dp.n * self.y) * fy)
        return rad + self.ops.l(F) * self.one_minus_y2**-1.0

    def gamma(self, F, H=None):
        H = F if H is None else H
        return self.gamma_jet(F, H).value

    def l(self, F):
        return self.l_jet(F).value

    def gamma2(self, F):
        g = self.gamma_jet(F, F)
        return self.l_jet(g).value * 0.5 - self.gamma_jet(F, self.l_jet(F)).value


def warped_identity_residual(chart: SChart, F: Jet):
    """Pointwise residual of the warped decomposition of the CD defect on S.

    Left side: Gamma_2^S(F) - alpha^2 (n-1) Gamma_S(F) - (L_S F)^2 / n.
    Right side: exact-square radial/angular term, the mixed gradient term
    2 alpha^2 Gamma_theta(F y/(1-y^2) + F_y), and the sphere CD(alpha^2(n-2), n-1)
    defect divided by (1-y^2)^2.  Returns |LHS-RHS| / max(|terms|, 1).
    """
    dp = chart.model.dp
    al2 = dp.alpha**2
    n = dp.n
    lhs = chart.gamma2(F) - al2 * (n - 1.0) * chart.gamma(F) - chart.l(F) ** 2 / n

    omy2 = chart.one_minus_y2.value
    fyy = F.partial(0).partial(0).value
    ltheta = chart.ops.l(F).value
    sq = al2 * omy2 * math.sqrt(n - 1.0) * fyy - ltheta / (omy2 * math.sqrt(n - 1.0))
    t1 = sq * sq / n

    g = F * (chart.y * chart.one_minus_y2**-1.0) + F.partial(0)
    t2 = 2.0 * al2 * chart.ops.gamma(g, g).value

    g2t = chart.ops.gamma2(F).value
    gt = chart.ops.gamma(F, F).value
    t3 = (g2t - al2 * (n - 2.0) * gt - ltheta * ltheta / (n - 1.0)) / omy2**2

    scale = np.maximum(np.maximum(np.abs(t1), np.abs(t2)), np.maximum(np.abs(t3), 1.0))
    return np.abs(lhs - (t1 + t2 + t3)) / scale


# --------------------------------------------------------------------------
# cutoff fixture
# --------------------------------------------------------------------------

class ZetaCutoff:
    """Radial cutoff: 0 near y = +-1, 1 on the middle, quintic transitions.

    Vanishes on (-1, -1+1/k) and (1-1/k, 1), equals 1 on (-1+2/k, 1-2/k).
    Achieved derivative bounds: |d_y| <= 1.875 k and |d_yy| <= 5.7735 k^2
    (a C^2 transition of width 1/k cannot satisfy a bound as small as 2k^2,
    so the second-derivative constant is necessarily larger).
    """

    def __init__(self, k: int):
        if k <= 2:
            raise DomainError("cutoff needs k > 2 so the middle plateau is nonempty")
        self.k = float(k)
        kk = self.k
        self.breaks = (-1 + 1 / kk, -1 + 2 / kk, 1 - 2 / kk, 1 - 1 / kk)
        self.support = (-1 + 1 / kk, 1 - 1 / kk)

    def derivatives(self, y):
        y = np.asarray(y, dtype=float)
        k = self.k
        c = [np.zeros(y.shape) for _ in range(4)]
        mid = (y >= self.breaks[1]) & (y <= self.breaks[2])
        c[0][mid] = 1.0
        for rising, lo, hi in ((True, self.breaks[0], self.breaks[1]),
                               (False, self.breaks[2], self.breaks[3])):
            sel = (y > lo) & (y < hi)
            if not np.any(sel):
                continue
            u = (y[sel] - lo) * k if rising else (hi - y[sel]) * k
            sgn = 1.0 if rising else -1.0
            s0 = u**3 * (10.0 - 15.0 * u + 6.0 * u**2)
            s1 = 30.0 * u**2 * (u - 1.0) ** 2
            s2 = 60.0 * u * (2.0 * u - 1.0) * (u - 1.0)
            s3 = 60.0 * (6.0 * u**2 - 6.0 * u + 1.0)
            c[0][sel] = s0
            c[1][sel] = sgn * k * s1
            c[2][sel] = k**2 * s2
            c[3][sel] = sgn * k**3 * s3
        return c

    def __call__(self, y, theta=None):
        if isinstance(y, Jet):
            c0, c1, c2, c3 = self.derivatives(y.value)
            return y.compose(c0, c1, c2, c3)
        return self.derivatives(y)[0]


# --------------------------------------------------------------------------
# integration-based checks on the sphere and on S
# --------------------------------------------------------------------------

def _pole_groups(points):
    north = points[:, -1] <= 0.6
    return [(1, np.nonzero(north)[0]), (-1, np.nonzero(~north)[0])]


def _sphere_charts(sphere, points, order=3):
    """SphereCharts for the rule points, grouped by projection pole."""
    out = []
    for pole, idx in _pole_groups(points):
        if idx.size == 0:
            continue
        th = points[idx]
        z = (th[:, :-1] / (1.0 - pole * th[:, -1:])).T
        out.append((idx, sphere.chart(z, pole=pole, order=order)))
    return out


def _tangential_gradient(points, h):
    """Ambient tangential gradient of an ambient function at unit vectors."""
    th = Jet.variables(points.T, order=1)
    hj = h(th)
    g = hj.grad
    radial = np.sum(points.T * g, axis=0)
    return g - radial * points.T


def ibp_residual_sphere(sphere: MonomialSphere, f, h, m: int = 48) -> float:
    """|int (f L_theta h + Gamma_theta(f,h)) dmu_theta| for ambient f, h.

    The smooth part is integrated against theta^A; the drift part moves one
    power of each charged coordinate from the measure into the rule, so each
    piece is integrated with a spectrally matched weight.
    """
    w = sphere.weight
    rule = sphere_rule(w, m)
    smooth = np.zeros(rule.weights.size)
    for idx, ch in _sphere_charts(sphere, rule.points):
        fj = f(ch.theta)
        hj = h(ch.theta)
        smooth[idx] = ch.lap(hj) * fj.value + ch.gamma(fj, hj)
    total = float(np.dot(rule.weights, smooth))
    for axis in w.charged:
        shifted = sphere_rule(w, m, shift_axis=axis)
        th = [shifted.points[:, i] for i in range(w.d)]
        fv = np.asarray(f(th), dtype=float)
        grad = _tangential_gradient(shifted.points, h)[axis]
        total += (
            sphere.drift_scale
            * w.A[axis]
            * float(np.dot(shifted.weights, np.broadcast_to(fv * grad, shifted.weights.shape)))
        )
    return abs(total)


def _tensor_values(model: ModelS, y, points, fns, order=3):
    """Evaluate callables fns[i](chart) over the tensor grid (y x points).

    Returns arrays shaped (len(y)*len(points),) in tensor order (y major),
    one per callable.  Each callable receives an SChart batch.
    """
    ny, ns = y.size, points.shape[0]
    outs = [np.zeros(ny * ns) for _ in fns]
    for pole, idx in _pole_groups(points):
        if idx.size == 0:
            continue
        th = points[idx]
        z = (th[:, :-1] / (1.0 - pole * th[:, -1:])).T
        yy = np.repeat(y, idx.size)
        zz = np.repeat(z[:, None, :], ny, axis=1).reshape(z.shape[0], -1)
        chart = model.chart(yy, zz, pole=pole, order=order)
        cols = (np.arange(ny)[:, None] * ns + idx[None, :]).ravel()
        for out, fn in zip(outs, fns):
            out[cols] = np.broadcast_to(fn(chart), yy.shape)
    return outs


def ibp_residual_S(
    model: ModelS,
    f,
    h,
    m: int = 48,
    h_support=None,
    y_breaks=None,
) -> float:
    """|int (h L_S f + Gamma_S(h,f)) dmu_S| for h vanishing near y = +-1.

    f, h are ambient functions of (y, theta).  h must be supported away from
    the endpoints; pass `h_support` (or use a ZetaCutoff, which carries one).
    """
    dp = model.dp
    w = model.sphere.weight
    if h_support is None:
        h_support = getattr(h, "support", None)
    if h_support is None:
        raise DomainError("h needs a known support (y_lo, y_hi) away from +-1")
    lo, hi = h_support
    if lo <= -1.0 or hi >= 1.0:
        raise DomainError(f"h support {h_support} must stay inside (-1, 1)")
    if y_breaks is None:
        y_breaks = getattr(h, "breaks", (lo, hi))
    al2 = dp.alpha**2
    rule = sphere_rule(w, m)

    def radial_pieces(ch):
        fj = f(ch.y, ch.theta)
        hj = h(ch.y, ch.theta)
        fy = fj.partial(0)
        plus = al2 * (hj.partial(0).value * fy.value + hj.value * fy.partial(0).value)
        zero = -al2 * dp.n * ch.y.value * hj.value * fy.value
        minus = hj.value * ch.ops.lap(fj).value + ch.ops.gamma(hj, fj).value
        return plus, zero, minus

    total = 0.0
    # one block per y-weight shift: (1-y^2)^{n/2-1+s} with s in {+1, 0, -1}
    y1, w1 = y_rule(dp, m, shift=1.0, breaks=y_breaks)
    vals = _tensor_values(model, y1, rule.points, [lambda ch: radial_pieces(ch)[0]])
    total += float(np.dot(np.outer(w1, rule.weights).ravel(), vals[0]))
    y0, w0 = y_rule(dp, m, shift=0.0, breaks=y_breaks)
    vals = _tensor_values(model, y0, rule.points, [lambda ch: radial_pieces(ch)[1]])
    total += float(np.dot(np.outer(w0, rule.weights).ravel(), vals[0]))
    ym, wm = y_rule(dp, m, shift=-1.0, breaks=y_breaks)
    vals = _tensor_values(model, ym, rule.points, [lambda ch: radial_pieces(ch)[2]])
    total += float(np.dot(np.outer(wm, rule.weights).ravel(), vals[0]))
    # drift part: + A_i int h (P grad f)_i against the axis-shifted weight
    for axis in w.charged:
        shifted = sphere_rule(w, m, shift_axis=axis)
        th_all = [shifted.points[:, i] for i in range(w.d)]
        hv_fg = np.zeros((ym.size, shifted.weights.size))
        for iy, yv in enumerate(ym):
            th = Jet.variables(shifted.points.T, order=1)
            fj = f(yv, th)
            if not isinstance(fj, Jet):
                continue  # f has no angular dependence: tangential gradient is 0
            g = fj.grad
            radial = np.sum(shifted.points.T * g, axis=0)
            tang = g - radial * shifted.points.T
            hv = np.broadcast_to(h(yv, th_all), shifted.weights.shape)
            hv_fg[iy] = hv * tang[axis]
        total += (
            model.sphere.drift_scale
            * w.A[axis]
            * float(np.dot(np.outer(wm, shifted.weights).ravel(), hv_fg.ravel()))
        )
    return abs(total)


def integrated_cd_defect(
    model: ModelS,
    f,
    nu: float | None,
    y: float,
    m: int = 48,
) -> float:
    """Sphere integral of the CD(alpha^2(n-1), n) defect weighted by f^{1-nu}.

    f is an ambient function of (y, theta), evaluated at the fixed y; `nu`
    must exceed n, or pass None for the unweighted variant.  Nonnegative in
    the symmetric/threshold regime.
    """
    dp = model.dp
    if nu is not None and nu <= dp.n:
        raise DomainError(f"nu must exceed n = {dp.n}, got {nu}")
    w = model.sphere.weight
    rule = sphere_rule(w, m)
    al2 = dp.alpha**2

    def defect(ch):
        F = f(ch.y, ch.theta)
        val = F.value
        if np.any(val <= 0.0):
            raise DomainError("integrated CD needs a positive function")
        d = ch.gamma2(F) - al2 * (dp.n - 1.0) * ch.gamma(F) - ch.l(F) ** 2 / dp.n
        if nu is not None:
            d = d * val ** (1.0 - nu)
        return d

    (vals,) = _tensor_values(model, np.array([y]), rule.points, [defect])
    return float(np.dot(rule.weights, vals))


# --------------------------------------------------------------------------
# norms and energies on S (used by the optimizer and spectral modules)
# --------------------------------------------------------------------------

def s_norm(model: ModelS, F, q: float, m: int = 48, y_breaks=None) -> float:
    """int |F|^q dmu_S for an ambient function F(y, theta) (value-level)."""
    dp, w = model.dp, model.sphere.weight
    y, wy = y_rule(dp, m, breaks=y_breaks)
    rule = sphere_rule(w, m)
    yy = np.repeat(y, rule.weights.size)
    comps = [np.tile(rule.points[:, i], y.size) for i in range(w.d)]
    vals = np.abs(np.asarray(F(yy, comps), dtype=float)) ** q
    return float(np.dot(np.outer(wy, rule.weights).ravel(), np.broadcast_to(vals, yy.shape)))


def s_dirichlet(model: ModelS, F, m: int = 48, y_breaks=None) -> float:
    """int Gamma_S(F) dmu_S, split into matched radial/angular weights."""
    dp, w = model.dp, model.sphere.weight
    al2 = dp.alpha**2
    rule = sphere_rule(w, m)
    y1, w1 = y_rule(dp, m, shift=1.0, breaks=y_breaks)
    (rad,) = _tensor_values(
        model, y1, rule.points, [lambda ch: al2 * F(ch.y, ch.theta).partial(0).value ** 2],
        order=1,
    )
    total = float(np.dot(np.outer(w1, rule.weights).ravel(), rad))
    ym, wm = y_rule(dp, m, shift=-1.0, breaks=y_breaks)

    def angular(ch):
        Fj = F(ch.y, ch.theta)
        return ch.ops.gamma(Fj, Fj).value

    (ang,) = _tensor_values(model, ym, rule.points, [angular], order=1)
    total += float(np.dot(np.outer(wm, rule.weights).ravel(), ang))
    return total


# --------------------------------------------------------------------------
# seeded batteries
# --------------------------------------------------------------------------

def _monomial_exponents(nvars: int, degree: int):
    if nvars == 0:
        return [()]
    out = []
    for e in range(degree + 1):
        for rest in _monomial_exponents(nvars - 1, degree - e):
            out.append((e,) + rest)
    return out


class RandomPoly:
    """Random polynomial with coefficients in [-1, 1] from a SplitMix stream."""

    def __init__(self, nvars: int, degree: int, gen: SplitMix64):
        self.exponents = _monomial_exponents(nvars, degree)
        self.coeffs = [gen.uniform(-1.0, 1.0) for _ in self.exponents]

    def __call__(self, vars_):
        acc = None
        for c, expo in zip(self.coeffs, self.exponents):
            term = c
            for v, e in zip(vars_, expo):
                for _ in range(e):
                    term = term * v
            acc = term if acc is None else acc + term
        return acc


def _sample_chart_points(weight: MonomialWeight, gen: SplitMix64, count: int):
    """Batch of chart points with charged coordinates kept positive."""
    dz = weight.d - 1
    z = np.empty((dz, count))
    for i in range(dz):
        lo, hi = (0.15, 2.2) if weight.A[i] > 0 else (-2.2, 2.2)
        z[i] = [gen.uniform(lo, hi) for _ in range(count)]
    return z


def cd_defect_battery(weight: MonomialWeight, samples: int, seed: int, degree: int = 3):
    """Minimum sphere CD defect over random cubic chart polynomials."""
    gen = stream(seed, f"cd-defect-{weight.d}-{weight.A}")
    sphere = MonomialSphere(weight)
    per_fn = 40
    n_funcs = max(1, samples // per_fn)
    worst = math.inf
    for _ in range(n_funcs):
        poly = RandomPoly(weight.d - 1, degree, gen)
        z = _sample_chart_points(weight, gen, per_fn)
        chart = sphere.chart(z)
        F = poly(chart.z)
        worst = min(worst, float(np.min(cd_sphere_defect(chart, F))))
    return worst


def warped_identity_battery(params: CknParams, dp: DerivedParams, samples: int, seed: int):
    """Max relative residual of the warped decomposition over random cubics."""
    gen = stream(seed, "warped-identity")
    model = ModelS.for_params(params, dp)
    w = params.weight
    per_fn = 25
    n_funcs = max(1, samples // per_fn)
    worst = 0.0
    for _ in range(n_funcs):
        poly = RandomPoly(w.d, 3, gen)
        z = _sample_chart_points(w, gen, per_fn)
        y = np.array([gen.uniform(-0.9, 0.9) for _ in range(per_fn)])
        chart = model.chart(y, z)
        F = poly([chart.y] + chart.z)
        worst = max(worst, float(np.max(warped_identity_residual(chart, F))))
    return worst


def hessian_bound_battery(weight: MonomialWeight, samples: int, seed: int):
    """(max identity residual, min convexity slack) over random cubics."""
    gen = stream(seed, "hessian-bound")
    sphere = MonomialSphere(weight)
    per_fn = 25
    n_funcs = max(1, samples // per_fn)
    max_id, min_slack = 0.0, math.inf
    for _ in range(n_funcs):
        poly = RandomPoly(weight.d - 1, 3, gen)
        z = _sample_chart_points(weight, gen, per_fn)
        chart = sphere.chart(z)
        F = poly(chart.z)
        ident, slack = hessian_w_bound_residual(chart, F)
        max_id = max(max_id, float(np.max(ident)))
        min_slack = min(min_slack, float(np.min(slack)))
    return max_id, min_slack


def _random_edge_flat_sphere_poly(weight: MonomialWeight, gen: SplitMix64, scale: float):
    """Random ambient polynomial that is flat across charged hyperplanes.

    Built from the free coordinates and the squares of charged ones, so the
    drift integrands stay bounded and the sphere integrals converge.
    """
    free = [i for i in range(weight.d) if weight.A[i] == 0.0]
    charged = list(weight.charged)
    terms = []
    for i in free:
        terms.append((gen.uniform(-scale, scale), i, 1))
    for i in charged:
        terms.append((gen.uniform(-scale, scale), i, 2))
    for i in free:
        terms.append((gen.uniform(-scale, scale), i, 2))
    cross = gen.uniform(-scale, scale)

    def f(theta):
        acc = None
        for c, i, p in terms:
            t = c * (theta[i] if p == 1 else theta[i] * theta[i])
            acc = t if acc is None else acc + t
        if len(free) >= 1 and len(charged) >= 1:
            acc = acc + cross * theta[free[0]] * (theta[charged[0]] * theta[charged[0]])
        return acc

    return f


def integrated_cd_battery(
    params: CknParams, dp: DerivedParams, samples: int, seed: int, m: int = 32
):
    """Minimum of both integrated-CD variants over positive random functions."""
    gen = stream(seed, "integrated-cd")
    model = ModelS.for_params(params, dp)
    worst = math.inf
    for _ in range(samples):
        poly = _random_edge_flat_sphere_poly(params.weight, gen, 0.25)
        shift = gen.uniform(1.5, 3.0)

        def f(y, theta, _p=poly, _s=shift):
            return _s + _p(theta)

        yv = gen.uniform(-0.8, 0.8)
        nu = dp.n + 1.0 + gen.uniform(0.0, 2.0)
        worst = min(worst, integrated_cd_defect(model, f, nu, yv, m=m))
        worst = min(worst, integrated_cd_defect(model, f, None, yv, m=m))
    return worst


def ibp_sphere_battery(weight: MonomialWeight, samples: int, seed: int, m: int = 48):
    """Max sphere IBP residual over random ambient polynomial pairs."""
    gen = stream(seed, "ibp-sphere")
    sphere = MonomialSphere(weight)
    worst = 0.0
    for _ in range(samples):
        fp = RandomPoly(weight.d, 3, gen)
        hp = RandomPoly(weight.d, 3, gen)
        worst = max(worst, ibp_residual_sphere(sphere, fp, hp, m=m))
    return worst


def ibp_S_battery(params: CknParams, dp: DerivedParams, samples: int, seed: int, m: int = 32):
    """Max IBP residual on S over cutoff-localized separable pairs."""
    gen = stream(seed, "ibp-S")
    model = ModelS.for_params(params, dp)
    worst = 0.0
    for i in range(samples):
        k = 3 + (i % 4)
        zeta = ZetaCutoff(k)
        fp = RandomPoly(params.weight.d, 2, gen)
        cy = gen.uniform(-1.0, 1.0)

        def f(y, theta, _fp=fp, _cy=cy):
            return _fp(theta) + _cy * y + y * y * 0.5

        hp = RandomPoly(params.weight.d, 2, gen)

        def h(y, theta, _z=zeta, _hp=hp):
            return _z(y) * _hp(theta)

        worst = max(
            worst,
            ibp_residual_S(model, f, h, m=m, h_support=zeta.support, y_breaks=zeta.breaks),
        )
    return worst
