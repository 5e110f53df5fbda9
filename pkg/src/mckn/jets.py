"""Order-3 forward-mode jets.

A Jet carries the value, gradient, Hessian and third-derivative tensor of a
scalar expression at a chart point.  Expressions are built with ordinary
Python arithmetic on seeded coordinate jets, so the Gamma / L / Gamma_2
operators get exact derivatives (no finite differences).

Components may be batched: value has shape S, grad (m,)+S, hess (m,m)+S,
third (m,m,m)+S, where S is an arbitrary trailing batch shape.  Lower-order
jets simply leave the higher tensors as None; binary operations degrade to
the smaller order.
"""

from __future__ import annotations

import math

import numpy as np


def _sym_hg(h, g):
    """T_ijk = h_ij g_k + h_ik g_j + h_jk g_i (batch-safe)."""
    t = h[:, :, None] * g[None, None, :]
    t = t + h[:, None, :] * g[None, :, None]
    t = t + h[None, :, :] * g[:, None, None]
    return t


class Jet:
    __slots__ = ("value", "grad", "hess", "third")

    def __init__(self, value, grad=None, hess=None, third=None):
        self.value = value
        self.grad = grad
        self.hess = hess
        self.third = third

    # ---- constructors -------------------------------------------------
    @staticmethod
    def variables(point, order: int = 3) -> list["Jet"]:
        """Coordinate jets at `point`; point is (m,) or (m,)+batch-shape."""
        pt = np.asarray(point, dtype=float)
        m = pt.shape[0]
        batch = pt.shape[1:]
        out = []
        for i in range(m):
            g = np.zeros((m,) + batch)
            g[i] = 1.0
            h = np.zeros((m, m) + batch) if order >= 2 else None
            t = np.zeros((m, m, m) + batch) if order >= 3 else None
            out.append(Jet(pt[i].copy(), g, h, t))
        return out

    @property
    def order(self) -> int:
        if self.third is not None:
            return 3
        if self.hess is not None:
            return 2
        if self.grad is not None:
            return 1
        return 0

    def partial(self, i: int) -> "Jet":
        """The jet of the i-th partial derivative (order drops by one)."""
        if self.grad is None:
            raise ValueError("partial() needs a jet of order >= 1")
        return Jet(
            self.grad[i],
            None if self.hess is None else self.hess[i],
            None if self.third is None else self.third[i],
            None,
        )

    # ---- arithmetic ----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Jet):
            o = min(self.order, other.order)
            return Jet(
                self.value + other.value,
                self.grad + other.grad if o >= 1 else None,
                self.hess + other.hess if o >= 2 else None,
                self.third + other.third if o >= 3 else None,
            )
        return Jet(self.value + other, self.grad, self.hess, self.third)

    __radd__ = __add__

    def __neg__(self):
        return Jet(
            -self.value,
            None if self.grad is None else -self.grad,
            None if self.hess is None else -self.hess,
            None if self.third is None else -self.third,
        )

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(
                self.value * other,
                None if self.grad is None else self.grad * other,
                None if self.hess is None else self.hess * other,
                None if self.third is None else self.third * other,
            )
        o = min(self.order, other.order)
        v = self.value * other.value
        g = h = t = None
        if o >= 1:
            g = self.grad * other.value + self.value * other.grad
        if o >= 2:
            gg = self.grad[:, None] * other.grad[None, :]
            h = (
                self.hess * other.value
                + self.value * other.hess
                + gg
                + np.swapaxes(gg, 0, 1)
            )
        if o >= 3:
            t = (
                self.third * other.value
                + self.value * other.third
                + _sym_hg(self.hess, other.grad)
                + _sym_hg(other.hess, self.grad)
            )
        return Jet(v, g, h, t)

    __rmul__ = __mul__

    def compose(self, c0, c1, c2=None, c3=None) -> "Jet":
        """Jet of psi(self) given derivative values c_k = psi^(k)(self.value)."""
        o = self.order
        g = h = t = None
        if o >= 1:
            g = c1 * self.grad
        if o >= 2:
            gg = self.grad[:, None] * self.grad[None, :]
            h = c2 * gg + c1 * self.hess
        if o >= 3:
            ggg = (
                self.grad[:, None, None]
                * self.grad[None, :, None]
                * self.grad[None, None, :]
            )
            t = c3 * ggg + c2 * _sym_hg(self.hess, self.grad) + c1 * self.third
        return Jet(c0, g, h, t)

    def __pow__(self, e):
        v = self.value
        c0 = v**e
        c1 = e * v ** (e - 1)
        c2 = e * (e - 1) * v ** (e - 2) if self.order >= 2 else None
        c3 = e * (e - 1) * (e - 2) * v ** (e - 3) if self.order >= 3 else None
        return self.compose(c0, c1, c2, c3)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other**-1.0
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return other * self**-1.0


def exp(f):
    if not isinstance(f, Jet):
        return math.exp(f) if np.ndim(f) == 0 else np.exp(f)
    e = np.exp(f.value)
    return f.compose(e, e, e, e)


def log(f):
    if not isinstance(f, Jet):
        return math.log(f) if np.ndim(f) == 0 else np.log(f)
    v = f.value
    return f.compose(np.log(v), 1.0 / v, -1.0 / v**2, 2.0 / v**3)


def sqrt(f):
    if not isinstance(f, Jet):
        return math.sqrt(f) if np.ndim(f) == 0 else np.sqrt(f)
    return f**0.5


def sin(f):
    if not isinstance(f, Jet):
        return math.sin(f) if np.ndim(f) == 0 else np.sin(f)
    s, c = np.sin(f.value), np.cos(f.value)
    return f.compose(s, c, -s, -c)


def cos(f):
    if not isinstance(f, Jet):
        return math.cos(f) if np.ndim(f) == 0 else np.cos(f)
    s, c = np.sin(f.value), np.cos(f.value)
    return f.compose(c, -s, -c, s)


def value(f):
    """Plain value of a float-or-Jet."""
    return f.value if isinstance(f, Jet) else f
