"""Backstepping kernels and observer gains for the salinity-free ice model.

The direct kernel ``q`` and inverse kernel ``r`` solve Klein-Gordon type
hyperbolic problems on the triangle ``0 <= x <= y``; their closed forms are
scaled Bessel functions of

    z(x, y) = sqrt(lam / D_i * (y**2 - x**2)).

Every function here is a pure, vectorized function of its arguments. The
underscore-prefixed evaluators accept ``x > y`` as well, using the analytic
continuation of the kernels in ``z**2``; finite-difference and spectral
checks rely on that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import chebyshev as C

from .bessel import ratio_J_of_square, ratio_series, ratio_series_orders
from .params import ThermalParams


@dataclass(frozen=True)
class GainParams:
    """Design parameters ``lam``, ``c``, ``epsilon`` plus plant constants."""

    lam: float
    c: float
    epsilon: float
    D_i: float
    beta: float

    def __post_init__(self):
        for name in ("lam", "c", "epsilon", "D_i", "beta"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive (got {value})")

    @classmethod
    def from_thermal(cls, p: ThermalParams, lam=5e-6, c=3e-5, epsilon=1.0):
        return cls(lam, c, epsilon, p.D_i, p.beta)

    @property
    def a(self):
        """lam / D_i, the squared inverse length scale of the kernels."""
        return self.lam / self.D_i


@dataclass(frozen=True)
class GainEvaluation:
    p1: np.ndarray
    p2: float
    p3: float
    p4: float
    H_used: float


@dataclass(frozen=True)
class KernelPoint:
    q: float
    r: float
    psi: float
    phi: float
    f: float
    z: float


def _domain(x, y, what="x <= y"):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(x > y * (1 + 1e-12) + 1e-300):
        raise ValueError(f"kernel evaluated outside 0 <= {what}")
    return x, y


def _out(v):
    v = np.asarray(v)
    return v if v.ndim else float(v)


def z_of(x, H, g: GainParams):
    x, H = _domain(x, H, "x <= H")
    return _out(np.sqrt(np.maximum(g.a * (H * H - x * x), 0.0)))


# -- kernels, unchecked (analytic in y**2 - x**2) ---------------------------


def _s(x, y, g):
    return g.a * (np.asarray(y, float) ** 2 - np.asarray(x, float) ** 2)


def _q(x, y, g):
    return -g.a * np.asarray(x, float) * ratio_series(1, _s(x, y, g))


def _r(x, y, g):
    return g.a * np.asarray(x, float) * ratio_J_of_square(1, _s(x, y, g))


def _psi(x, H, g):
    return -(g.lam / g.beta) * np.asarray(x, float) * ratio_series(1, _s(x, H, g))


def _phi(x, H, g):
    return (g.lam / g.beta) * np.asarray(x, float) * ratio_J_of_square(1, _s(x, H, g))


def _psi_H(x, H, g):
    return -(g.lam**2 / (g.beta * g.D_i)) * np.asarray(x, float) * H * ratio_series(2, _s(x, H, g))


def _phi_H(x, H, g):
    return -(g.lam**2 / (g.beta * g.D_i)) * np.asarray(x, float) * H * ratio_J_of_square(2, _s(x, H, g))


def p3_of(H, g: GainParams):
    return -g.lam * H / (2.0 * g.beta) - g.epsilon


def p4_of(H, g: GainParams):
    return (g.c - 0.5 * g.lam * (1.0 - g.lam * H * H / (8.0 * g.D_i))
            + g.beta * g.lam * g.epsilon * H / (2.0 * g.D_i))


def _f(x, H, g):
    # Differentiating the inverse transformation along a moving H(t) gives
    # f = phi_H - r * p3; this is the form that satisfies the f-condition.
    return _phi_H(x, H, g) - _r(x, H, g) * p3_of(H, g)


# -- public, domain-checked --------------------------------------------------


def kernel_q(x, y, g: GainParams):
    """Direct transformation kernel q(x, y) for 0 <= x <= y."""
    x, y = _domain(x, y)
    return _out(_q(x, y, g))


def kernel_r(x, y, g: GainParams):
    """Inverse transformation kernel r(x, y) for 0 <= x <= y."""
    x, y = _domain(x, y)
    return _out(_r(x, y, g))


def kernel_psi(x, H, g: GainParams):
    x, H = _domain(x, H, "x <= H")
    return _out(_psi(x, H, g))


def kernel_phi(x, H, g: GainParams):
    x, H = _domain(x, H, "x <= H")
    return _out(_phi(x, H, g))


def kernel_phi_H(x, H, g: GainParams):
    """Partial derivative of phi(x, H) with respect to H, in closed form."""
    x, H = _domain(x, H, "x <= H")
    return _out(_phi_H(x, H, g))


def kernel_psi_H(x, H, g: GainParams):
    x, H = _domain(x, H, "x <= H")
    return _out(_psi_H(x, H, g))


def kernel_f(x, H, g: GainParams):
    """Coefficient f(x, H) of the thickness-velocity term of the target system."""
    x, H = _domain(x, H, "x <= H")
    return _out(_f(x, H, g))


def kernel_point(x, y, H, g: GainParams) -> KernelPoint:
    x, y = _domain(x, y)
    _domain(x, H, "x <= H")
    return KernelPoint(
        q=float(_q(x, y, g)), r=float(_r(x, y, g)),
        psi=float(_psi(x, H, g)), phi=float(_phi(x, H, g)),
        f=float(_f(x, H, g)), z=float(np.sqrt(g.a * (y * y - x * x))),
    )


def gains(H, g: GainParams, grid) -> GainEvaluation:
    """Observer gains at thickness ``H`` on the depths ``grid`` (m).

    ``grid`` may be given in absolute depth over ``[0, H]``.
    """
    if not H > 0:
        raise ValueError(f"gains need H > 0 (got {H})")
    x = np.asarray(grid, dtype=float)
    x, _ = _domain(x, H, "x <= H")
    s = g.a * (H * H - x * x)
    lam, beta, D = g.lam, g.beta, g.D_i
    g1, g2, g3 = ratio_series_orders((1, 2, 3), s)
    p1 = ((g.c * lam / beta) * x * g1
          + (g.epsilon * H / D - 3.0 / beta) * lam**2 * x * g2
          + (lam**3 / (D * beta)) * x**3 * g3)
    return GainEvaluation(np.asarray(p1, dtype=float), 0.0, p3_of(H, g), p4_of(H, g), float(H))


# -- Volterra transformations --------------------------------------------------


def chebyshev_nodes(H, n):
    """Chebyshev-Gauss-Lobatto points on [0, H], ascending."""
    return 0.5 * H * (1.0 - np.cos(np.pi * np.arange(n) / (n - 1)))


def _tail_integration_weights(x, H, quadrature):
    """Matrix W with (W * K) @ u ~ integral_{x_i}^{H} K(x_i, y) u(y) dy.

    ``trapezoid`` works on any ascending grid ending at H and only touches
    y >= x_i. ``chebyshev`` expects :func:`chebyshev_nodes` and integrates the
    interpolant of the whole product, which needs the continued kernels.
    """
    n = x.size
    if quadrature == "trapezoid":
        W = np.zeros((n, n))
        dx = np.diff(x)
        for i in range(n - 1):
            W[i, i:-1] += 0.5 * dx[i:]
            W[i, i + 1:] += 0.5 * dx[i:]
        return W
    if quadrature == "chebyshev":
        t = 2.0 * x / H - 1.0
        coef = np.linalg.inv(C.chebvander(t, n - 1))
        ic = C.chebint(coef, axis=0)
        upper = C.chebval(1.0, ic)
        return 0.5 * H * (upper[None, :] - C.chebvander(t, n) @ ic)
    raise ValueError(f"unknown quadrature {quadrature!r}")


class VolterraPair:
    """Direct and inverse backstepping transformations on a fixed grid.

    ``to_target`` maps an error profile and thickness error to the target
    state w; ``from_target`` maps back.
    """

    def __init__(self, x, H, g: GainParams, quadrature="trapezoid"):
        self.x = np.asarray(x, dtype=float)
        self.H = float(H)
        self.g = g
        W = _tail_integration_weights(self.x, self.H, quadrature)
        X, Y = np.meshgrid(self.x, self.x, indexing="ij")
        if quadrature == "trapezoid":
            mask = Y >= X
            Kq = np.where(mask, _q(X, np.where(mask, Y, X), g), 0.0)
            Kr = np.where(mask, _r(X, np.where(mask, Y, X), g), 0.0)
        else:
            Kq, Kr = _q(X, Y, g), _r(X, Y, g)
        self.Mq = W * Kq
        self.Mr = W * Kr
        self.psi = _psi(self.x, self.H, g)
        self.phi = _phi(self.x, self.H, g)

    def to_target(self, T_err, H_err=0.0):
        T_err = np.asarray(T_err, dtype=float)
        return T_err - self.Mr @ T_err - self.phi * H_err

    def from_target(self, w, H_err=0.0):
        w = np.asarray(w, dtype=float)
        return w - self.Mq @ w - self.psi * H_err


def f_condition_residual(H, g: GainParams, n=400, quadrature="chebyshev", x=None):
    """Residual of  f - int_x^H q(x,y) f(y) dy + eps q(x,H) + psi_H(x,H)."""
    if x is None:
        x = chebyshev_nodes(H, n) if quadrature == "chebyshev" else np.linspace(0, H, n)
    pair = VolterraPair(x, H, g, quadrature)
    f = _f(x, H, g)
    return x, f - pair.Mq @ f + g.epsilon * _q(x, H, g) + _psi_H(x, H, g)


def kernel_pde_residual(kind, x, y, g: GainParams, step, lam_sign=1.0):
    """Central-difference residual of the kernel PDE at points (x, y).

    ``kind='q'`` checks q_xx - q_yy + (lam/D) q, ``kind='r'`` checks
    r_xx - r_yy - (lam/D) r. ``lam_sign=-1`` flips lam inside q only
    (mutation hook for the self-check).
    """
    if kind == "q":
        gg = g if lam_sign > 0 else _Flipped(g)
        fn, coeff = (lambda a, b: _q(a, b, gg)), g.a
    elif kind == "r":
        fn, coeff = (lambda a, b: _r(a, b, g)), -g.a
    else:
        raise ValueError(kind)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    h = step
    k0 = fn(x, y)
    kxx = (fn(x + h, y) - 2 * k0 + fn(x - h, y)) / h**2
    kyy = (fn(x, y + h) - 2 * k0 + fn(x, y - h)) / h**2
    return kxx - kyy + coeff * k0


class _Flipped:
    """GainParams look-alike with the sign of lam reversed."""

    def __init__(self, g):
        self.lam, self.c, self.epsilon, self.D_i, self.beta = -g.lam, g.c, g.epsilon, g.D_i, g.beta
        self.a = -g.a


def diagonal_slope(kind, x, g: GainParams, step):
    """d/dx of q(x, x) or r(x, x) by central differences."""
    fn = _q if kind == "q" else _r
    x = np.asarray(x, float)
    return (fn(x + step, x + step, g) - fn(x - step, x - step, g)) / (2 * step)
