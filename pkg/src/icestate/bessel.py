r"""Scaled Bessel functions :math:`I_j(z)/z^j` and :math:`J_j(z)/z^j`.

Both ratios are entire functions of :math:`s = z^2`,

.. math::
    \frac{I_j(z)}{z^j} = \sum_{k\ge 0} \frac{(s/4)^k}{2^j\,k!\,(k+j)!},
    \qquad
    \frac{J_j(z)}{z^j} = \sum_{k\ge 0} \frac{(-s/4)^k}{2^j\,k!\,(k+j)!},

so the removable singularity at :math:`z = 0` needs no special casing and
the kernels built on top of them can be continued to :math:`s < 0`.
"""

import math

import numpy as np

SERIES_TOL = 1e-16
J_ASYMPTOTIC_FROM = 15.0
_MAX_TERMS = 600


def _terms_needed(j, s_abs_max):
    """Number of series terms after which every remaining term is below
    ``SERIES_TOL`` times the sum of absolute values."""
    quarter = s_abs_max / 4.0
    term = total = 1.0
    for k in range(1, _MAX_TERMS):
        term *= quarter / (k * (k + j))
        total += term
        if term <= SERIES_TOL * total:
            return k
    return _MAX_TERMS


def ratio_series(j, s):
    """Power series :math:`\\sum_k (s/4)^k / (2^j k! (k+j)!)` for any real ``s``.

    Terms are accumulated with Kahan compensation. For ``s < 0`` the series
    alternates and its absolute error is about ``1e-16 * I_j(|s|^(1/2))``.
    """
    s = np.asarray(s, dtype=float)
    n = _terms_needed(j, float(np.max(np.abs(s), initial=0.0)))
    term = np.full(s.shape, 1.0 / (2.0**j * math.factorial(j)))
    total = term.copy()
    comp = np.zeros(s.shape)
    quarter = s / 4.0
    for k in range(1, n + 1):
        term = term * quarter / (k * (k + j))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total if total.ndim else float(total)


def ratio_series_orders(orders, s):
    """:func:`ratio_series` for several orders at once, sharing the powers of s.

    Plain summation; meant for the non-negative ``s`` of the observer gains.
    """
    s = np.asarray(s, dtype=float)
    n = max(_terms_needed(j, float(np.max(np.abs(s), initial=0.0))) for j in orders)
    base = np.ones(s.shape)
    quarter = s / 4.0
    totals = [np.full(s.shape, 1.0 / (2.0**j * math.factorial(j))) for j in orders]
    for k in range(1, n + 1):
        base = base * quarter / k
        for i, j in enumerate(orders):
            totals[i] += base / (2.0**j * math.factorial(k + j))
    return totals


def _hankel_J(j, z):
    """Large-argument expansion of J_j(z) (Hankel), valid for z >~ 15."""
    mu = 4.0 * j * j
    P = np.ones_like(z)
    Q = np.zeros_like(z)
    a = 1.0
    zk = np.ones_like(z)
    prev = np.inf
    for k in range(1, 60):
        a = a * (mu - (2 * k - 1) ** 2) / (k * 8.0)
        zk = zk * z
        t = a / zk
        size = np.max(np.abs(t))
        if size > prev or size < 1e-17:
            break
        prev = size
        sign = (-1) ** (k // 2)
        if k % 2:
            Q = Q + sign * t
        else:
            P = P + sign * t
    chi = z - (0.5 * j + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * z)) * (P * np.cos(chi) - Q * np.sin(chi))


def _check_z(z):
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or not np.all(np.isfinite(z)):
        raise ValueError("Bessel ratios need finite z >= 0")
    return z


def bessel_ratio_I(j, z):
    """:math:`I_j(z)/z^j` for real ``z >= 0``."""
    z = _check_z(z)
    return ratio_series(j, z * z)


def ratio_J_of_square(j, s):
    """:math:`J_j(z)/z^j` as a function of ``s = z**2``; ``s`` may be negative."""
    s = np.asarray(s, dtype=float)
    out = np.asarray(ratio_series(j, -s), dtype=float)
    big = s > J_ASYMPTOTIC_FROM**2
    if np.any(big):
        z = np.sqrt(s[big])
        out = out.copy()
        out[big] = _hankel_J(j, z) / z**j
    return out if out.ndim else float(out)


def bessel_ratio_J(j, z):
    """:math:`J_j(z)/z^j` for real ``z >= 0``.

    The alternating series loses digits to cancellation for large z, so
    beyond ``J_ASYMPTOTIC_FROM`` the Hankel expansion is used instead.
    """
    z = _check_z(z)
    return ratio_J_of_square(j, z * z)
