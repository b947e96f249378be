"""Front-fixed finite differences shared by the plant and the observer.

A layer occupying ``[x_top, x_top + L]`` is mapped onto ``xi in [0, 1]``
with equally spaced nodes. Nodes move with velocity
``v(xi) = v_top + xi * (v_bot - v_top)``, which adds ``v * dT/dx`` to the
nodal time derivative. Advection is upwinded; diffusion is central.
"""

import numpy as np
from scipy.linalg.lapack import dgtsv


class SolverError(RuntimeError):
    """Numerical failure (NaN, singular system, non-convergent iteration)."""


def solve_tridiagonal(lower, diag, upper, rhs):
    """Solve a tridiagonal system; ``rhs`` may have several columns."""
    *_, x, info = dgtsv(lower, diag, upper, rhs)
    if info != 0:
        raise SolverError(f"tridiagonal solve failed (info={info})")
    return x


def layer_operator(kappa, v, L, n):
    """Interior-row coefficients of  kappa T_xx + v T_x  on ``n`` nodes.

    Returns ``(a, b, c)`` so that row j reads a[j] T[j-1] + b[j] T[j] +
    c[j] T[j+1]; the first and last rows are zero.
    """
    dxi = 1.0 / (n - 1)
    diff = np.broadcast_to(np.asarray(kappa, float), (n,)) / (L * dxi) ** 2
    adv = np.broadcast_to(np.asarray(v, float), (n,)) / (L * dxi)
    fwd = np.maximum(adv, 0.0)
    bwd = np.minimum(adv, 0.0)
    a = diff - bwd
    b = -2.0 * diff - fwd + bwd
    c = diff + fwd
    a[0] = b[0] = c[0] = 0.0
    a[-1] = b[-1] = c[-1] = 0.0
    return a, b, c


def apply_operator(a, b, c, T):
    out = b * T
    out[1:] += a[1:] * T[:-1]
    out[:-1] += c[:-1] * T[1:]
    return out


def node_velocity(n, v_top, v_bot):
    xi = np.linspace(0.0, 1.0, n)
    return v_top + xi * (v_bot - v_top)


def gradient_at_end(T, L):
    """Second-order one-sided dT/dx at the last node of a layer of length L."""
    dx = L / (T.size - 1)
    return (3.0 * T[-1] - 4.0 * T[-2] + T[-3]) / (2.0 * dx)


def gradient_at_start(T, L):
    dx = L / (T.size - 1)
    return (-3.0 * T[0] + 4.0 * T[1] - T[2]) / (2.0 * dx)


def heat_step_dirichlet(T, L_old, L_new, dt, kappa, source, left, right,
                        theta=1.0, v_top=0.0):
    """One theta-scheme step of a layer with Dirichlet values at both ends.

    The bottom end moves from ``L_old`` to ``L_new`` during the step;
    ``source`` is evaluated by the caller on the new grid.
    """
    n = T.size
    v = node_velocity(n, v_top, (L_new - L_old) / dt + v_top)
    a1, b1, c1 = layer_operator(kappa, v, L_new, n)
    rhs = T + dt * np.asarray(source, float)
    if theta < 1.0:
        a0, b0, c0 = layer_operator(kappa, v, L_old, n)
        rhs = rhs + (1.0 - theta) * dt * apply_operator(a0, b0, c0, T)
    lower = -theta * dt * a1[1:]
    diag = 1.0 - theta * dt * b1
    upper = -theta * dt * c1[:-1]
    diag[0] = diag[-1] = 1.0
    upper[0] = 0.0
    lower[-1] = 0.0
    rhs[0] = left
    rhs[-1] = right
    out = solve_tridiagonal(lower, diag, upper, rhs)
    if not np.all(np.isfinite(out)):
        raise SolverError("non-finite temperature after diffusion step")
    return out
