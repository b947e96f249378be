"""Temperature-profile observer driven by thickness and surface-temperature data.

The estimator is a copy of the salinity-free ice model on ``[0, Y1]`` with
the thickness mismatch ``Y1 - H_hat`` injected through the gains of
:mod:`icestate.kernels`. A salinity-free plant sharing the same discrete
operators is included for verification runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .kernels import GainParams, VolterraPair, gains, p4_of
from .numerics import SolverError, gradient_at_end, heat_step_dirichlet
from .params import ThermalParams
from .plant import Measurements

MODES = ("backstepping", "open-loop")


@dataclass(frozen=True)
class ObserverConfig:
    gains: GainParams
    mode: str = "backstepping"
    d: float = 0.25
    Ibar0: Optional[float] = None
    N: int = 120
    theta: float = 1.0
    M_bound: float = 1e-6
    H_bar: float = 10.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0.0 <= self.d < 0.5:
            raise ValueError(f"d must lie in [0, 1/2) (got {self.d})")
        if self.N < 16:
            raise ValueError("observer grid needs at least 16 nodes")

    def source_amplitude(self, params: ThermalParams):
        return params.Ibar0 if self.Ibar0 is None else self.Ibar0


@dataclass(frozen=True)
class ObserverState:
    """Estimated profile on ``Y1 * linspace(0, 1, N)`` and estimated thickness."""

    T_hat: np.ndarray
    H_hat: float
    Y1: float
    t: float = 0.0

    @property
    def x(self):
        return np.linspace(0.0, self.Y1, self.T_hat.size)


@dataclass(frozen=True)
class ErrorDiagnostics:
    Phi: float
    Linf: float
    H_tilde: float
    w_norm: Optional[float] = None


def initial_estimate(x, H0, T0, d, T_end):
    """Quadratic profile through (0, T0) and (H0, T_end) with vertex at d*H0."""
    if not 0.0 <= d < 0.5:
        raise ValueError(f"d must lie in [0, 1/2) (got {d})")
    x = np.asarray(x, dtype=float)
    return (T_end - T0) / (H0**2 * (1.0 - 2.0 * d)) * ((x - d * H0) ** 2 - (d * H0) ** 2) + T0


def init_observer(meas: Measurements, cfg: ObserverConfig, params: ThermalParams,
                  T_end=None) -> ObserverState:
    """Quadratic initial estimate from the first measurements; H_hat = Y1.

    ``T_end`` is the value at the bottom, Tm2 unless given.
    """
    if not meas.Y1 > 0:
        raise ValueError("Y1 must be positive")
    T_end = params.Tm2 if T_end is None else T_end
    x = np.linspace(0.0, meas.Y1, cfg.N)
    return ObserverState(initial_estimate(x, meas.Y1, meas.Y2, cfg.d, T_end), meas.Y1, meas.Y1)


def thickness_rate(T, L, params: ThermalParams):
    """beta dT/dx at the bottom minus F_w / q, the salinity-free Stefan rate."""
    return params.beta * gradient_at_end(T, L) - params.F_w / params.q_latent


def _solar_source(x, params: ThermalParams, amplitude):
    return amplitude * params.kappa_i * np.exp(-params.kappa_i * x)


def step_observer(obs: ObserverState, meas: Measurements, cfg: ObserverConfig,
                  params: ThermalParams, dt) -> ObserverState:
    """Advance the estimate by ``dt`` given the measurements at the new time.

    H_hat is advanced first (explicit Euler with the old profile); the
    profile then takes one implicit step on the new domain ``[0, Y1]``.
    """
    if not meas.Y1 > 0:
        raise ValueError("Y1 must be positive")
    g = cfg.gains
    closed = cfg.mode == "backstepping"

    p4 = p4_of(obs.Y1, g) if closed else 0.0
    H_hat = obs.H_hat + dt * (p4 * (obs.Y1 - obs.H_hat) + thickness_rate(obs.T_hat, obs.Y1, params))
    err = meas.Y1 - H_hat

    x = np.linspace(0.0, 1.0, obs.T_hat.size) * meas.Y1
    if closed:
        ge = gains(meas.Y1, g, x)
        p1, p2, p3 = ge.p1, ge.p2, ge.p3
    else:
        p1, p2, p3 = np.zeros_like(x), 0.0, 0.0
    source = _solar_source(x, params, cfg.source_amplitude(params)) - p1 * err
    T_hat = heat_step_dirichlet(obs.T_hat, obs.Y1, meas.Y1, dt, params.D_i, source,
                                meas.Y2 - p2 * err, params.Tm2 - p3 * err, cfg.theta)
    if not np.isfinite(H_hat):
        raise SolverError("observer thickness became non-finite")
    return ObserverState(T_hat, H_hat, meas.Y1, obs.t + dt)


# -- salinity-free verification plant ---------------------------------------------


@dataclass(frozen=True)
class SimplePlantState:
    T_i: np.ndarray
    H: float
    t: float = 0.0


def step_simplified_plant(state: SimplePlantState, surface_T, params: ThermalParams, dt,
                          Ibar0=None, theta=1.0) -> SimplePlantState:
    """Salinity-free ice with prescribed surface temperature and Stefan bottom.

    Uses exactly the operations of :func:`step_observer` with zero gains.
    """
    amplitude = params.Ibar0 if Ibar0 is None else Ibar0
    H_new = state.H + dt * thickness_rate(state.T_i, state.H, params)
    if not H_new > 0:
        raise SolverError("ice vanished")
    x = np.linspace(0.0, 1.0, state.T_i.size) * H_new
    source = _solar_source(x, params, amplitude)
    T = heat_step_dirichlet(state.T_i, state.H, H_new, dt, params.D_i, source,
                            surface_T, params.Tm2, theta)
    return SimplePlantState(T, H_new, state.t + dt)


# -- diagnostics ---------------------------------------------------------------------


def _plant_on_observer_grid(obs: ObserverState, T_plant, H_plant):
    x = obs.x
    if T_plant.size == obs.T_hat.size and H_plant == obs.Y1:
        return x, np.asarray(T_plant, float)
    xp = np.linspace(0.0, H_plant, T_plant.size)
    L = min(H_plant, obs.Y1)
    keep = x <= L
    return x[keep], CubicSpline(xp, T_plant)(x[keep])


def error_diagnostics(obs: ObserverState, plant, gains_for_target: Optional[GainParams] = None
                      ) -> ErrorDiagnostics:
    """Estimation error norms against a plant state with ``T_i`` and ``H``.

    The temperature error is T_hat - T_i (the sign convention of the error
    system); Phi does not depend on that choice.
    """
    x, Tp = _plant_on_observer_grid(obs, plant.T_i, plant.H)
    T_err = obs.T_hat[:x.size] - Tp
    H_err = plant.H - obs.H_hat
    Phi = float(np.trapezoid(T_err**2, x) + H_err**2)
    Linf = float(np.max(np.abs(T_err)))
    w_norm = None
    if gains_for_target is not None:
        w = target_state(T_err, H_err, x, x[-1], gains_for_target)
        w_norm = float(np.sqrt(np.trapezoid(w**2, x)))
    return ErrorDiagnostics(Phi, Linf, H_err, w_norm)


def target_state(T_err, H_err, x, H, g: GainParams, quadrature="trapezoid"):
    """Backstepping target state w for an error profile and thickness error."""
    return VolterraPair(x, H, g, quadrature).to_target(T_err, H_err)


def decay_rate(t, Phi, drop=0.1, window=None):
    """Exponential decay rate of ``Phi`` from a log-linear least-squares fit.

    ``window=(t0, t1)`` selects the fit interval; otherwise the first
    ``drop`` fraction of the series is discarded as transient.
    """
    t = np.asarray(t, dtype=float)
    Phi = np.asarray(Phi, dtype=float)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
    else:
        sel = np.arange(t.size) >= int(drop * t.size)
    if sel.sum() < 2:
        raise ValueError("fit window holds fewer than two samples")
    if np.any(Phi[sel] <= 0):
        raise ValueError("Phi must be positive over the fit window")
    slope = np.polyfit(t[sel], np.log(Phi[sel]), 1)[0]
    return float(-slope)
