"""Snow and sea-ice column with two moving boundaries.

The column is a snow layer on ``[-h, 0]`` over an ice layer on ``[0, H]``
(depth ``x`` grows downward). Each layer is front-fixed onto a unit
interval; both layers are assembled into one tridiagonal system per step.

The surface temperature enters the system only through a Dirichlet row, so
the solution is affine in it: ``T = A + tau * B``. Solving the quartic
surface energy balance for ``tau`` with that affine gradient gives the
fully implicit coupling for the price of one extra right-hand side.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .numerics import (SolverError, gradient_at_end, gradient_at_start, layer_operator,
                       apply_operator, node_velocity, solve_tridiagonal)
from .params import (SECONDS_PER_MONTH, SECONDS_PER_YEAR, Config, ForcingSchedule,
                     MonthlyForcing, SalinityParams, ThermalParams, atmospheric_flux,
                     forcing_at, heat_capacity, salinity, thermal_conductivity)

SNOW_MIN = 1e-3  # m; thinner snow is dropped from the column
NEWTON_TOL = 1e-10
NEWTON_MAXITER = 50
KELVIN = 273.0


class IceVanished(SolverError):
    """Ice thickness reached zero; the simulation cannot continue."""


@dataclass(frozen=True)
class GridConfig:
    N_s: int = 24
    N_i: int = 120
    dt: float = 600.0
    theta: float = 1.0

    def __post_init__(self):
        if self.N_s < 16 or self.N_i < 16:
            raise ValueError("N_s and N_i must be at least 16")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0.5, 1]")

    @classmethod
    def from_run(cls, run):
        return cls(run.N_s, run.N_i, run.dt, run.theta)


@dataclass(frozen=True)
class Measurements:
    Y1: float
    Y2: float


@dataclass(frozen=True)
class PlantState:
    """Column state.

    ``T_s`` runs from the snow surface down to the snow/ice interface and is
    empty while there is no snow layer; ``T_i`` runs from the ice surface
    down to the ice bottom. ``surface_melt`` is the melt-branch rate of the
    last surface solve (m/s, never positive).
    """

    T_s: np.ndarray
    T_i: np.ndarray
    h: float
    H: float
    t: float = 0.0
    T_surface: float = -20.0
    surface_melt: float = 0.0
    H_dot: float = 0.0

    @property
    def has_snow(self):
        return self.T_s.size > 0


# -- surface energy balance ----------------------------------------------------


def solve_surface_temperature(F_net, g0, g1, params: ThermalParams, T_guess=-20.0,
                              melt_point=None):
    """Root of  F_net - sigma (T+273)^4 + g0 + g1 T = 0, capped at the melt point.

    ``g0 + g1 T`` is the conductive flux k dT/dx reaching the surface.
    Returns ``(T_surface, dh_melt)`` where ``dh_melt = -R(melt_point)/q`` on
    the melt branch and 0 otherwise.
    """
    melt_point = params.Tm1 if melt_point is None else melt_point
    sig = params.sigma

    def residual(T):
        return F_net - sig * (T + KELVIN) ** 4 + g0 + g1 * T

    T = max(float(T_guess), -KELVIN + 1.0)
    R = residual(T)
    for _ in range(NEWTON_MAXITER):
        dR = -4.0 * sig * (T + KELVIN) ** 3 + g1
        step = -R / dR
        T_new = max(T + step, -KELVIN + 1.0)
        R_new = residual(T_new)
        while abs(R_new) > abs(R) and abs(T_new - T) > NEWTON_TOL:
            T_new = T + 0.5 * (T_new - T)
            R_new = residual(T_new)
        done = abs(T_new - T) < NEWTON_TOL
        T, R = T_new, R_new
        if done:
            break
    else:
        raise SolverError(f"surface Newton did not converge: T={T:.6g}, residual={R:.3g}, "
                          f"F_net={F_net:.6g}, g0={g0:.6g}, g1={g1:.6g}")
    if T >= melt_point:
        return melt_point, -residual(melt_point) / params.q_latent
    return T, 0.0


def surface_balance(T_profile, thickness, F_a, params: ThermalParams, *, conductivity=None,
                    T_guess=None, melt_point=None):
    """Surface temperature and melt rate for a given layer profile.

    ``T_profile`` starts at the surface node; the nodes below it are held
    fixed while the surface node is solved for. ``conductivity`` defaults
    to the snow value.
    """
    T_profile = np.asarray(T_profile, dtype=float)
    k = params.k_s if conductivity is None else conductivity
    dx = thickness / (T_profile.size - 1)
    g0 = k * (4.0 * T_profile[1] - T_profile[2]) / (2.0 * dx)
    g1 = -3.0 * k / (2.0 * dx)
    guess = T_profile[0] if T_guess is None else T_guess
    return solve_surface_temperature(F_a - params.I0, g0, g1, params, guess, melt_point)


# -- snowfall ------------------------------------------------------------------

SNOW_MONTHS = (True, True, True, True, True, False, False, False, True, True, True, True)


def snowfall(t, annual_depth=0.3, rates=None):
    """Snow accumulation rate (m/s) at time ``t``.

    Default: constant rate from September to May adding ``annual_depth``
    per year, nothing in June to August. ``rates`` (12 values, m/s)
    replaces the schedule month by month.
    """
    if annual_depth < 0:
        raise ValueError("annual snowfall depth must be non-negative")
    month = min(int(math.fmod(t, SECONDS_PER_YEAR) / SECONDS_PER_MONTH), 11)
    if rates is not None:
        if len(rates) != 12 or min(rates) < 0:
            raise ValueError("snowfall rates need 12 non-negative values")
        return float(rates[month])
    if not SNOW_MONTHS[month]:
        return 0.0
    return annual_depth / (sum(SNOW_MONTHS) * SECONDS_PER_MONTH)


# -- measurements ----------------------------------------------------------------


def measure(state: PlantState, noise_std=0.0, rng=None) -> Measurements:
    Y1, Y2 = state.H, float(state.T_i[0])
    if noise_std > 0:
        rng = np.random.default_rng() if rng is None else rng
        Y1 += noise_std * rng.normal()
        Y2 += noise_std * rng.normal()
    return Measurements(Y1, Y2)


# -- one time step ---------------------------------------------------------------


@functools.lru_cache(maxsize=16)
def _salinity_on_grid(n, sal: SalinityParams):
    s = salinity(np.linspace(0.0, 1.0, n), 1.0, sal)
    s.setflags(write=False)
    return s


def ice_coefficients(T_i, params: ThermalParams, sal: SalinityParams):
    """Diffusivity k/(rho c) and rho c on the ice nodes, frozen at ``T_i``.

    Temperatures are clamped at Tm2/2 so the brine terms stay finite.
    """
    S = _salinity_on_grid(T_i.size, sal)
    Tc = np.minimum(T_i, 0.5 * params.Tm2)
    rc = params.rho * heat_capacity(Tc, S, params)
    k = thermal_conductivity(Tc, S, params)
    return k / rc, rc


def bottom_conductivity(params: ThermalParams, sal: SalinityParams):
    return thermal_conductivity(params.Tm2, salinity(1.0, 1.0, sal), params)


def stefan_velocity(T_i, H, params: ThermalParams, sal: SalinityParams):
    """Bottom growth rate (m/s) from the Stefan condition."""
    kb = bottom_conductivity(params, sal)
    return (kb * gradient_at_end(T_i, H) - params.F_w) / params.q_latent


def _layer_rows(lower, diag, upper, rhs, off, T_old, kappa, v, L_old, L_new, src, dt, theta):
    n = T_old.size
    a1, b1, c1 = layer_operator(kappa, v, L_new, n)
    j = slice(off + 1, off + n - 1)
    diag[j] = 1.0 - theta * dt * b1[1:-1]
    lower[off:off + n - 2] = -theta * dt * a1[1:-1]
    upper[off + 1:off + n - 1] = -theta * dt * c1[1:-1]
    r = T_old + dt * src
    if theta < 1.0:
        a0, b0, c0 = layer_operator(kappa, v, L_old, n)
        r = r + (1.0 - theta) * dt * apply_operator(a0, b0, c0, T_old)
    rhs[j, 0] = r[1:-1]


def step_plant(state: PlantState, forcing: MonthlyForcing, params: ThermalParams,
               grid: GridConfig, sal: SalinityParams = SalinityParams(),
               snow_rate=0.0) -> PlantState:
    """Advance the column by one time step ``grid.dt``."""
    dt, theta = grid.dt, grid.theta
    F_a = atmospheric_flux(forcing)

    # boundary velocities from the current state
    H_dot_bot = stefan_velocity(state.T_i, state.H, params, sal)
    if state.has_snow:
        h_dot = snow_rate + state.surface_melt
        top_melt = 0.0
    else:
        h_dot = snow_rate
        top_melt = -state.surface_melt
    h_new = max(state.h + dt * h_dot, 0.0)
    H_new = state.H + dt * (H_dot_bot - top_melt)
    if not H_new > 0:
        raise IceVanished(f"ice vanished at t = {state.t:.0f} s")

    T_s = state.T_s
    h_old = state.h
    if state.has_snow and h_new < SNOW_MIN:
        T_s, h_new = T_s[:0], 0.0
    elif not state.has_snow and h_new >= SNOW_MIN:
        T_s = np.full(grid.N_s, state.T_i[0])
        h_old = h_new
    snow = T_s.size > 0

    ns = T_s.size
    ni = state.T_i.size
    off = ns - 1 if snow else 0
    n = off + ni
    lower = np.zeros(n - 1)
    diag = np.ones(n)
    upper = np.zeros(n - 1)
    rhs = np.zeros((n, 2))

    # ice
    kappa_i, rc = ice_coefficients(state.T_i, params, sal)
    xi = np.linspace(0.0, 1.0, ni)
    src_i = params.I0 * params.kappa_i * np.exp(-params.kappa_i * xi * H_new) / rc
    v_i = node_velocity(ni, top_melt, H_dot_bot)
    _layer_rows(lower, diag, upper, rhs, off, state.T_i, kappa_i, v_i, state.H, H_new,
                src_i, dt, theta)
    rhs[n - 1, 0] = params.Tm2

    if snow:
        v_s = node_velocity(ns, -(h_new - h_old) / dt, 0.0)
        _layer_rows(lower, diag, upper, rhs, 0, T_s, params.D_s, v_s, max(h_old, SNOW_MIN),
                    h_new, np.zeros(ns), dt, theta)
        # interface: k_s dT/dx(0-) = k0 dT/dx(0+), one-sided second order,
        # with the outer neighbours eliminated against the adjacent rows
        I = ns - 1
        ws = params.k_s / (2.0 * h_new / (ns - 1))
        wi = params.k0 / (2.0 * H_new / (ni - 1))
        am2, am1, a0, ap1, ap2 = ws, -4.0 * ws, 3.0 * ws + 3.0 * wi, -4.0 * wi, wi
        r_if = np.zeros(2)
        f = am2 / lower[I - 2]
        am1 -= f * diag[I - 1]
        a0 -= f * upper[I - 1]
        r_if -= f * rhs[I - 1]
        f = ap2 / upper[I + 1]
        a0 -= f * lower[I]
        ap1 -= f * diag[I + 1]
        r_if -= f * rhs[I + 1]
        lower[I - 1], diag[I], upper[I] = am1, a0, ap1
        rhs[I] = r_if

    # surface row is a unit Dirichlet handled through the second column
    diag[0] = 1.0
    upper[0] = 0.0
    rhs[0] = (0.0, 1.0)
    lower[n - 2] = 0.0
    diag[n - 1] = 1.0

    X = solve_tridiagonal(lower, diag, upper, rhs)
    A, B = X[:, 0], X[:, 1]
    if snow:
        k_top, dx_top = params.k_s, h_new / (ns - 1)
    else:
        k_top, dx_top = params.k0, H_new / (ni - 1)
    g0 = k_top * (4.0 * A[1] - A[2]) / (2.0 * dx_top)
    g1 = k_top * (-3.0 + 4.0 * B[1] - B[2]) / (2.0 * dx_top)
    tau, melt = solve_surface_temperature(F_a - params.I0, g0, g1, params,
                                          T_guess=state.T_surface)
    T = A + tau * B
    if not np.all(np.isfinite(T)):
        raise SolverError(f"non-finite temperatures at t = {state.t:.0f} s")

    return PlantState(
        T_s=T[:ns].copy() if snow else T[:0].copy(),
        T_i=T[off:].copy(),
        h=h_new, H=H_new, t=state.t + dt,
        T_surface=tau, surface_melt=melt, H_dot=H_dot_bot - top_melt,
    )


def interface_flux_residual(state: PlantState, params: ThermalParams):
    """k_s dT_s/dx(0-) - k0 dT_i/dx(0+) with one-sided second-order gradients."""
    if not state.has_snow:
        return 0.0
    return (params.k_s * gradient_at_end(state.T_s, state.h)
            - params.k0 * gradient_at_start(state.T_i, state.H))


# -- initial conditions ------------------------------------------------------------


def initial_surface_temperature(F_a, params: ThermalParams, H0, h0=0.0, T_bottom=None):
    """Ice-surface temperature T0 of the piecewise-linear initial column.

    The snow profile carries the same heat flux as the ice, so its top sits
    at ``T0 - (k0/k_s) (T_bottom - T0) h0 / H0``; T0 solves the quartic
    surface balance at that point.
    """
    Tb = params.Tm2 if T_bottom is None else T_bottom

    def balance(T0):
        flux = params.k0 * (Tb - T0) / H0
        T_top = T0 - flux * h0 / params.k_s
        return F_a - params.I0 - params.sigma * (T_top + KELVIN) ** 4 + flux

    lo = Tb - 1.0
    while balance(lo) < 0:
        lo = Tb - 2.0 * (Tb - lo)
        if lo < -200:
            raise SolverError("no physical initial surface temperature")
    if balance(Tb) > 0:
        raise SolverError("forcing melts the initial surface")
    return brentq(balance, lo, Tb, xtol=1e-13)


def initial_plant_state(params: ThermalParams, grid: GridConfig, F_a, H0=3.0, h0=0.3,
                        a=1.0, T0=None, T_bottom=None) -> PlantState:
    """Piecewise-linear column plus a sine perturbation in the ice.

    ``T_bottom`` defaults to Tm2 so the bottom boundary condition holds at
    t = 0.
    """
    Tb = params.Tm2 if T_bottom is None else T_bottom
    if T0 is None:
        T0 = initial_surface_temperature(F_a, params, H0, h0, Tb)
    x = np.linspace(0.0, H0, grid.N_i)
    T_i = (Tb - T0) / H0 * x + T0 + a * np.sin(4.0 * np.pi * x / H0)
    T_i[-1] = params.Tm2
    if h0 >= SNOW_MIN:
        xs = -h0 * (1.0 - np.linspace(0.0, 1.0, grid.N_s))
        T_s = params.k0 * (Tb - T0) / (params.k_s * H0) * xs + T0
        T_surf = T_s[0]
    else:
        T_s, h0, T_surf = np.zeros(0), 0.0, T0
    return PlantState(T_s, T_i, h0, H0, 0.0, T_surface=float(T_surf))


# -- long runs ----------------------------------------------------------------------


@dataclass
class AnnualRun:
    t: np.ndarray
    h: np.ndarray
    H: np.ndarray
    T_surface: np.ndarray
    stations: np.ndarray
    profiles: np.ndarray
    max_H: float
    max_abs_H_dot: float
    H_bar: float
    M_bound: float

    @property
    def assumption_violations(self):
        out = []
        if not self.max_H < self.H_bar:
            out.append(f"max H = {self.max_H:.3f} m >= H_bar = {self.H_bar}")
        if not self.max_abs_H_dot < self.M_bound:
            out.append(f"max |dH/dt| = {self.max_abs_H_dot:.3g} m/s >= M = {self.M_bound}")
        return out


def run_annual(years, config: Optional[Config] = None, state: Optional[PlantState] = None,
               stations=np.linspace(0.0, 1.0, 11)) -> AnnualRun:
    """Integrate the column for ``years`` years under the annual forcing cycle.

    Records are sampled every ``config.run.record_every`` seconds, starting
    with the initial state.
    """
    if years < 0:
        raise ValueError("years must be non-negative")
    config = Config() if config is None else config
    params, schedule, sal, run = config
    grid = GridConfig.from_run(run)
    if state is None:
        F_a = atmospheric_flux(forcing_at(schedule, 0.0))
        state = initial_plant_state(params, grid, F_a, run.H0, run.h0, a=0.0)

    n_steps = int(round(years * SECONDS_PER_YEAR / grid.dt))
    every = max(1, int(round(run.record_every / grid.dt)))
    stations = np.asarray(stations, dtype=float)
    xi = np.linspace(0.0, 1.0, grid.N_i)

    rec = []
    max_H, max_Hdot = state.H, 0.0

    def record(s):
        rec.append((s.t, s.h, s.H, s.T_surface, np.interp(stations, xi, s.T_i)))

    record(state)
    for k in range(n_steps):
        f = forcing_at(schedule, state.t)
        state = step_plant(state, f, params, grid, sal, snowfall(state.t, run.snow_annual))
        max_H = max(max_H, state.H)
        max_Hdot = max(max_Hdot, abs(state.H_dot))
        if (k + 1) % every == 0:
            record(state)

    t, h, H, Ts, prof = zip(*rec)
    return AnnualRun(np.array(t), np.array(h), np.array(H), np.array(Ts), stations,
                     np.array(prof), max_H, max_Hdot, run.H_bar, run.M_bound)
