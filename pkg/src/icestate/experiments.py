"""Scenario runners behind the command line and the acceptance suite.

``run_estimation`` drives the full snow/ice plant and the observer side by
side (the January scenario); ``run_verification`` does the same against
the salinity-free plant with its surface temperature held fixed.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bessel, kernels
from .kernels import GainParams
from .observer import (ObserverConfig, SimplePlantState, _plant_on_observer_grid,
                       decay_rate, error_diagnostics, init_observer,
                       step_observer, step_simplified_plant)
from .params import SECONDS_PER_DAY, SECONDS_PER_YEAR, Config, atmospheric_flux, forcing_at
from .plant import GridConfig, Measurements, initial_plant_state, measure, snowfall, step_plant

SNAPSHOT_DAYS = (0.0, 1.0, 2.0)  # January 1st, 2nd, 3rd
RATE_WINDOW_DAYS = 1.0


@dataclass
class EstimationRun:
    mode: str
    lam: float
    t: np.ndarray  # s
    Phi: np.ndarray
    Linf: np.ndarray
    H_tilde: np.ndarray
    overshoot: float
    snapshots: dict = field(default_factory=dict)  # day -> (x, T_true, T_hat)

    @property
    def t_days(self):
        return self.t / SECONDS_PER_DAY

    def running_rate(self, window_days=RATE_WINDOW_DAYS):
        """Decay rate of Phi fitted over the trailing window; NaN while too short."""
        out = np.full(self.t.size, np.nan)
        w = window_days * SECONDS_PER_DAY
        for i in range(self.t.size):
            if self.t[i] < w:
                continue
            sel = slice(np.searchsorted(self.t, self.t[i] - w), i + 1)
            if np.all(self.Phi[sel] > 0):
                out[i] = decay_rate(self.t[sel], self.Phi[sel], drop=0.0)
        return out

    def time_to_fraction(self, fraction=0.1):
        """First time Phi <= fraction * Phi(0), or None if never reached."""
        hit = np.nonzero(self.Phi <= fraction * self.Phi[0])[0]
        return float(self.t[hit[0]]) if hit.size else None


def _observer_config(config: Config, mode, lam=None):
    params, _, _, run = config
    g = GainParams.from_thermal(params, run.lam if lam is None else lam, run.c, run.epsilon)
    return ObserverConfig(g, mode, d=run.d, Ibar0=run.Ibar0, N=run.N_i, theta=run.theta,
                          M_bound=run.M_bound, H_bar=run.H_bar)


def january_plant(config: Config):
    """Initial plant for the January scenario: linear profiles plus a sine in the ice."""
    params, schedule, _, run = config
    F_a = atmospheric_flux(forcing_at(schedule, 0.0))
    return initial_plant_state(params, GridConfig.from_run(run), F_a, run.H0, run.h0, a=run.a)


def _snap(snapshots, days, t, x, T_true, T_hat, dt):
    for d in days:
        if d not in snapshots and abs(t - d * SECONDS_PER_DAY) < 0.5 * dt:
            snapshots[d] = (x.copy(), np.asarray(T_true).copy(), T_hat.copy())


def run_estimation(config: Config, mode="backstepping", lam=None, days=None,
                   sample_every=3600.0, snapshot_days=SNAPSHOT_DAYS) -> EstimationRun:
    """Full plant and observer from January 1st for ``days`` days."""
    params, schedule, sal, run = config
    grid = GridConfig.from_run(run)
    cfg = _observer_config(config, mode, lam)
    days = run.estimate_days if days is None else days
    rng = np.random.default_rng(run.seed)

    state = january_plant(config)
    obs = init_observer(measure(state, run.noise_std, rng), cfg, params)
    every = max(1, int(round(sample_every / grid.dt)))
    n = int(round(days * SECONDS_PER_DAY / grid.dt))

    rows, snaps = [], {}
    overshoot = -np.inf

    def sample():
        d = error_diagnostics(obs, state)
        rows.append((state.t, d.Phi, d.Linf, d.H_tilde))
        x, Tp = _plant_on_observer_grid(obs, state.T_i, state.H)
        _snap(snaps, snapshot_days, state.t, x, Tp, obs.T_hat[:x.size], grid.dt)

    sample()
    for k in range(n):
        state = step_plant(state, forcing_at(schedule, state.t), params, grid, sal,
                           snowfall(state.t, run.snow_annual))
        obs = step_observer(obs, measure(state, run.noise_std, rng), cfg, params, grid.dt)
        x, Tp = _plant_on_observer_grid(obs, state.T_i, state.H)
        overshoot = max(overshoot, float(np.max(obs.T_hat[:x.size] - Tp)))
        if (k + 1) % every == 0:
            sample()
    t, Phi, Linf, Ht = map(np.array, zip(*rows))
    return EstimationRun(mode, cfg.gains.lam, t, Phi, Linf, Ht, overshoot, snaps)


def run_verification(config: Config, mode="backstepping", lam=None, days=10.0,
                     matched=False, sample_every=None) -> EstimationRun:
    """Observer against the salinity-free plant with a fixed surface temperature.

    ``matched=True`` starts the observer from the plant state itself.
    """
    params, _, _, run = config
    grid = GridConfig.from_run(run)
    cfg = _observer_config(config, mode, lam)
    plant0 = january_plant(config)
    T0 = float(plant0.T_i[0])
    plant = SimplePlantState(plant0.T_i.copy(), plant0.H)
    obs = init_observer(Measurements(plant.H, T0), cfg, params)
    if matched:
        obs = dataclasses.replace(obs, T_hat=plant.T_i.copy())
    every = max(1, int(round((sample_every or grid.dt) / grid.dt)))
    n = int(round(days * SECONDS_PER_DAY / grid.dt))

    rows, overshoot = [], -np.inf

    def sample():
        d = error_diagnostics(obs, plant)
        rows.append((plant.t, d.Phi, d.Linf, d.H_tilde))

    sample()
    for k in range(n):
        plant = step_simplified_plant(plant, T0, params, grid.dt, run.Ibar0, grid.theta)
        obs = step_observer(obs, Measurements(plant.H, T0), cfg, params, grid.dt)
        overshoot = max(overshoot, float(np.max(obs.T_hat - plant.T_i)))
        if (k + 1) % every == 0:
            sample()
    t, Phi, Linf, Ht = map(np.array, zip(*rows))
    return EstimationRun(mode, cfg.gains.lam, t, Phi, Linf, Ht, overshoot)


# -- comparisons ---------------------------------------------------------------------


@dataclass(frozen=True)
class Speedup:
    t_open: Optional[float]
    t_back: Optional[float]
    ratio: float
    lower_bound: bool  # open loop never reached 10% within the horizon
    horizon: float


def speedup(open_run: EstimationRun, back_run: EstimationRun, fraction=0.1) -> Speedup:
    """t_10%(open-loop) / t_10%(backstepping), a lower bound if open loop never gets there."""
    t_o = open_run.time_to_fraction(fraction)
    t_b = back_run.time_to_fraction(fraction)
    horizon = float(open_run.t[-1])
    if t_b is None:
        return Speedup(t_o, None, float("nan"), False, horizon)
    if t_o is None:
        return Speedup(None, t_b, horizon / t_b, True, horizon)
    return Speedup(t_o, t_b, t_o / t_b, False, horizon)


def _estimation_job(args):
    config, mode, lam, days = args
    return run_estimation(config, mode, lam, days)


def _run_jobs(tasks, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_estimation_job, tasks))
    return [_estimation_job(t) for t in tasks]


def run_pair(config: Config, days=None, jobs=1):
    """Open-loop and backstepping runs from the same initial data, in that order."""
    return _run_jobs([(config, "open-loop", None, days), (config, "backstepping", None, days)], jobs)


def sweep(config: Config, lambda_values=(5e-7, 5e-6, 1e-5), days=None, jobs=1):
    """Backstepping runs over ``lambda_values`` with identical initialization."""
    if any(not v > 0 for v in lambda_values):
        raise ValueError("lambda values must be positive")
    return _run_jobs([(config, "backstepping", float(v), days) for v in lambda_values], jobs)


# -- annual cycle --------------------------------------------------------------------


@dataclass(frozen=True)
class AnnualChecks:
    periodic_drift: float  # max |H(t) - H(t - 1 yr)| over the final year, m
    H_min: float
    H_max: float
    snow_free_summer: bool
    snow_in_january: bool

    @property
    def periodic(self):
        return self.periodic_drift < 0.01

    @property
    def in_range(self):
        return 2.0 <= self.H_min and self.H_max <= 4.0


def annual_checks(result) -> AnnualChecks:
    """Periodicity and seasonal snow checks on the last two years of a run."""
    t = result.t
    if t[-1] < 2 * SECONDS_PER_YEAR - 1:
        raise ValueError("need at least two simulated years")
    last = t >= t[-1] - SECONDS_PER_YEAR - 1e-6
    H_prev = np.interp(t[last] - SECONDS_PER_YEAR, t, result.H)
    drift = float(np.max(np.abs(result.H[last] - H_prev)))
    phase = (t[last] % SECONDS_PER_YEAR) / SECONDS_PER_YEAR * 12.0  # months since Jan 1
    h = result.h[last]
    summer = (phase >= 6.0) & (phase < 8.0)
    january = phase < 1.0
    return AnnualChecks(drift, float(result.H[last].min()), float(result.H[last].max()),
                        bool(np.any(h[summer] == 0.0)), bool(np.all(h[january] > 0.0)))


# -- kernel checks --------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)


def _oracle_series(j, z, terms=80):
    """Plain float series in the original argument, separate from the library path."""
    from math import factorial
    return sum((z / 2.0) ** (2 * k + j) / (factorial(k) * factorial(k + j)) for k in range(terms)) / z**j


def kernel_checks(config: Config, n=200, H=None, lam_sign=1.0, seed=0):
    """Residual checks for kernels, transforms and Bessel ratios."""
    params, _, _, run = config
    g = GainParams.from_thermal(params, run.lam, run.c, run.epsilon)
    H = run.H0 if H is None else H
    out = []

    # kernel PDEs on an interior grid of the triangle
    xs = np.linspace(0.0, H, n + 2)[1:-1]
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    sel = Y > X
    steps = (1e-3, 5e-4, 2.5e-4)  # m
    for kind, fn in (("q", kernels._q), ("r", kernels._r)):
        scale = np.max(np.abs(fn(X[sel], Y[sel], g)))
        sign = lam_sign if kind == "q" else 1.0
        res = [np.max(np.abs(kernels.kernel_pde_residual(kind, X[sel], Y[sel], g, h, sign))) / scale
               for h in steps]
        out.append(Check(f"pde_{kind}", res[-1], 1e-6))
        out.append(Check(f"pde_{kind}_order_deficit", max(0.0, 1.8 - np.log2(res[0] / res[1])), 0.0))
        step = steps[1]
        xd = np.linspace(0.05 * H, 0.95 * H, 50)
        slope = kernels.diagonal_slope(kind, xd, g, step)
        target = -0.5 * g.a if kind == "q" else 0.5 * g.a
        out.append(Check(f"diagonal_{kind}", float(np.max(np.abs(slope - target))) / g.a, 1e-6))
        out.append(Check(f"boundary_{kind}_x0", float(np.max(np.abs(fn(0.0, xs, g)))), 0.0))

    # round trip on Chebyshev nodes
    rng = np.random.default_rng(seed)
    x = kernels.chebyshev_nodes(H, 400)
    pair = kernels.VolterraPair(x, H, g, "chebyshev")
    worst = 0.0
    for _ in range(20):
        a = rng.normal(size=4)
        u = a[0] + a[1] * np.sin(np.pi * x / H) + a[2] * np.cos(3 * x / H) + a[3] * (x / H) ** 2
        back = pair.from_target(pair.to_target(u))
        worst = max(worst, float(np.max(np.abs(back - u)) / np.max(np.abs(u))))
    out.append(Check("round_trip", worst, 1e-6))

    _, res = kernels.f_condition_residual(H, g)
    out.append(Check("f_condition", float(np.max(np.abs(res))) / float(np.max(np.abs(kernels._f(x, H, g)))), 1e-6))

    # Bessel ratios
    for j in (1, 2, 3):
        out.append(Check(f"bessel_I{j}_z0", abs(bessel.bessel_ratio_I(j, 0.0) - 1.0 / (2**j * np.prod(range(1, j + 1)))), 0.0))
    for j, z in ((1, 1.0), (2, 2.0)):
        out.append(Check(f"bessel_I{j}({z:g})", abs(bessel.bessel_ratio_I(j, z) / _oracle_series(j, z) - 1.0), 1e-12))
    j1 = _oracle_series(1, 1j).real  # J_1(z)/z = I_1(iz)/(iz)
    out.append(Check("bessel_J1(1)", abs(bessel.bessel_ratio_J(1, 1.0) / j1 - 1.0), 1e-12))
    big = np.linspace(0.0, 50.0, 501)
    finite = all(np.all(np.isfinite(f(j, big))) for f in (bessel.bessel_ratio_I, bessel.bessel_ratio_J)
                 for j in (1, 2, 3))
    out.append(Check("bessel_finite_to_z50", 0.0 if finite else np.inf, 0.0))
    return out
