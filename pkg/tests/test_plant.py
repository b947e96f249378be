import dataclasses

import numpy as np
import pytest

from icestate.params import (SECONDS_PER_MONTH, SECONDS_PER_YEAR, Config, ForcingSchedule,
                             SalinityParams, ThermalParams, atmospheric_flux, forcing_at)
from icestate.plant import (GridConfig, IceVanished, PlantState, initial_plant_state,
                            initial_surface_temperature, interface_flux_residual, measure,
                            run_annual, snowfall, solve_surface_temperature, step_plant)

P = ThermalParams()
SAL = SalinityParams()
SCHED = ForcingSchedule()
F_JAN = atmospheric_flux(forcing_at(SCHED, 0.0))


def january(grid=GridConfig(), a=1.0):
    return initial_plant_state(P, grid, F_JAN, 3.0, 0.3, a=a)


def advance(state, grid, n, sal=SAL):
    for _ in range(n):
        state = step_plant(state, forcing_at(SCHED, state.t), P, grid, sal, snowfall(state.t))
    return state


def test_initial_surface_temperature_frozen():
    assert initial_surface_temperature(F_JAN, P, 3.0, 0.3) == pytest.approx(-18.950731749691226, abs=1e-10)


def test_initial_state_shape():
    s = january()
    assert s.T_i.size == 120 and s.T_s.size == 24
    assert s.T_i[-1] == P.Tm2
    assert s.T_s[-1] == pytest.approx(s.T_i[0])
    assert s.T_surface == s.T_s[0]
    # the unperturbed column carries one flux through snow and ice
    assert abs(interface_flux_residual(january(a=0.0), P)) < 1e-9


def test_measure():
    s = january()
    m = measure(s)
    assert m.Y1 == 3.0 and m.Y2 == s.T_i[0]
    noisy = measure(s, 0.1, np.random.default_rng(0))
    assert noisy.Y1 != 3.0
    assert measure(s, 0.1, np.random.default_rng(0)) == noisy


def test_snowfall():
    assert snowfall(6.5 * SECONDS_PER_MONTH) == 0.0  # July
    assert snowfall(7.5 * SECONDS_PER_MONTH) == 0.0  # August
    t = np.arange(0.0, SECONDS_PER_YEAR, 3600.0)
    total = sum(snowfall(v) for v in t) * 3600.0
    assert total == pytest.approx(0.3, rel=1e-3)
    rates = [1e-8] * 12
    assert snowfall(6.5 * SECONDS_PER_MONTH, rates=rates) == 1e-8
    with pytest.raises(ValueError):
        snowfall(0.0, annual_depth=-1.0)
    with pytest.raises(ValueError):
        snowfall(0.0, rates=[1.0] * 11)


def test_surface_solver_root_and_melt_branch():
    T, melt = solve_surface_temperature(150.0, 10.0, -5.0, P)
    assert melt == 0.0
    assert 150.0 - P.sigma * (T + 273.0) ** 4 + 10.0 - 5.0 * T == pytest.approx(0.0, abs=1e-8)
    T, melt = solve_surface_temperature(500.0, 0.0, -5.0, P)
    assert T == P.Tm1 and melt < 0.0


def test_step_invariants():
    grid = GridConfig()
    s = advance(january(grid), grid, 72)
    assert s.T_i[-1] == P.Tm2
    assert abs(interface_flux_residual(s, P)) < 1e-8
    assert s.T_s[-1] == s.T_i[0]
    assert np.all(s.T_i < 0) and np.all(np.isfinite(s.T_s))
    assert s.t == 72 * 600.0


def test_surface_balance_holds_after_step():
    grid = GridConfig()
    s = advance(january(grid), grid, 10)
    dx = s.h / (grid.N_s - 1)
    flux = P.k_s * (-3 * s.T_s[0] + 4 * s.T_s[1] - s.T_s[2]) / (2 * dx)
    R = F_JAN - P.I0 - P.sigma * (s.T_surface + 273.0) ** 4 + flux
    assert abs(R) < 1e-6


def test_ice_vanishes():
    grid = GridConfig(dt=3600.0)
    thin = dataclasses.replace(january(grid), H=0.01)
    with pytest.raises(IceVanished):
        hot = dataclasses.replace(P, F_w=5000.0)
        s = thin
        for _ in range(10):
            s = step_plant(s, forcing_at(SCHED, s.t), hot, grid, SAL)


def test_self_convergence_day30():
    xs = np.linspace(0, 1, 61)
    prof = []
    for k in range(3):
        grid = GridConfig(N_s=max(16, 12 * 2**k), N_i=60 * 2**k, dt=1200.0 / 2**k)
        s = advance(january(grid), grid, int(30 * 86400 / grid.dt))
        prof.append(np.interp(xs, np.linspace(0, 1, s.T_i.size), s.T_i))
    d1 = np.abs(prof[0] - prof[1]).max()
    d2 = np.abs(prof[1] - prof[2]).max()
    rate = d1 / d2
    assert rate > 1.8  # at least first order
    est = d1 * rate / (rate - 1)  # Richardson estimate of the coarse error
    assert d1 < 2 * est


def test_run_annual_zero_and_records():
    cfg = Config()
    r0 = run_annual(0, cfg)
    assert r0.t.size == 1 and r0.H[0] == cfg.run.H0
    cfg = dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, dt=3600.0))
    r = run_annual(1, cfg)
    assert r.t.size == 366
    assert r.profiles.shape == (366, 11)
    assert not r.assumption_violations
    with pytest.raises(ValueError):
        run_annual(-1, cfg)


def test_warmer_ocean_gives_thinner_ice():
    base = dataclasses.replace(Config().run, dt=3600.0)
    H = []
    for Fw in (2.0, 4.0):
        cfg = Config(thermal=dataclasses.replace(P, F_w=Fw), run=base)
        H.append(run_annual(1, cfg).H[-1])
    assert H[1] < H[0]
