"""Acceptance criteria A1-A9. Each test prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or as a script.
"""

import dataclasses
import functools
import sys
import time

import mpmath as mp
import numpy as np
import pytest

from icestate import experiments as ex
from icestate import kernels as K
from icestate.bessel import bessel_ratio_I, bessel_ratio_J
from icestate.kernels import GainParams, VolterraPair, chebyshev_nodes
from icestate.observer import decay_rate
from icestate.params import SECONDS_PER_DAY, Config
from icestate.plant import run_annual

CFG = Config()
G = GainParams.from_thermal(CFG.thermal, 5e-6, 3e-5, 1.0)
H = CFG.run.H0

_capsys = None


@pytest.fixture(autouse=True)
def _grab_capsys(capsys):
    global _capsys
    _capsys = capsys
    yield
    _capsys = None


def report(tag, ok, detail):
    line = f"{tag} {'PASS' if ok else 'FAIL'}  {detail}"
    if _capsys is not None:
        with _capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


@functools.lru_cache(maxsize=None)
def estimation(mode, lam):
    return ex.run_estimation(CFG, mode, lam)


def test_A1_kernel_pde_residuals():
    t0 = time.perf_counter()
    xs = np.linspace(0.0, H, 202)[1:-1]
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    m = Y > X
    x, y = X[m], Y[m]
    worst, orders = 0.0, []
    for kind, fn in (("q", K.kernel_q), ("r", K.kernel_r)):
        scale = np.abs(fn(x, y, G)).max()
        res = [np.abs(K.kernel_pde_residual(kind, x, y, G, h)).max() / scale for h in (1e-3, 5e-4, 2.5e-4)]
        worst = max(worst, res[-1])
        orders.append(np.log2(res[0] / res[1]))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and min(orders) >= 1.8 and elapsed < 5
    assert report("A1", ok, f"max residual / max|kernel| = {worst:.2e} (<= 1e-6), "
                  f"observed orders {orders[0]:.2f}, {orders[1]:.2f}, {elapsed:.2f} s")


def test_A2_transform_round_trip():
    t0 = time.perf_counter()
    x = chebyshev_nodes(H, 400)
    pair = VolterraPair(x, H, G, "chebyshev")
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(20):
        c = rng.normal(size=6)
        u = sum(c[j] * np.cos(j * np.pi * x / H + c[0]) for j in range(6))
        H_err = 1e-3 * rng.normal()
        back = pair.from_target(pair.to_target(u, H_err), H_err)
        worst = max(worst, np.abs(back - u).max() / np.abs(u).max())
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 10
    assert report("A2", ok, f"worst relative Linf round-trip error {worst:.2e} (<= 1e-6), {elapsed:.2f} s")


def test_A3_bessel_oracles():
    mp.mp.dps = 40
    exact = all(bessel_ratio_I(j, 0.0) == 1.0 / (2**j * np.prod(range(1, j + 1))) for j in (1, 2, 3))
    errs = [abs(bessel_ratio_I(1, 1.0) / float(mp.besseli(1, 1)) - 1),
            abs(bessel_ratio_I(2, 2.0) / float(mp.besseli(2, 2) / 4) - 1),
            abs(bessel_ratio_J(1, 1.0) / float(mp.besselj(1, 1)) - 1)]
    ok = exact and max(errs) <= 1e-12
    assert report("A3", ok, f"z = 0 values exact: {exact}; I1(1), I2(2), J1(1) rel. errors "
                  + ", ".join(f"{e:.1e}" for e in errs) + " (<= 1e-12)")


def test_A4_decay_rate_salinity_free():
    t0 = time.perf_counter()
    run = ex.run_verification(CFG, "backstepping", 5e-6, days=10.0)
    rate = decay_rate(run.t, run.Phi, window=(SECONDS_PER_DAY, 10 * SECONDS_PER_DAY))
    bound = 0.9 * min(5e-6, 3e-5)
    after = run.t >= 3600.0
    rises = np.diff(run.Phi[after])
    monotone = bool(np.all(rises <= 0))
    elapsed = time.perf_counter() - t0
    worst_rise = rises.max() if rises.size else 0.0
    ok = rate >= bound and monotone and elapsed < 60
    assert report("A4", ok, f"fitted rate {rate:.3e} 1/s (>= {bound:.2e}); Phi nonincreasing after 1 h: "
                  f"{monotone} (largest one-step rise {worst_rise:.3g}); {elapsed:.1f} s")


def test_A5_speedup():
    t0 = time.perf_counter()
    s = ex.speedup(estimation("open-loop", 5e-6), estimation("backstepping", 5e-6))
    elapsed = time.perf_counter() - t0
    bound = " (lower bound)" if s.lower_bound else ""
    ok = s.ratio >= 3 and elapsed < 120
    assert report("A5", ok, f"t10 ratio open-loop / backstepping = {s.ratio:.2f}{bound} (>= 3), {elapsed:.1f} s")


def test_A6_annual_cycle():
    t0 = time.perf_counter()
    cfg = dataclasses.replace(CFG, run=dataclasses.replace(CFG.run, dt=3600.0))
    c = ex.annual_checks(run_annual(10, cfg))
    elapsed = time.perf_counter() - t0
    ok = c.periodic and c.in_range and c.snow_free_summer and c.snow_in_january and elapsed < 120
    assert report("A6", ok, f"year-10 drift {100 * c.periodic_drift:.2f} cm (< 1); H in [{c.H_min:.2f}, "
                  f"{c.H_max:.2f}] m (within [2, 4]); snow-free Jul-Aug {c.snow_free_summer}, "
                  f"snow in Jan {c.snow_in_january}; {elapsed:.1f} s")


def test_A7_day3_convergence():
    run = estimation("backstepping", 5e-6)
    i3 = int(np.argmin(np.abs(run.t_days - 3.0)))
    linf = run.Linf[i3] / run.Linf[0]
    peak = np.abs(run.H_tilde).max()
    back = abs(run.H_tilde[i3]) / peak
    ok = linf < 0.1 and run.H_tilde[0] == 0.0 and back < 0.1
    assert report("A7", ok, f"Linf(3 d)/Linf(0) = {linf:.3f} (< 0.1); H_tilde(0) = {run.H_tilde[0]:g}; "
                  f"|H_tilde(3 d)|/max|H_tilde| = {back:.3f} (< 0.1)")


def test_A8_overshoot_ordering():
    over = [estimation("backstepping", lam).overshoot for lam in (1e-5, 5e-6, 5e-7)]
    ok = over[0] > over[1] > over[2]
    assert report("A8", ok, "peak overestimate for lambda = 1e-5, 5e-6, 5e-7: "
                  + ", ".join(f"{v:.3f} C" for v in over) + " (strictly decreasing)")


def test_A9_open_loop_copy():
    run = ex.run_verification(CFG, "open-loop", days=30.0, matched=True)
    dev = max(run.Linf.max(), np.abs(run.H_tilde).max())
    assert report("A9", dev < 1e-8, f"max |T_hat - T_i|, |H_tilde| over 30 days = {dev:.1e} (< 1e-8)")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_A"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
