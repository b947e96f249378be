import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icestate.numerics import (SolverError, apply_operator, gradient_at_end, gradient_at_start,
                               heat_step_dirichlet, layer_operator, solve_tridiagonal)


def test_tridiagonal_against_dense():
    rng = np.random.default_rng(0)
    n = 30
    lo, up = rng.normal(size=n - 1), rng.normal(size=n - 1)
    d = 4.0 + rng.random(n)
    b = rng.normal(size=(n, 2))
    A = np.diag(d) + np.diag(lo, -1) + np.diag(up, 1)
    np.testing.assert_allclose(solve_tridiagonal(lo, d, up, b), np.linalg.solve(A, b), rtol=1e-12)


def test_tridiagonal_singular():
    with pytest.raises(SolverError):
        solve_tridiagonal(np.zeros(2), np.zeros(3), np.zeros(2), np.ones(3))


def test_one_sided_gradients_exact_for_quadratics():
    x = np.linspace(0.0, 2.0, 21)
    T = 3 * x**2 - x + 1
    assert gradient_at_end(T, 2.0) == pytest.approx(11.0, rel=1e-12)
    assert gradient_at_start(T, 2.0) == pytest.approx(-1.0, rel=1e-12)


def test_operator_exact_for_quadratic_diffusion():
    n, L = 11, 2.0
    x = np.linspace(0, L, n)
    a, b, c = layer_operator(0.5, 0.0, L, n)
    out = apply_operator(a, b, c, x**2)
    np.testing.assert_allclose(out[1:-1], 1.0, rtol=1e-12)
    assert out[0] == out[-1] == 0.0


def test_steady_linear_profile_is_preserved():
    T = np.linspace(-20.0, -1.8, 50)
    out = heat_step_dirichlet(T, 3.0, 3.0, 600.0, 1e-6, np.zeros(50), -20.0, -1.8)
    np.testing.assert_allclose(out, T, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.5, 1.0), st.floats(-1e-6, 1e-6))
def test_discrete_max_principle(seed, theta, growth):
    rng = np.random.default_rng(seed)
    T = rng.uniform(-30.0, -2.0, 40)
    left, right = T[0], T[-1]
    dt = 60.0 if theta < 1 else 3600.0
    out = T
    for _ in range(5):
        out = heat_step_dirichlet(out, 2.0, 2.0 + dt * growth, dt, 1e-6, np.zeros(40), left, right, theta)
    lo, hi = min(T.min(), left, right), max(T.max(), left, right)
    assert out.min() >= lo - 1e-9 and out.max() <= hi + 1e-9
