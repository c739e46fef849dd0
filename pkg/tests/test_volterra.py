from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hawkes_impact.params import MacroParams, Schedule
from hawkes_impact.reaction import ReactionFn
from hawkes_impact.volterra import (
    VolterraGrid,
    asymptotic_level_check,
    linear_oracle,
    richardson_order,
    scaling_collapse_check,
    singular_weights,
    solve_r_star,
)


def test_grid():
    g = VolterraGrid.from_horizon(2.0, 0.000244)
    assert g.h * g.n_steps == pytest.approx(2.0, abs=1e-12)
    assert g.times[-1] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        VolterraGrid(0.1, 1)
    with pytest.raises(ValueError):
        VolterraGrid.from_horizon(-1.0, 0.1)


def test_weight_examples():
    g = VolterraGrid(0.01, 10)
    w = singular_weights(g, 0.5)
    assert w[1] == pytest.approx(0.01**0.5 / 0.5)
    assert w[4] == pytest.approx((0.04**0.5 - 0.03**0.5) / 0.5)
    assert w[4] == pytest.approx(0.0536, abs=1e-4)


@given(st.floats(0.05, 0.95), st.integers(2, 300))
def test_weights_telescope(alpha, n):
    g = VolterraGrid(1.0 / n, n)
    w = singular_weights(g, alpha)
    assert w.sum() == pytest.approx(1.0 / (1 - alpha), rel=1e-12)
    assert np.all(np.diff(w[1:]) < 0)


def test_zero_forcing(square):
    sol = solve_r_star(MacroParams(0.5, gamma=0.0), square, None, VolterraGrid.from_horizon(1, 1 / 256))
    assert np.all(sol.r_star == 0) and np.all(sol.u == 0)


def test_solution_invariants(square, base):
    sol = solve_r_star(base, square, None, VolterraGrid.from_horizon(2, 1 / 1024))
    assert sol.r_star[0] == 0.0
    assert np.allclose(sol.r_star, square(sol.u), rtol=0, atol=1e-15)
    assert np.all(sol.r_star >= 0)
    assert np.all(sol.r_star <= sol.a_priori_cap() + 1e-15)
    assert sol.residual() < 1e-12


@pytest.mark.parametrize("alpha", [0.3, 0.5])
def test_linear_oracle(alpha):
    p = MacroParams(alpha, gamma=0.3)
    g = VolterraGrid.from_horizon(1.0, 1 / 4096)
    sol = solve_r_star(p, ReactionFn.linear(1.0), None, g)
    ex = linear_oracle(p, 1.0, g.times)
    assert np.max(np.abs(sol.r_star - ex)) / np.max(ex) < 5e-3


def test_linear_oracle_error_shrinks_with_step():
    p = MacroParams(0.7, gamma=0.3)
    errs = []
    for h in (1 / 512, 1 / 2048, 1 / 8192):
        g = VolterraGrid.from_horizon(1.0, h)
        sol = solve_r_star(p, ReactionFn.linear(1.0), None, g)
        errs.append(np.max(np.abs(sol.r_star - linear_oracle(p, 1.0, g.times))))
    assert errs[0] > errs[1] > errs[2]


def test_table_reaction_matches_power_on_fine_table(base):
    xs = np.linspace(0, 3, 3001)
    table = ReactionFn.table(xs, xs**2 + 1e-12 * np.arange(len(xs)))
    g = VolterraGrid.from_horizon(1.0, 1 / 512)
    a = solve_r_star(base, table, None, g)
    b = solve_r_star(base, ReactionFn.power(1, 2), None, g)
    assert np.max(np.abs(a.r_star - b.r_star)) < 1e-5


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(1.05, 2.0))
def test_gamma_monotone_gap(g1, ratio):
    grid = VolterraGrid.from_horizon(1.5, 1 / 256)
    phi = ReactionFn.power(1, 2)
    s1 = solve_r_star(MacroParams(0.5, gamma=g1), phi, None, grid)
    s2 = solve_r_star(MacroParams(0.5, gamma=g1 * ratio), phi, None, grid)
    m = grid.times <= 1.0
    assert np.all((s1.forcing - s1.r_star)[m] <= (s2.forcing - s2.r_star)[m] + 1e-12)


def test_gamma_convexity(square):
    grid = VolterraGrid.from_horizon(2.0, 1 / 512)
    sols = [solve_r_star(MacroParams(0.5, gamma=g), square, None, grid) for g in (0.2, 0.4, 0.6)]
    m = grid.times <= 1.0
    r = [s.r_star[m] for s in sols]
    assert np.all(r[1] <= 0.5 * (r[0] + r[2]) + 1e-12)
    u = [s.u for s in sols]
    assert np.all(u[1] >= 0.5 * (u[0] + u[2]) - 1e-12)


def test_collapse_identity_and_errors(square):
    grid = VolterraGrid.from_horizon(1.0, 1 / 256)
    s1 = solve_r_star(MacroParams(0.5, gamma=1.0), square, None, grid)
    assert scaling_collapse_check(square, 1.0, s1, s1) == 0.0
    with pytest.raises(ValueError):
        scaling_collapse_check(ReactionFn.linear(1), 1.0, s1, s1)
    long = solve_r_star(MacroParams(0.5, gamma=1.0), square, None, VolterraGrid.from_horizon(2.0, 1 / 256))
    with pytest.raises(ValueError):
        scaling_collapse_check(square, 2.0, long, s1)


def test_collapse_small(square):
    sol1 = solve_r_star(MacroParams(0.5, gamma=1.0), square, Schedule.constant(extended=True),
                        VolterraGrid.from_horizon(4.0, 1 / 1024))
    solg = solve_r_star(MacroParams(0.5, gamma=4.0), square, None, VolterraGrid.from_horizon(1.0, 1 / 1024))
    assert scaling_collapse_check(square, 4.0, sol1, solg) < 1e-2


def test_richardson_order(square, base):
    assert richardson_order(base, square, None, VolterraGrid.from_horizon(1.0, 1 / 256)) > 0.4


def test_tail_level_linear():
    rep = asymptotic_level_check(MacroParams(0.5, gamma=1.0), ReactionFn.linear(1.0))
    assert rep.target == pytest.approx(1 / np.pi)
    assert rep.status == "ok"
    assert rep.rel_error < 0.05


def test_tail_level_scales_with_inverse(square):
    a = asymptotic_level_check(MacroParams(0.5, gamma=1.0), square)
    b = asymptotic_level_check(MacroParams(0.5, gamma=4.0), square)
    assert b.target / a.target == pytest.approx(2.0)
    assert b.c_hat / a.c_hat == pytest.approx(2.0, rel=0.05)
