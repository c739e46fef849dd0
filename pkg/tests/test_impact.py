from __future__ import annotations

import numpy as np
import pytest

from hawkes_impact.impact import (
    decompose_pmi_tmi,
    fit_power_law,
    gamma_concavity_violation,
    gamma_monotonicity_violation,
    impact_from_solution,
    peak_sweep,
    scaled_impact,
    sqrt_law_gamma_check,
    sqrt_law_volume_check,
    large_gamma_constant,
)
from hawkes_impact.params import MacroParams, Schedule
from hawkes_impact.reaction import ReactionFn
from hawkes_impact.volterra import VolterraGrid, solve_r_star


def curve_for(params, phi, horizon=2.0, h=1 / 1024):
    sol = solve_r_star(params, phi, None, VolterraGrid.from_horizon(horizon, h))
    return sol, impact_from_solution(sol)


def test_zero_gamma(square):
    sol, c = curve_for(MacroParams(0.5, gamma=0.0), square)
    assert np.all(c.mi == 0)
    d = decompose_pmi_tmi(c, sol)
    assert d.pmi == 0 and np.all(d.tmi == 0) and not d.tail_unresolved


def test_singular_part_matches_signal(square, base):
    sol, c = curve_for(base, square)
    assert c.mi[0] == 0
    assert np.max(np.abs(c.singular - sol.u * base.lam / base.kappa)) < 1e-10


def test_small_time_expansion(square):
    p = MacroParams(0.5, gamma=0.3, kappa=1.7, lam=0.8)
    sol, c = curve_for(p, square, horizon=1e-4, h=1e-7)
    t = c.times[-1]
    approx = p.kappa * p.gamma * (t + t**0.5 / (p.lam * 0.5))
    assert c.mi[-1] == pytest.approx(approx, rel=2e-3)


def test_profile_shape(square, base):
    sol, c = curve_for(base, square)
    t_peak, _ = c.peak()
    assert abs(t_peak - 1.0) < 0.01
    after = c.mi[c.times >= 1.1]
    assert np.all(np.diff(after) < 0)


def test_pmi_estimate_shrinks_with_horizon(square, base):
    pmis = []
    for H in (2.0, 4.0, 8.0):
        sol, c = curve_for(base, square, horizon=H, h=1 / 256)
        d = decompose_pmi_tmi(c, sol)
        pmis.append(d.pmi)
        assert d.tail_unresolved
    assert pmis[0] > pmis[1] > pmis[2]
    sol, c = curve_for(base, square, horizon=2.0, h=1 / 256)
    tmi = decompose_pmi_tmi(c, sol).tmi
    j = np.searchsorted(c.times, 1.05)
    assert tmi[j] > 0 and tmi[j + 1] < tmi[j]


def test_decomposition_needs_horizon(square, base):
    sol, c = curve_for(base, square, horizon=1.0)
    with pytest.raises(ValueError):
        decompose_pmi_tmi(c, sol)


def test_fit_power_law_exact():
    x = np.geomspace(0.1, 10, 7)
    fit = fit_power_law(x, 0.3 * x**0.63)
    assert fit.exponent == pytest.approx(0.63)
    assert fit.prefactor == pytest.approx(0.3)
    assert fit.r2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_power_law([1.0], [1.0])


def test_large_gamma_constant_value():
    assert large_gamma_constant(0.5, 1.0, 0.25) == pytest.approx(1 + 0.5 * 2 / np.pi)


def test_scaled_impact_matches_direct(square, base):
    for g in (0.3, 3.0):
        _, c = curve_for(base.with_gamma(g), square, horizon=1.0, h=1 / 4096)
        direct = c.mi[1024]
        assert scaled_impact(base, square, g, 0.25) == pytest.approx(direct, rel=2e-3)


def test_gamma_law_trend(square, base):
    rep = sqrt_law_gamma_check(base, square, [1e2, 1e3, 1e4])
    assert abs(rep.ratios[-1] - 1) < abs(rep.ratios[0] - 1)
    assert 0.45 <= rep.top_decade_slope <= 0.55


def test_volume_law(square, base):
    _, c = curve_for(base.with_gamma(1e-4), square, horizon=0.02, h=1e-6)
    rep = sqrt_law_volume_check(c, 1e-4, 0.02)
    assert rep.status == "ok" and 0.45 < rep.fit.exponent < 0.55
    _, c = curve_for(MacroParams(0.5, gamma=0.0), square, horizon=1.0)
    assert sqrt_law_volume_check(c).status == "degenerate"
    with pytest.raises(ValueError):
        sqrt_law_volume_check(c, 2.0, 3.0)


def test_peak_sweep(square, base):
    sweep = peak_sweep(base, square, [0.1, 0.3, 1.0], h=1 / 512)
    assert np.all(np.diff(sweep.peaks) > 0)
    assert np.allclose(sweep.peak_times, 1.0)


def test_gamma_shape_helpers(square):
    grid = VolterraGrid.from_horizon(2.0, 1 / 512)
    curves = [impact_from_solution(solve_r_star(MacroParams(0.5, gamma=g), square, None, grid))
              for g in (0.1, 0.2, 0.4)]
    assert gamma_monotonicity_violation(curves) <= 0
    assert gamma_concavity_violation(curves) <= 1e-12


def test_constant_extended_forcing(square, base):
    sol = solve_r_star(base, square, Schedule.constant(extended=True), VolterraGrid.from_horizon(3.0, 1 / 256))
    assert np.all(sol.forcing == base.gamma)
