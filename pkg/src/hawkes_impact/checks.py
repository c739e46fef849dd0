"""Reduced-scale invariant suite behind ``hawkes-impact check``."""

from __future__ import annotations

import math

import numpy as np

from .bounds import impact_bounds
from .impact import gamma_concavity_violation, gamma_monotonicity_violation, impact_from_solution
from .params import MacroParams, MicroParams, Schedule, zeta_measure_cdf
from .reaction import ReactionFn, upsilon
from .simulation import monte_carlo_rescaled_impact, price_paths, simulate_path
from .special import mittag_leffler
from .volterra import VolterraGrid, linear_oracle, scaling_collapse_check, solve_r_star

__all__ = ["run_checks"]

SQUARE = ReactionFn.power(1.0, 2.0)


def _ml_exp():
    v = mittag_leffler((1.0, 1.0), 1.0)
    return abs(v - math.e) < 1e-12, f"E_11(1)={v:.12f}"


def _linear_oracle():
    p = MacroParams(0.5, gamma=0.3)
    grid = VolterraGrid.from_horizon(1.0, 1 / 1024)
    sol = solve_r_star(p, ReactionFn.linear(1.0), None, grid)
    ex = linear_oracle(p, 1.0, grid.times)
    err = np.max(np.abs(sol.r_star - ex)) / np.max(np.abs(ex))
    return err < 5e-3, f"sup_rel_err={err:.2e}"


def _sandwich():
    p = MacroParams(0.5, gamma=0.1)
    grid = VolterraGrid.from_horizon(2.0, 1 / 512)
    mi = impact_from_solution(solve_r_star(p, SQUARE, None, grid)).mi
    lo, up = impact_bounds(p, SQUARE, None, grid)
    worst = max(np.max(lo.mi - mi), np.max(mi - up.mi))
    return worst <= 1e-12, f"max_violation={worst:.2e}"


def _gamma_shape():
    grid = VolterraGrid.from_horizon(2.0, 1 / 512)
    curves = [
        impact_from_solution(solve_r_star(MacroParams(0.5, gamma=g), SQUARE, None, grid))
        for g in (0.1, 0.2, 0.4, 0.8)
    ]
    mono = gamma_monotonicity_violation(curves)
    conc = gamma_concavity_violation(curves)
    return mono <= 1e-6 and conc <= 1e-6, f"monotone={mono:.2e} concave={conc:.2e}"


def _collapse():
    gamma = 2.0
    stretch = gamma ** (-upsilon(0.5, 2.0))
    sol1 = solve_r_star(MacroParams(0.5, gamma=1.0), SQUARE, Schedule.constant(extended=True),
                        VolterraGrid.from_horizon(stretch, 1 / 512))
    solg = solve_r_star(MacroParams(0.5, gamma=gamma), SQUARE, None, VolterraGrid.from_horizon(1.0, 1 / 512))
    dev = scaling_collapse_check(SQUARE, gamma, sol1, solg)
    return dev < 1e-2, f"deviation={dev:.2e}"


def _measure_limit():
    macro = MacroParams(0.5)
    gaps = [abs(zeta_measure_cdf(MicroParams.from_macro(macro, T), 1.0) - 2.0) for T in (1e3, 1e4, 1e5)]
    ok = gaps[0] > gaps[1] > gaps[2]
    return ok, "gaps=" + "/".join(f"{g:.3g}" for g in gaps)


def _paths(seed):
    micro = MicroParams.from_macro(MacroParams(0.5, gamma=0.3), 50.0)
    nodes = np.linspace(0.0, 2.0, 41)
    dom = sig = 0
    for i in range(200):
        path = simulate_path(micro, SQUARE, 2.0, seed, i, with_ab=True)
        dom += not path.counts_dominated()
        P, EP = price_paths(path, nodes)
        sig += bool(np.any(P < EP - 1e-9))
    return dom, sig


def _reproducible(seed):
    micro = MicroParams.from_macro(MacroParams(0.5, gamma=0.3), 200.0)
    nodes = np.linspace(0.0, 2.0, 21)
    a = monte_carlo_rescaled_impact(micro, SQUARE, 16, nodes, seed, n_jobs=1)
    b = monte_carlo_rescaled_impact(micro, SQUARE, 16, nodes, seed, n_jobs=3)
    return bool(np.array_equal(a.mean, b.mean) and np.array_equal(a.stderr, b.stderr)), "jobs 1 vs 3"


def run_checks(seed: int = 12345) -> list[tuple[str, str, str]]:
    """``(name, status, detail)`` rows; status is PASS, FAIL or INFO.

    INFO rows report properties that are known not to hold pathwise and do
    not count as failures.
    """
    rows = []
    for name, fn in [
        ("ml_exponential", _ml_exp),
        ("linear_oracle", _linear_oracle),
        ("bound_sandwich", _sandwich),
        ("gamma_monotone_concave", _gamma_shape),
        ("scaling_collapse", _collapse),
        ("measure_limit", _measure_limit),
    ]:
        ok, detail = fn()
        rows.append((name, "PASS" if ok else "FAIL", detail))
    dom, sig = _paths(seed)
    rows.append(("count_dominance", "PASS" if dom == 0 else "FAIL", f"violating_paths={dom}/200"))
    rows.append(("signal_nonnegative", "INFO", f"violating_paths={sig}/200"))
    ok, detail = _reproducible(seed)
    rows.append(("thread_reproducibility", "PASS" if ok else "FAIL", detail))
    return rows
