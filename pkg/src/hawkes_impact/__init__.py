"""Hawkes market-impact model with a reactive trader, its Volterra limit and a path simulator."""

from __future__ import annotations

__version__ = "0.1.0"

from .bounds import AdomianSeries, adomian, forcing_integral, impact_bounds
from .impact import (
    ImpactCurve,
    decompose_pmi_tmi,
    fit_power_law,
    impact_from_solution,
    peak_sweep,
    sqrt_law_gamma_check,
    sqrt_law_volume_check,
)
from .params import KernelFamily, MacroParams, MicroParams, Schedule, xi_T, zeta_measure_cdf, zeta_T
from .reaction import ReactionFn, upsilon
from .simulation import (
    EventPath,
    ResourceCapError,
    monte_carlo_rescaled_impact,
    pathwise_impact,
    price_paths,
    simulate_path,
)
from .special import MLParams, gamma_fn, linear_volterra_solution, mittag_leffler
from .volterra import (
    VolterraGrid,
    VolterraSolution,
    asymptotic_level_check,
    scaling_collapse_check,
    singular_weights,
    solve_r_star,
)

__all__ = [
    "AdomianSeries",
    "EventPath",
    "ImpactCurve",
    "KernelFamily",
    "MLParams",
    "MacroParams",
    "MicroParams",
    "ReactionFn",
    "ResourceCapError",
    "Schedule",
    "VolterraGrid",
    "VolterraSolution",
    "adomian",
    "asymptotic_level_check",
    "decompose_pmi_tmi",
    "fit_power_law",
    "forcing_integral",
    "gamma_fn",
    "impact_bounds",
    "impact_from_solution",
    "linear_volterra_solution",
    "mittag_leffler",
    "monte_carlo_rescaled_impact",
    "pathwise_impact",
    "peak_sweep",
    "price_paths",
    "scaling_collapse_check",
    "simulate_path",
    "singular_weights",
    "solve_r_star",
    "sqrt_law_gamma_check",
    "sqrt_law_volume_check",
    "upsilon",
    "xi_T",
    "zeta_T",
    "zeta_measure_cdf",
]
