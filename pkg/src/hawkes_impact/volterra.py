"""Macroscopic fixed point for the trader's limiting rate.

On ``[0, H]`` we solve::

    u(t) = (kappa / lam) int_0^t (t - s)^-alpha (gamma f(s) - r(s)) ds,
    r(t) = Phi(u(t)),

by product integration on a uniform grid: the singular kernel is integrated
exactly over each cell, ``f`` enters through its exact cell averages and
``r`` through its left-endpoint value, except in the newest cell where the
unknown ``r_n`` is used (implicit step, solved by bisection).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .params import MacroParams, Schedule
from .reaction import ReactionFn, upsilon
from .special import gamma_fn, linear_volterra_solution

__all__ = [
    "LevelReport",
    "VolterraGrid",
    "VolterraSolution",
    "asymptotic_level_check",
    "forcing_cells",
    "linear_oracle",
    "plateau_level",
    "richardson_order",
    "scaling_collapse_check",
    "singular_weights",
    "solve_r_star",
]


@dataclass(frozen=True)
class VolterraGrid:
    h: float
    n_steps: int

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise ValueError(f"step must be > 0, got {self.h}")
        if self.n_steps < 2:
            raise ValueError(f"need at least 2 steps, got {self.n_steps}")

    @classmethod
    def from_horizon(cls, horizon: float, h: float) -> VolterraGrid:
        """Grid on ``[0, horizon]`` with step as close to ``h`` as divides it."""
        if not horizon > 0 or not h > 0:
            raise ValueError("horizon and step must be > 0")
        n = max(2, int(round(horizon / h)))
        return cls(horizon / n, n)

    @property
    def horizon(self) -> float:
        return self.h * self.n_steps

    @property
    def times(self) -> np.ndarray:
        return self.h * np.arange(self.n_steps + 1)

    def refine(self, k: int = 2) -> VolterraGrid:
        return VolterraGrid(self.h / k, self.n_steps * k)


def singular_weights(grid: VolterraGrid, alpha: float) -> np.ndarray:
    """``w[k] = int_{(k-1)h}^{kh} s^-alpha ds`` for ``k = 0..n`` (``w[0] = 0``)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    p = (grid.h * np.arange(grid.n_steps + 1)) ** (1.0 - alpha) / (1.0 - alpha)
    w = np.zeros(grid.n_steps + 1)
    w[1:] = np.diff(p)
    return w


def forcing_cells(schedule: Schedule, grid: VolterraGrid) -> np.ndarray:
    return schedule.cell_averages(grid.times)


def regular_nodes(v: np.ndarray, h: float) -> np.ndarray:
    """Plain integral of node values under the same cell rule as ``conv_nodes``."""
    out = np.zeros_like(v)
    if len(v) > 1:
        out[1] = v[1]
        out[2:] = np.cumsum(v)[:-2] + v[2:]
    return h * out


def regular_cells(c: np.ndarray, h: float) -> np.ndarray:
    return h * np.concatenate([[0.0], np.cumsum(c)])


@dataclass(frozen=True, eq=False)
class VolterraSolution:
    grid: VolterraGrid
    params: MacroParams
    phi: ReactionFn
    schedule: Schedule
    r_star: np.ndarray
    u: np.ndarray
    forcing: np.ndarray
    force_cells: np.ndarray
    weights: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def a_priori_cap(self) -> np.ndarray:
        p = self.params
        t = self.times
        return self.phi(p.kappa * p.gamma * self.schedule.sup_norm * t ** (1 - p.alpha) / (p.lam * (1 - p.alpha)))

    def residual(self) -> float:
        """Sup of ``|u - scale (conv(force) - conv(r))|`` over the nodes."""
        p = self.params
        rhs = (p.kappa / p.lam) * (
            kern.conv_cells(self.force_cells, self.weights) - kern.conv_nodes(self.r_star, self.weights)
        )
        return float(np.max(np.abs(self.u - rhs)))

    def to_csv_rows(self):
        return np.column_stack([self.times, self.forcing, self.u, self.r_star])


def solve_r_star(
    params: MacroParams,
    phi: ReactionFn,
    schedule: Schedule | None,
    grid: VolterraGrid,
) -> VolterraSolution:
    schedule = schedule if schedule is not None else Schedule.constant()
    w = singular_weights(grid, params.alpha)
    fc = params.gamma * forcing_cells(schedule, grid)
    code, p1, p2, xs, ys = phi.packed()
    u, r = kern.solve_nonlinear(fc, w, params.kappa / params.lam, code, p1, p2, xs, ys)
    return VolterraSolution(
        grid=grid,
        params=params,
        phi=phi,
        schedule=schedule,
        r_star=r,
        u=u,
        forcing=params.gamma * np.asarray(schedule(grid.times), dtype=float),
        force_cells=fc,
        weights=w,
    )


def linear_oracle(params: MacroParams, slope: float, t) -> np.ndarray:
    """Closed-form ``r*`` for ``Phi(x) = slope x`` and ``f = 1``."""
    rate = slope * params.kappa * gamma_fn(1 - params.alpha) / params.lam
    return params.gamma - linear_volterra_solution(params.gamma, rate, params.alpha, t)


def scaling_collapse_check(phi: ReactionFn, gamma: float, sol1: VolterraSolution, solg: VolterraSolution) -> float:
    """Max of ``|r*(gamma, t) - gamma r*(1, gamma^-ups t)| / gamma`` on ``solg``'s nodes."""
    if phi.kind != "power" or not phi.beta > 1:
        raise ValueError("the scaling identity needs a power reaction with beta > 1")
    if not (sol1.schedule.is_constant and solg.schedule.is_constant):
        raise ValueError("the scaling identity needs a constant schedule")
    for sol in (sol1, solg):
        if sol.grid.horizon > 1.0 + 1e-12 and not sol.schedule.extended:
            raise ValueError("solutions beyond t = 1 need the extended constant schedule")
    if sol1.params.gamma != 1.0:
        raise ValueError("sol1 must be solved at gamma = 1")
    ups = upsilon(sol1.params.alpha, phi.beta)
    stretched = gamma ** (-ups) * solg.times
    if stretched[-1] > sol1.grid.horizon * (1 + 1e-12):
        raise ValueError(
            f"sol1 horizon {sol1.grid.horizon:g} does not cover {stretched[-1]:g}"
        )
    ref = gamma * np.interp(stretched, sol1.times, sol1.r_star)
    return float(np.max(np.abs(solg.r_star - ref)) / gamma)


def richardson_order(params: MacroParams, phi: ReactionFn, schedule: Schedule | None, coarse: VolterraGrid) -> float:
    """Observed order ``log2(|r_h - r_h/2| / |r_h/2 - r_h/4|)`` in sup norm on shared nodes."""
    sols = [solve_r_star(params, phi, schedule, coarse.refine(k)) for k in (1, 2, 4)]
    r1 = sols[0].r_star
    r2 = sols[1].r_star[::2]
    r4 = sols[2].r_star[::4]
    e1 = np.max(np.abs(r1 - r2))
    e2 = np.max(np.abs(r2 - r4))
    if e2 == 0.0:
        return math.inf
    return float(math.log2(e1 / e2))


@dataclass(frozen=True)
class LevelReport:
    c_hat: float
    target: float
    rel_error: float
    rel_slope: float
    horizon: float
    status: str  # "ok" or "inconclusive"


def plateau_level(sol: VolterraSolution, decade: float = 10.0) -> tuple[float, float]:
    """Mean of ``t^(1 - alpha) (gamma f - r*)`` over the final decade and its log-log slope."""
    t = sol.times
    H = sol.grid.horizon
    mask = (t >= H / decade) & (t > 0)
    g = sol.params.gamma * sol.schedule(t[mask]) - sol.r_star[mask]
    y = t[mask] ** (1 - sol.params.alpha) * g
    if np.any(y <= 0):
        return float(np.mean(y)), math.inf
    slope = np.polyfit(np.log(t[mask]), np.log(y), 1)[0]
    return float(np.mean(y)), float(slope)


def asymptotic_level_check(
    params: MacroParams,
    phi: ReactionFn,
    *,
    n_steps: int = 8192,
    start_horizon: float = 16.0,
    max_horizon: float = 4096.0,
    slope_tol: float = 1e-2,
) -> LevelReport:
    """Fit the tail constant of ``gamma - r*`` under constant forcing.

    The horizon doubles (at a fixed number of nodes) until the final-decade
    relative slope of ``t^(1 - alpha) (gamma - r*)`` drops below ``slope_tol``.
    """
    schedule = Schedule.constant(extended=True)
    a = params.alpha
    target = params.lam * phi.inverse(params.gamma) / (params.kappa * gamma_fn(1 - a) * gamma_fn(a))
    H = start_horizon
    while True:
        sol = solve_r_star(params, phi, schedule, VolterraGrid(H / n_steps, n_steps))
        c_hat, slope = plateau_level(sol)
        if abs(slope) < slope_tol or H * 2 > max_horizon:
            break
        H *= 2
    status = "ok" if abs(slope) < slope_tol else "inconclusive"
    return LevelReport(c_hat, target, abs(c_hat - target) / target, slope, H, status)
