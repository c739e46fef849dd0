"""Explicit impact bounds and the Adomian series in the participation level.

With ``F(t) = (1/lam) int_0^t (t - s)^-alpha f(s) ds`` the rates

    r_plus  = Phi(gamma kappa F)
    r_minus = Phi(gamma kappa F - (kappa/lam) int (t - s)^-alpha r_plus(s) ds)

bracket ``r*`` from above and below, hence ``MI(r_plus) <= MI <= MI(r_minus)``.
Both are evaluated with the solver's convolution so the bracket also holds
exactly for the discrete solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .impact import ImpactCurve, impact_from_rate
from .params import MacroParams, Schedule
from .reaction import ReactionFn
from .volterra import VolterraGrid, forcing_cells, singular_weights

__all__ = ["AdomianSeries", "adomian", "forcing_integral", "impact_bounds"]


def forcing_integral(schedule: Schedule | None, alpha: float, lam: float, grid: VolterraGrid) -> np.ndarray:
    schedule = schedule if schedule is not None else Schedule.constant()
    w = singular_weights(grid, alpha)
    return kern.conv_cells(forcing_cells(schedule, grid), w) / lam


def bound_rates(params: MacroParams, phi: ReactionFn, schedule: Schedule | None, grid: VolterraGrid):
    """``(r_plus, r_minus)`` on the nodes."""
    w = singular_weights(grid, params.alpha)
    F = forcing_integral(schedule, params.alpha, params.lam, grid)
    lead = params.gamma * params.kappa * F
    r_plus = np.asarray(phi(lead), dtype=float)
    r_minus = np.asarray(phi(lead - (params.kappa / params.lam) * kern.conv_nodes(r_plus, w)), dtype=float)
    return r_plus, r_minus


def impact_bounds(
    params: MacroParams,
    phi: ReactionFn,
    schedule: Schedule | None,
    grid: VolterraGrid,
) -> tuple[ImpactCurve, ImpactCurve]:
    """``(lower, upper)`` impact curves."""
    schedule = schedule if schedule is not None else Schedule.constant()
    w = singular_weights(grid, params.alpha)
    fc = params.gamma * forcing_cells(schedule, grid)
    r_plus, r_minus = bound_rates(params, phi, schedule, grid)
    lower, _ = impact_from_rate(params, grid, fc, r_plus, w)
    upper, _ = impact_from_rate(params, grid, fc, r_minus, w)
    desc = phi.describe()
    return (
        ImpactCurve(grid, lower, "bound_lower", params, desc),
        ImpactCurve(grid, upper, "bound_upper", params, desc),
    )


@dataclass(frozen=True, eq=False)
class AdomianSeries:
    """Terms ``u_1..u_J`` of ``u(gamma) ~ sum_l gamma^l u_l``."""

    order: int
    grid: VolterraGrid
    u_terms: np.ndarray  # shape (J, n + 1)
    params: MacroParams
    phi: ReactionFn
    schedule: Schedule
    weights: np.ndarray

    def signal(self, gamma: float) -> np.ndarray:
        powers = gamma ** np.arange(1, self.order + 1)
        return powers @ self.u_terms

    def rate(self, gamma: float) -> np.ndarray:
        return np.asarray(self.phi(self.signal(gamma)), dtype=float)

    def impact(self, gamma: float | None = None) -> ImpactCurve:
        gamma = self.params.gamma if gamma is None else gamma
        p = self.params.with_gamma(gamma)
        fc = gamma * forcing_cells(self.schedule, self.grid)
        mi, _ = impact_from_rate(p, self.grid, fc, self.rate(gamma), self.weights)
        return ImpactCurve(self.grid, mi, "series", p, self.phi.describe())


def adomian(
    params: MacroParams,
    phi: ReactionFn,
    schedule: Schedule | None,
    grid: VolterraGrid,
    J: int,
) -> AdomianSeries:
    """Order-by-order terms of the expansion in ``gamma``.

    ``u_l + (kappa a_1 / lam) conv(u_l) = rhs_l`` with ``rhs_1 = kappa F`` and
    ``rhs_l = -(kappa / lam) conv(sum_{k >= 2} a_k [u^k]_l)``, where ``a_k`` are
    the Taylor coefficients of ``Phi`` at 0 and ``[u^k]_l`` is the ``gamma^l``
    coefficient of ``(sum_m gamma^m u_m)^k``.
    """
    if J < 1:
        raise ValueError(f"order J must be >= 1, got {J}")
    schedule = schedule if schedule is not None else Schedule.constant()
    a = phi.taylor_coefficients(J)
    w = singular_weights(grid, params.alpha)
    scale = params.kappa / params.lam
    F = forcing_integral(schedule, params.alpha, params.lam, grid)
    n1 = grid.n_steps + 1
    u = np.zeros((J + 1, n1))  # u[l] for l = 1..J
    # pw[k][l] = [u^k]_l
    pw = np.zeros((J + 1, J + 1, n1))
    coef = scale * a[0]
    for l in range(1, J + 1):
        if l == 1:
            rhs = params.kappa * F
        else:
            nonlin = np.zeros(n1)
            for k in range(2, l + 1):
                if a[k - 1] != 0.0:
                    nonlin += a[k - 1] * pw[k][l]
            rhs = -scale * kern.conv_nodes(nonlin, w)
        u[l] = kern.solve_linear(rhs, w, coef) if coef != 0.0 else rhs
        pw[1][l] = u[l]
        if l < J:
            nxt = l + 1
            for k in range(2, nxt + 1):
                acc = np.zeros(n1)
                for m in range(1, nxt - k + 2):
                    acc += u[m] * pw[k - 1][nxt - m]
                pw[k][nxt] = acc
    return AdomianSeries(J, grid, u[1:].copy(), params, phi, schedule, w)
