"""Macroscopic impact curves and the two square-root laws.

``MI(gamma, t) = kappa int_0^t (1 + (t - s)^-alpha / lam) (gamma f(s) - r*(s)) ds``
is assembled from a Volterra solution with the solver's own cell rule, so the
singular part is exactly ``(lam / kappa) u`` up to rounding.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .params import MacroParams, Schedule
from .reaction import ReactionFn, upsilon
from .special import gamma_fn
from .volterra import VolterraGrid, VolterraSolution, regular_cells, regular_nodes, solve_r_star

__all__ = [
    "GammaLawReport",
    "ImpactCurve",
    "PeakSweep",
    "PowerLawFit",
    "VolumeLawReport",
    "decompose_pmi_tmi",
    "fit_power_law",
    "gamma_concavity_violation",
    "gamma_monotonicity_violation",
    "impact_from_rate",
    "impact_from_solution",
    "peak_sweep",
    "scaled_impact",
    "sqrt_law_gamma_check",
    "sqrt_law_volume_check",
    "large_gamma_constant",
]

PROVENANCES = ("solved", "simulated", "bound_lower", "bound_upper", "series")


@dataclass(frozen=True, eq=False)
class ImpactCurve:
    grid: VolterraGrid
    mi: np.ndarray
    provenance: str
    params: MacroParams
    phi: str = ""
    singular: np.ndarray | None = None  # raw int (t - s)^-alpha (gamma f - r) ds

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if len(self.mi) != self.grid.n_steps + 1:
            raise ValueError("mi must have one value per grid node")

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def peak(self) -> tuple[float, float]:
        i = int(np.argmax(self.mi))
        return float(self.times[i]), float(self.mi[i])


def impact_from_rate(
    params: MacroParams,
    grid: VolterraGrid,
    force_cells: np.ndarray,
    rate: np.ndarray,
    weights: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """``(mi, singular)`` for a node array of trader rates."""
    h = grid.h
    regular = regular_cells(force_cells, h) - regular_nodes(rate, h)
    singular = kern.conv_cells(force_cells, weights) - kern.conv_nodes(rate, weights)
    return params.kappa * (regular + singular / params.lam), singular


def impact_from_solution(sol: VolterraSolution, params: MacroParams | None = None) -> ImpactCurve:
    params = params if params is not None else sol.params
    mi, singular = impact_from_rate(params, sol.grid, sol.force_cells, sol.r_star, sol.weights)
    return ImpactCurve(sol.grid, mi, "solved", params, sol.phi.describe(), singular)


@dataclass(frozen=True)
class Decomposition:
    pmi: float
    tmi: np.ndarray
    tail_unresolved: bool
    tail_rate: float


def decompose_pmi_tmi(curve: ImpactCurve, sol: VolterraSolution, tail_tol: float = 1e-3) -> Decomposition:
    """Finite-horizon estimate of the permanent part and the transient remainder.

    The permanent part is ``kappa int_0^H (gamma f - r*)``. The tail is flagged
    unresolved when ``H |gamma f(H) - r*(H)|`` (a crude size of the mass still
    to come) exceeds ``tail_tol`` times the estimate.
    """
    if sol.grid.horizon <= 1.0:
        raise ValueError("decomposition needs a horizon beyond the end of the metaorder")
    h = sol.grid.h
    kappa = curve.params.kappa
    pmi = float(kappa * (regular_cells(sol.force_cells, h) - regular_nodes(sol.r_star, h))[-1])
    tail_rate = float(sol.forcing[-1] - sol.r_star[-1])
    unresolved = abs(tail_rate) * sol.grid.horizon * kappa > tail_tol * max(abs(pmi), 1e-300)
    if sol.params.gamma == 0:
        unresolved = False
    return Decomposition(pmi, curve.mi - pmi, bool(unresolved), tail_rate)


@dataclass(frozen=True)
class PowerLawFit:
    prefactor: float
    exponent: float
    r2: float

    def __call__(self, x):
        return self.prefactor * np.asarray(x, dtype=float) ** self.exponent


def fit_power_law(x, y) -> PowerLawFit:
    """OLS fit of ``log y = log A + p log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs at least two strictly positive points")
    lx, ly = np.log(x), np.log(y)
    p, logA = np.polyfit(lx, ly, 1)
    resid = ly - (logA + p * lx)
    ss = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return PowerLawFit(float(math.exp(logA)), float(p), float(r2))


@dataclass(frozen=True)
class PeakSweep:
    gammas: np.ndarray
    peak_times: np.ndarray
    peaks: np.ndarray
    fit: PowerLawFit


def _map(fn, items, n_jobs: int):
    if n_jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


def peak_sweep(
    params: MacroParams,
    phi: ReactionFn,
    gammas,
    *,
    schedule: Schedule | None = None,
    h: float = 1.0 / 4096,
    horizon: float = 1.1,
    n_jobs: int = 1,
) -> PeakSweep:
    """Peak impact over ``[0, horizon]`` for each participation level, plus its power-law fit.

    The step is kept exact (so ``t = 1`` is a node when ``1 / h`` is an
    integer) and the horizon rounded up to a whole number of steps.
    """
    gammas = np.asarray(gammas, dtype=float)
    grid = VolterraGrid(h, max(2, math.ceil(horizon / h - 1e-9)))

    def one(g):
        curve = impact_from_solution(solve_r_star(params.with_gamma(g), phi, schedule, grid))
        return curve.peak()

    out = _map(one, gammas, n_jobs)
    times = np.array([o[0] for o in out])
    peaks = np.array([o[1] for o in out])
    return PeakSweep(gammas, times, peaks, fit_power_law(gammas, peaks))


def large_gamma_constant(alpha: float, lam: float, t: float) -> float:
    """``1 + lam t^alpha / (alpha Gamma(1 - alpha) Gamma(alpha))``."""
    return 1.0 + lam * t**alpha / (alpha * gamma_fn(1 - alpha) * gamma_fn(alpha))


def scaled_impact(params: MacroParams, phi: ReactionFn, gamma: float, t: float, n_steps: int = 16384) -> float:
    """``MI(gamma, t)`` for ``f = 1`` through the exact scaling identity.

    With ``tau = gamma^-ups t`` only the ``gamma = 1`` problem on ``[0, tau]``
    is solved: ``MI / gamma^(1/beta) = kappa (t/tau)^alpha int_0^tau (1 - r1) + u1(tau)``.
    """
    if phi.kind != "power" or not phi.beta > 1:
        raise ValueError("the scaling identity needs a power reaction with beta > 1")
    a = params.alpha
    tau = gamma ** (-upsilon(a, phi.beta)) * t
    sched = Schedule.constant(extended=tau > 1.0)
    sol = solve_r_star(params.with_gamma(1.0), phi, sched, VolterraGrid(tau / n_steps, n_steps))
    h = sol.grid.h
    integral = (regular_cells(sol.force_cells, h) - regular_nodes(sol.r_star, h))[-1]
    return gamma ** (1.0 / phi.beta) * (params.kappa * (t / tau) ** a * integral + sol.u[-1])


@dataclass(frozen=True)
class GammaLawReport:
    gammas: np.ndarray
    impacts: np.ndarray
    ratios: np.ndarray
    target: float
    top_decade_slope: float


def sqrt_law_gamma_check(
    params: MacroParams,
    phi: ReactionFn,
    gammas,
    t: float = 0.25,
    *,
    n_steps: int = 16384,
    n_jobs: int = 1,
) -> GammaLawReport:
    if phi.kind != "power":
        raise ValueError("the large-participation law needs a power reaction")
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    gammas = np.sort(np.asarray(gammas, dtype=float))
    impacts = np.array(_map(lambda g: scaled_impact(params, phi, g, t, n_steps), gammas, n_jobs))
    target = large_gamma_constant(params.alpha, params.lam, t)
    ratios = impacts * phi.c ** (1 / phi.beta) * gammas ** (-1 / phi.beta) / target
    top = gammas >= gammas[-1] / 10.0
    slope = fit_power_law(gammas[top], impacts[top]).exponent if top.sum() >= 2 else math.nan
    return GammaLawReport(gammas, impacts, ratios, target, slope)


@dataclass(frozen=True)
class VolumeLawReport:
    fit: PowerLawFit | None
    t_lo: float
    t_hi: float
    status: str  # "ok" or "degenerate"


def sqrt_law_volume_check(curve: ImpactCurve, t_lo: float = 0.05, t_hi: float = 1.0) -> VolumeLawReport:
    t = curve.times
    mask = (t >= t_lo) & (t <= t_hi + 1e-12)
    if mask.sum() < 2:
        raise ValueError(f"fit window [{t_lo}, {t_hi}] holds fewer than two grid nodes")
    y = curve.mi[mask]
    if np.any(y <= 0):
        return VolumeLawReport(None, t_lo, t_hi, "degenerate")
    return VolumeLawReport(fit_power_law(t[mask], y), t_lo, t_hi, "ok")


def gamma_monotonicity_violation(curves: list[ImpactCurve]) -> float:
    """Largest ``MI(g1, t) - MI(g2, t)`` over ``g1 < g2`` (curves sorted by gamma)."""
    mis = np.array([c.mi for c in sorted(curves, key=lambda c: c.params.gamma)])
    return float(np.max(mis[:-1] - mis[1:])) if len(mis) > 1 else 0.0


def gamma_concavity_violation(curves: list[ImpactCurve]) -> float:
    """Largest interpolated-chord excess over consecutive gamma triples."""
    cs = sorted(curves, key=lambda c: c.params.gamma)
    worst = -math.inf
    for lo, mid, hi in zip(cs, cs[1:], cs[2:]):
        g0, g1, g2 = lo.params.gamma, mid.params.gamma, hi.params.gamma
        lam = (g1 - g0) / (g2 - g0)
        chord = (1 - lam) * lo.mi + lam * hi.mi
        worst = max(worst, float(np.max(chord - mid.mi)))
    return worst if worst > -math.inf else 0.0
