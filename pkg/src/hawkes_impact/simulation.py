"""Event-level simulation of the four order streams and Monte Carlo impact.

Streams: ``a``/``b`` are independent Hawkes processes (baseline ``mu_T``,
kernel ``a_T phi``), ``o`` is the metaorder (inhomogeneous Poisson with rate
``gamma beta_T f(t / T)``) and ``m`` the trader, who sells at rate
``Phi_T(S_t)`` where ``S_t = kappa (sum_o zeta_T(t - T_o) - sum_m zeta_T(t - T_m))``.

Trader thinning uses a windowed envelope. On ``[t0, t1]`` with no metaorder
event inside, the ``o``-sum is at most its value at ``t0`` and the ``m``-sum
at least its value at ``t1`` (both sums are of decreasing functions), so
``Phi_T(kappa (O(t0) - M(t1)))`` bounds the intensity until the next accepted
event.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from ._kernels import phi_eval
from .params import MicroParams
from .reaction import ReactionFn

__all__ = [
    "DEFAULT_EVENT_CAP",
    "EventPath",
    "RescaledImpactEstimate",
    "ResourceCapError",
    "monte_carlo_rescaled_impact",
    "path_rng",
    "pathwise_impact",
    "price_paths",
    "simulate_hawkes_pair",
    "simulate_metaorder",
    "simulate_path",
    "simulate_trader",
    "write_event_dump",
]

DEFAULT_EVENT_CAP = 10_000_000


class ResourceCapError(RuntimeError):
    """A simulated path exceeded the configured event cap."""


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for path ``index``: ``SeedSequence(seed, spawn_key=(index,))``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


# compiled kernels -----------------------------------------------------------


@njit(cache=True, nogil=True)
def _zeta(z0, alpha, x):
    if alpha == 0.5:
        return z0 / math.sqrt(1.0 + x)
    return z0 * (1.0 + x) ** (-alpha)


@njit(cache=True, nogil=True)
def _zeta_sum(times, n, z0, alpha, t):
    s = 0.0
    for k in range(n):
        s += _zeta(z0, alpha, t - times[k])
    return s


@njit(cache=True, nogil=True)
def _trader_kernel(rng, times_o, horizon, kappa, z0, alpha, T, beta_T, dt_max, cap,
                   code, p1, p2, xs, ys):
    n_o = times_o.shape[0]
    scale = T * beta_T
    out = np.empty(max(16, n_o + 1))
    n_m = 0
    io = 0
    t = 0.0
    while t < horizon:
        while io < n_o and times_o[io] <= t:
            io += 1
        t_next = times_o[io] if io < n_o else horizon
        t_end = min(t_next, t + dt_max, horizon)
        upper = kappa * (_zeta_sum(times_o, io, z0, alpha, t) - _zeta_sum(out, n_m, z0, alpha, t_end))
        bound = beta_T * phi_eval(code, p1, p2, xs, ys, upper / scale)
        if bound <= 0.0:
            t = t_end
            continue
        cand = t + rng.standard_exponential() / bound
        if cand >= t_end:
            t = t_end
            continue
        t = cand
        sig = kappa * (_zeta_sum(times_o, io, z0, alpha, t) - _zeta_sum(out, n_m, z0, alpha, t))
        lam = beta_T * phi_eval(code, p1, p2, xs, ys, sig / scale)
        if rng.random() * bound < lam:
            if n_m >= cap:
                return out[:n_m], False
            if n_m == out.shape[0]:
                grown = np.empty(2 * out.shape[0])
                grown[:n_m] = out[:n_m]
                out = grown
            out[n_m] = t
            n_m += 1
    return out[:n_m].copy(), True


@njit(cache=True, nogil=True)
def _hawkes_kernel(rng, mu, a, alpha, horizon, cap):
    out = np.empty(64)
    n = 0
    t = 0.0
    while True:
        lam_bar = mu
        for k in range(n):
            lam_bar += a * alpha * (1.0 + t - out[k]) ** (-(1.0 + alpha))
        t += rng.standard_exponential() / lam_bar
        if t >= horizon:
            break
        lam = mu
        for k in range(n):
            lam += a * alpha * (1.0 + t - out[k]) ** (-(1.0 + alpha))
        if rng.random() * lam_bar <= lam:
            if n >= cap:
                return out[:n], False
            if n == out.shape[0]:
                grown = np.empty(2 * n)
                grown[:n] = out[:n]
                out = grown
            out[n] = t
            n += 1
    return out[:n].copy(), True


@njit(cache=True, nogil=True)
def _impact_kernel(times, sign, nodes, kappa, z0, alpha):
    """``kappa sum sign_k xi(t - T_k)`` over events up to each node."""
    out = np.zeros(nodes.shape[0])
    for i in range(nodes.shape[0]):
        t = nodes[i]
        s = 0.0
        for k in range(times.shape[0]):
            if times[k] <= t:
                s += sign[k] * (1.0 + _zeta(z0, alpha, t - times[k]))
        out[i] = kappa * s
    return out


@njit(cache=True, nogil=True)
def _signal_kernel(times, sign, nodes, kappa, z0, alpha):
    out = np.zeros(nodes.shape[0])
    for i in range(nodes.shape[0]):
        t = nodes[i]
        s = 0.0
        for k in range(times.shape[0]):
            if times[k] <= t:
                s += sign[k] * _zeta(z0, alpha, t - times[k])
        out[i] = kappa * s
    return out


# public API -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EventPath:
    """One realisation on ``[0, horizon * T]``; ``times_a``/``times_b`` may be absent."""

    micro: MicroParams
    horizon: float
    times_o: np.ndarray
    times_m: np.ndarray
    times_a: np.ndarray | None = None
    times_b: np.ndarray | None = None
    seed: int | None = None
    index: int = 0

    def counts_dominated(self) -> bool:
        """``N^m(t) <= N^o(t)`` at every event time."""
        if len(self.times_m) == 0:
            return True
        n_o = np.searchsorted(self.times_o, self.times_m, side="right")
        return bool(np.all(np.arange(1, len(self.times_m) + 1) <= n_o))


def simulate_metaorder(micro: MicroParams, rng: np.random.Generator, horizon: float = 1.0) -> np.ndarray:
    """Piecewise-homogeneous Poisson times with rate ``gamma beta_T f(t / T)``."""
    chunks = []
    for start, end, level in zip(*micro.schedule.pieces(horizon)):
        rate = micro.gamma * micro.beta_T * level
        length = (end - start) * micro.T
        if rate <= 0 or length <= 0:
            continue
        k = rng.poisson(rate * length)
        chunks.append(np.sort(start * micro.T + length * rng.random(k)))
    return np.concatenate(chunks) if chunks else np.empty(0)


def _dt_max(micro: MicroParams) -> float:
    return 0.1 * micro.T / max(1.0, micro.gamma * micro.beta_T)


def simulate_trader(
    micro: MicroParams,
    phi: ReactionFn,
    times_o: np.ndarray,
    rng: np.random.Generator,
    horizon: float = 1.0,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> np.ndarray:
    """Trader times on ``[0, horizon * T]`` by thinning against the windowed envelope."""
    times_o = np.ascontiguousarray(times_o, dtype=np.float64)
    if np.any(np.diff(times_o) < 0):
        raise ValueError("times_o must be sorted")
    code, p1, p2, xs, ys = phi.packed()
    out, ok = _trader_kernel(
        rng, times_o, horizon * micro.T, micro.kappa, micro.zeta0, micro.alpha, micro.T,
        micro.beta_T, _dt_max(micro), event_cap, code, p1, p2, xs, ys,
    )
    if not ok:
        raise ResourceCapError(f"trader stream exceeded the event cap {event_cap}")
    return out


def simulate_hawkes_pair(
    micro: MicroParams,
    horizon: float,
    rng: np.random.Generator,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> tuple[np.ndarray, np.ndarray]:
    """Two independent Hawkes streams on ``[0, horizon * T]`` (Ogata thinning)."""
    if micro.mu_T <= 0:
        return np.empty(0), np.empty(0)
    out = []
    for tag in ("a", "b"):
        times, ok = _hawkes_kernel(rng, micro.mu_T, micro.a_T, micro.alpha, horizon * micro.T, event_cap)
        if not ok:
            raise ResourceCapError(f"stream {tag} exceeded the event cap {event_cap}")
        out.append(times)
    return out[0], out[1]


def simulate_path(
    micro: MicroParams,
    phi: ReactionFn,
    horizon: float,
    seed: int,
    index: int = 0,
    *,
    with_ab: bool = False,
    event_cap: int = DEFAULT_EVENT_CAP,
) -> EventPath:
    rng = path_rng(seed, index)
    times_o = simulate_metaorder(micro, rng, horizon)
    times_m = simulate_trader(micro, phi, times_o, rng, horizon, event_cap)
    times_a = times_b = None
    if with_ab:
        times_a, times_b = simulate_hawkes_pair(micro, horizon, rng, event_cap)
    return EventPath(micro, horizon, times_o, times_m, times_a, times_b, seed, index)


def _signed(*streams):
    times = np.concatenate([s for s, _ in streams])
    sign = np.concatenate([np.full(len(s), g, dtype=np.float64) for s, g in streams])
    return np.ascontiguousarray(times, dtype=np.float64), sign


def pathwise_impact(path: EventPath, nodes) -> np.ndarray:
    """``MI`` at rescaled times ``nodes`` (not divided by the volume scale)."""
    m = path.micro
    t = np.asarray(nodes, dtype=float) * m.T
    times, sign = _signed((path.times_o, 1.0), (path.times_m, -1.0))
    return _impact_kernel(times, sign, t, m.kappa, m.zeta0, m.alpha)


def price_paths(path: EventPath, nodes) -> tuple[np.ndarray, np.ndarray]:
    """``(P, EP)`` at rescaled times ``nodes`` with ``P_0 = 0``."""
    if path.times_a is None or path.times_b is None:
        raise ValueError("price paths need the a/b streams (simulate with with_ab=True)")
    m = path.micro
    t = np.asarray(nodes, dtype=float) * m.T
    times, sign = _signed(
        (path.times_a, 1.0), (path.times_o, 1.0), (path.times_b, -1.0), (path.times_m, -1.0)
    )
    P = _impact_kernel(times, sign, t, m.kappa, m.zeta0, m.alpha)
    otimes, osign = _signed((path.times_o, 1.0), (path.times_m, -1.0))
    gap = _signal_kernel(otimes, osign, t, m.kappa, m.zeta0, m.alpha)
    return P, P - gap


def write_event_dump(path: EventPath, filename) -> None:
    rows = []
    for tag in ("a", "b", "o", "m"):
        times = getattr(path, f"times_{tag}")
        if times is not None:
            rows.extend((t, tag) for t in times)
    rows.sort()
    with Path(filename).open("w") as fh:
        fh.write(f"# seed: {path.seed}\n# path: {path.index}\n")
        for t, tag in rows:
            fh.write(f"{tag} {float(t)!r}\n")


@dataclass(frozen=True, eq=False)
class RescaledImpactEstimate:
    nodes: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_paths: int
    price_mean: np.ndarray | None = None
    eprice_mean: np.ndarray | None = None


def monte_carlo_rescaled_impact(
    micro: MicroParams,
    phi: ReactionFn,
    n_paths: int,
    nodes,
    seed: int,
    *,
    n_jobs: int = 1,
    with_ab: bool = False,
    event_cap: int = DEFAULT_EVENT_CAP,
    on_path=None,
) -> RescaledImpactEstimate:
    """Mean of ``MI^T_{tT} / (T beta_T)`` over independent paths.

    Paths are simulated in any order but reduced by index, so the result only
    depends on ``(micro, phi, n_paths, nodes, seed, with_ab)``. With the a/b
    streams the rescaled mean ``P`` and ``EP`` are returned as well.
    """
    if n_paths < 2:
        raise ValueError("need at least two paths")
    nodes = np.asarray(nodes, dtype=float)
    horizon = float(nodes[-1])
    scale = micro.volume_scale

    def one(i):
        path = simulate_path(micro, phi, horizon, seed, i, with_ab=with_ab, event_cap=event_cap)
        if on_path is not None:
            on_path(path)
        mi = pathwise_impact(path, nodes) / scale
        if not with_ab:
            return mi, None, None
        P, EP = price_paths(path, nodes)
        return mi, P / scale, EP / scale

    if n_jobs <= 1:
        rows = [one(i) for i in range(n_paths)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(one, range(n_paths)))
    samples = np.vstack([r[0] for r in rows])
    mean = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / math.sqrt(n_paths)
    price = eprice = None
    if with_ab:
        price = np.vstack([r[1] for r in rows]).mean(axis=0)
        eprice = np.vstack([r[2] for r in rows]).mean(axis=0)
    return RescaledImpactEstimate(nodes, mean, stderr, n_paths, price, eprice)
