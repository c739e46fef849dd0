"""Gamma and two-parameter Mittag-Leffler functions.

``E_{rho,beta}(z) = sum_k z^k / Gamma(rho k + beta)`` is evaluated for real
``z`` with three branches:

* ``|z| <= SERIES_RADIUS`` or ``0 < z <= Z_SWITCH``: compensated power series;
* ``SERIES_RADIUS < -z < Z_SWITCH``: trapezoidal rule on a parabolic Hankel
  contour for ``(1/2 pi i) int e^s s^(rho - beta) / (s^rho - z) ds``;
* ``z <= -Z_SWITCH``: the algebraic large-argument expansion
  ``-sum_{k=1}^N z^-k / Gamma(beta - rho k)``.

The alternating series cancels catastrophically for negative arguments
(terms of size ``exp(|z|^(1/rho))``), which is why the middle band does not
use it.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sc

__all__ = [
    "MLParams",
    "gamma_fn",
    "linear_volterra_solution",
    "mittag_leffler",
    "rgamma",
]

Z_SWITCH = 30.0
N_ASYMPTOTIC = 8
SERIES_RADIUS = 1.0
CONTOUR_NODES = 32
_SERIES_MAX_TERMS = 5000


class MLParams:
    """Indices ``(rho, beta_idx)`` of ``E_{rho, beta_idx}``."""

    __slots__ = ("rho", "beta_idx")

    def __init__(self, rho: float, beta_idx: float = 1.0):
        if not 0.0 < rho <= 1.0:
            raise ValueError(f"rho must lie in (0, 1], got {rho}")
        if beta_idx < 0:
            raise ValueError(f"beta_idx must be >= 0, got {beta_idx}")
        self.rho = float(rho)
        self.beta_idx = float(beta_idx)

    def __repr__(self) -> str:
        return f"MLParams(rho={self.rho}, beta_idx={self.beta_idx})"


def gamma_fn(z: float) -> float:
    if not z > 0:
        raise ValueError(f"gamma_fn is defined for z > 0, got {z}")
    return math.gamma(z)


def rgamma(z):
    """``1 / Gamma(z)``, zero at the poles."""
    return sc.rgamma(z)


def _series(rho: float, beta: float, z: float) -> float:
    # Kahan summation; terms built in log space so z^k never overflows alone
    total = 0.0
    comp = 0.0
    logz = math.log(abs(z))
    sign = -1.0 if z < 0 else 1.0
    k_peak = abs(z) ** (1.0 / rho) / rho
    for k in range(_SERIES_MAX_TERMS):
        arg = rho * k + beta
        if arg <= 0.0:
            term = (z**k) * float(rgamma(arg))
        else:
            term = sign**k * math.exp(k * logz - math.lgamma(arg))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if not math.isfinite(total):
            raise OverflowError(f"Mittag-Leffler series overflows at z={z}")
        if k > k_peak and abs(term) <= 1e-17 * max(abs(total), 1e-300):
            break
    return total


def _contour(rho: float, beta: float, z: float, n: int = CONTOUR_NODES) -> float:
    # parabola s(u) = mu (1 + iu)^2 keeps the branch cut of s^rho on its left
    mu = math.pi * n / 12.0
    h = 3.0 / n
    u = h * np.arange(n + 1)
    s = mu * (1.0 + 1j * u) ** 2
    g = np.exp(s) * s ** (rho - beta) / (s**rho - z) * (1.0 + 1j * u)
    w = np.full(n + 1, 2.0)
    w[0] = 1.0
    return float((mu * h / math.pi) * np.sum(w * g).real)


def _asymptotic(rho: float, beta: float, z: float, n_terms: int = N_ASYMPTOTIC) -> float:
    k = np.arange(1, n_terms + 1)
    return float(-np.sum(z ** (-k.astype(float)) * rgamma(beta - rho * k)))


def mittag_leffler(p: MLParams | tuple, z: float, *, z_switch: float = Z_SWITCH) -> float:
    """``E_{rho, beta}(z)`` for real ``z``."""
    if not isinstance(p, MLParams):
        p = MLParams(*p)
    rho, beta = p.rho, p.beta_idx
    z = float(z)
    if z == 0.0:
        return float(rgamma(beta))
    if z > 0.0:
        if z > z_switch:
            raise OverflowError(f"positive argument z={z} beyond {z_switch} is not supported")
        return _series(rho, beta, z)
    if -z <= SERIES_RADIUS:
        return _series(rho, beta, z)
    if -z < z_switch:
        return _contour(rho, beta, z)
    return _asymptotic(rho, beta, z)


def mittag_leffler_vec(p: MLParams | tuple, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return np.array([mittag_leffler(p, v) for v in z.ravel()]).reshape(z.shape)


def linear_volterra_solution(delta: float, rate: float, alpha: float, t):
    """Solution of ``x(t) = delta - rate int_0^t K(t - s) x(s) ds``.

    ``K(t) = t^-alpha / Gamma(1 - alpha)``; the solution is
    ``delta E_{1 - alpha, 1}(-rate t^(1 - alpha))``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    out = delta * mittag_leffler_vec((1.0 - alpha, 1.0), -rate * t ** (1.0 - alpha))
    return out if out.ndim else float(out)
