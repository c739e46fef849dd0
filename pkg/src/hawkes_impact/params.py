"""Model parameters and the power-law kernel family with its microscopic weights.

Macroscopic quantities (``MacroParams``) describe the scaling limit. The
microscopic model at horizon ``T`` (``MicroParams``) is derived from them by
treating the criticality scaling as an exact identity at finite ``T``::

    1 - a_T = lam * K / T**alpha,     mu_T = mu_star * T**(alpha - 1)

With the default kernel ``phi(t) = alpha (1 + t)**-(1 + alpha)`` the tail
constant is ``K = 1`` and ``zeta_T(t * T)`` converges to ``t**-alpha / lam``,
the kernel of the limiting Volterra equation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "KernelFamily",
    "MacroParams",
    "MicroParams",
    "Schedule",
    "kernel_phi",
    "kernel_tail",
    "xi_T",
    "zeta_T",
    "zeta_measure_cdf",
    "zeta_measure_limit",
]


@dataclass(frozen=True)
class KernelFamily:
    """Power-law kernel ``phi(t) = alpha (1 + t)^-(1 + alpha)`` with unit L1 norm."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def K(self) -> float:
        # t^alpha * (1 + t)^-alpha -> 1
        return 1.0


def kernel_phi(kernel: KernelFamily, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("kernel_phi is defined for t >= 0")
    out = kernel.alpha * (1.0 + t) ** (-(1.0 + kernel.alpha))
    return out if out.ndim else float(out)


def kernel_tail(kernel: KernelFamily, t):
    """Tail mass ``int_t^inf phi(s) ds = (1 + t)^-alpha``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("kernel_tail is defined for t >= 0")
    out = (1.0 + t) ** (-kernel.alpha)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MacroParams:
    """Parameters of the scaling limit.

    ``lam`` is the criticality constant (``lambda`` in the usual notation),
    ``kappa`` the permanent impact of one order and ``gamma`` the metaorder
    size relative to the market volume over the execution window.
    """

    alpha: float
    lam: float = 1.0
    mu_star: float = 1.0
    kappa: float = 1.0
    gamma: float = 0.3

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.mu_star < 0:
            raise ValueError(f"mu_star must be >= 0, got {self.mu_star}")

    @property
    def kernel(self) -> KernelFamily:
        return KernelFamily(self.alpha)

    def with_gamma(self, gamma: float) -> MacroParams:
        return MacroParams(self.alpha, self.lam, self.mu_star, self.kappa, gamma)


class Schedule:
    """Piecewise-constant trading schedule ``f`` on ``[0, 1]``.

    ``breaks`` are the piece boundaries (``0 = b_0 < ... < b_m = 1``) and
    ``values`` the ``m`` nonnegative levels. The schedule is renormalised so
    that it integrates to one on ``[0, 1]``. Beyond ``t = 1`` it vanishes,
    unless ``extended`` is set, in which case the last level is continued
    (constant forcing, used by the large-time and scaling analyses).
    """

    def __init__(self, breaks, values, extended: bool = False):
        breaks = np.asarray(breaks, dtype=float)
        values = np.asarray(values, dtype=float)
        if breaks.ndim != 1 or values.ndim != 1 or len(breaks) != len(values) + 1:
            raise ValueError("need len(breaks) == len(values) + 1")
        if breaks[0] != 0.0 or breaks[-1] != 1.0 or np.any(np.diff(breaks) <= 0):
            raise ValueError("breaks must increase strictly from 0 to 1")
        if np.any(values < 0):
            raise ValueError("schedule values must be nonnegative")
        mass = float(np.sum(values * np.diff(breaks)))
        if mass <= 0:
            raise ValueError("schedule must have positive mass on [0, 1]")
        if abs(mass - 1.0) > 1e-12:
            warnings.warn(f"schedule integrates to {mass!r}; renormalising to 1", stacklevel=2)
            values = values / mass
        self.breaks = breaks
        self.values = values
        self.extended = bool(extended)
        self._cum = np.concatenate([[0.0], np.cumsum(values * np.diff(breaks))])

    @classmethod
    def constant(cls, extended: bool = False) -> Schedule:
        return cls([0.0, 1.0], [1.0], extended=extended)

    @classmethod
    def from_table(cls, path, extended: bool = False) -> Schedule:
        """Read ``start value`` rows; the last piece runs up to ``t = 1``."""
        data = np.loadtxt(Path(path), comments="#", ndmin=2)
        starts, values = data[:, 0], data[:, 1]
        return cls(np.append(starts, 1.0), values, extended=extended)

    @property
    def is_constant(self) -> bool:
        return len(self.values) == 1

    @property
    def tail_level(self) -> float:
        return float(self.values[-1]) if self.extended else 0.0

    @property
    def sup_norm(self) -> float:
        return float(self.values.max())

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, len(self.values) - 1)
        out = np.where(t > 1.0, self.tail_level, self.values[idx])
        out = np.where(t < 0.0, 0.0, out)
        return out if out.ndim else float(out)

    def cumulative(self, t):
        """``int_0^t f(s) ds``."""
        t = np.asarray(t, dtype=float)
        inside = np.interp(np.clip(t, 0.0, 1.0), self.breaks, self._cum)
        out = inside + self.tail_level * np.maximum(t - 1.0, 0.0)
        return out if out.ndim else float(out)

    def cell_averages(self, times) -> np.ndarray:
        """Exact mean of ``f`` over each cell ``[times[j], times[j + 1]]``."""
        times = np.asarray(times, dtype=float)
        c = self.cumulative(times)
        return np.diff(c) / np.diff(times)

    def pieces(self, horizon: float = 1.0):
        """``(starts, ends, levels)`` of the nonzero pieces up to ``horizon``."""
        starts = list(self.breaks[:-1])
        ends = list(self.breaks[1:])
        levels = list(self.values)
        if self.extended and horizon > 1.0:
            starts.append(1.0)
            ends.append(horizon)
            levels.append(self.tail_level)
        starts, ends, levels = (np.asarray(a, dtype=float) for a in (starts, ends, levels))
        keep = starts < horizon
        ends = np.minimum(ends, horizon)
        return starts[keep], ends[keep], levels[keep]

    def describe(self) -> str:
        if self.is_constant:
            return "const" + (",extended" if self.extended else "")
        body = ";".join(f"{b:g}:{v:g}" for b, v in zip(self.breaks[:-1], self.values))
        return f"pieces:{body}" + (",extended" if self.extended else "")

    def __repr__(self) -> str:
        return f"Schedule({self.describe()})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Schedule)
            and self.extended == other.extended
            and np.array_equal(self.breaks, other.breaks)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True)
class MicroParams:
    """Microscopic model at horizon scale ``T``.

    Build it with :meth:`from_macro`; the constructor only checks the
    invariants. ``beta_T`` is the long-run intensity of each Hawkes stream
    and ``T * beta_T`` the natural volume scale.
    """

    T: float
    alpha: float
    lam: float
    kappa: float
    gamma: float
    a_T: float
    mu_T: float
    schedule: Schedule = field(default_factory=Schedule.constant, compare=False)

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise ValueError(f"T must be > 0, got {self.T}")
        if not 0.0 < self.a_T < 1.0:
            raise ValueError(f"a_T must lie in (0, 1), got {self.a_T}")
        if not self.mu_T > 0:
            raise ValueError(f"mu_T must be > 0, got {self.mu_T}")

    @staticmethod
    def t_min(alpha: float, lam: float, K: float = 1.0) -> float:
        """Smallest admissible horizon: below it ``a_T <= 0``."""
        return (lam * K) ** (1.0 / alpha)

    @classmethod
    def from_macro(cls, macro: MacroParams, T: float, schedule: Schedule | None = None) -> MicroParams:
        K = macro.kernel.K
        if T <= cls.t_min(macro.alpha, macro.lam, K):
            raise ValueError(
                f"T={T} is below the admissibility threshold "
                f"{cls.t_min(macro.alpha, macro.lam, K):.6g} (a_T would be <= 0)"
            )
        if macro.mu_star <= 0:
            raise ValueError("the microscopic model needs mu_star > 0")
        a_T = 1.0 - macro.lam * K / T**macro.alpha
        mu_T = macro.mu_star * T ** (macro.alpha - 1.0)
        return cls(
            T=float(T),
            alpha=macro.alpha,
            lam=macro.lam,
            kappa=macro.kappa,
            gamma=macro.gamma,
            a_T=a_T,
            mu_T=mu_T,
            schedule=schedule if schedule is not None else Schedule.constant(),
        )

    @property
    def kernel(self) -> KernelFamily:
        return KernelFamily(self.alpha)

    @property
    def beta_T(self) -> float:
        return self.mu_T / (1.0 - self.a_T)

    @property
    def zeta0(self) -> float:
        """``zeta_T(0) = a_T / (1 - a_T)``."""
        return self.a_T / (1.0 - self.a_T)

    @property
    def volume_scale(self) -> float:
        return self.T * self.beta_T

    def metaorder_rate(self, t):
        """``nu_T(t) = gamma beta_T f(t / T)``."""
        return self.gamma * self.beta_T * self.schedule(np.asarray(t, dtype=float) / self.T)


def zeta_T(micro: MicroParams, t):
    """Transient weight ``a_T / (1 - a_T) * (1 + t)^-alpha``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("zeta_T is defined for t >= 0")
    out = micro.zeta0 * (1.0 + t) ** (-micro.alpha)
    return out if out.ndim else float(out)


def xi_T(micro: MicroParams, t):
    """Price response to a single order, ``1 + zeta_T(t)``."""
    return 1.0 + zeta_T(micro, t)


def zeta_measure_cdf(micro: MicroParams, t):
    """``R_T(t) = int_0^t zeta_T(s T) ds`` in closed form.

    As ``T`` grows this approaches ``t^(1 - alpha) / ((1 - alpha) lam)``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("zeta_measure_cdf is defined for t >= 0")
    a, T, al = micro.a_T, micro.T, micro.alpha
    out = a / (T * (1.0 - a) * (1.0 - al)) * ((1.0 + t * T) ** (1.0 - al) - 1.0)
    return out if out.ndim else float(out)


def zeta_measure_limit(alpha: float, lam: float, t):
    t = np.asarray(t, dtype=float)
    out = t ** (1.0 - alpha) / ((1.0 - alpha) * lam)
    return out if out.ndim else float(out)

