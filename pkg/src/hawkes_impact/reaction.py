"""Response function of the sophisticated trader.

The trader sells at rate ``Phi(P - EP)`` where ``Phi`` is nondecreasing and
vanishes on ``(-inf, 0]``. Three kinds are supported: ``power`` (``c x^beta``),
``linear`` (``slope x``) and ``table`` (monotone piecewise-linear through given
knots, constant beyond the last knot).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .params import MicroParams

__all__ = ["ReactionFn", "upsilon"]


@dataclass(frozen=True)
class ReactionFn:
    kind: str
    c: float = 1.0
    beta: float = 2.0
    slope: float = 1.0
    knots_x: tuple[float, ...] = ()
    knots_y: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "power":
            if not self.c > 0:
                raise ValueError(f"power reaction needs c > 0, got {self.c}")
            if not self.beta >= 1:
                raise ValueError(f"power reaction needs beta >= 1, got {self.beta}")
        elif self.kind == "linear":
            if self.slope < 0:
                raise ValueError(f"linear reaction needs slope >= 0, got {self.slope}")
        elif self.kind == "table":
            xs, ys = np.asarray(self.knots_x), np.asarray(self.knots_y)
            if len(xs) < 2 or len(xs) != len(ys):
                raise ValueError("table reaction needs at least two (x, y) knots")
            if xs[0] != 0.0 or ys[0] != 0.0:
                raise ValueError("table reaction must start at the knot (0, 0)")
            if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
                raise ValueError("table knots must be strictly increasing in both columns")
        else:
            raise ValueError(f"unknown reaction kind {self.kind!r}")

    # construction -------------------------------------------------------

    @classmethod
    def power(cls, c: float = 1.0, beta: float = 2.0) -> ReactionFn:
        return cls("power", c=float(c), beta=float(beta))

    @classmethod
    def linear(cls, slope: float = 1.0) -> ReactionFn:
        return cls("linear", slope=float(slope))

    @classmethod
    def table(cls, xs, ys) -> ReactionFn:
        return cls("table", knots_x=tuple(map(float, xs)), knots_y=tuple(map(float, ys)))

    @classmethod
    def parse(cls, text: str) -> ReactionFn:
        """Parse ``power:c=1,beta=2``, ``linear:slope=1`` or ``table:<path>``."""
        kind, _, rest = text.strip().partition(":")
        kind = kind.strip()
        if kind == "table":
            data = np.loadtxt(Path(rest.strip()), comments="#", ndmin=2)
            return cls.table(data[:, 0], data[:, 1])
        kwargs = {}
        for item in filter(None, (p.strip() for p in rest.split(","))):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"malformed reaction option {item!r}")
            kwargs[key.strip()] = float(value)
        if kind == "power":
            unknown = set(kwargs) - {"c", "beta"}
        elif kind == "linear":
            unknown = set(kwargs) - {"slope"}
        else:
            raise ValueError(f"unknown reaction kind {kind!r}")
        if unknown:
            raise ValueError(f"unknown {kind} reaction options: {sorted(unknown)}")
        return getattr(cls, kind)(**kwargs)

    def describe(self) -> str:
        if self.kind == "power":
            return f"power:c={self.c:g},beta={self.beta:g}"
        if self.kind == "linear":
            return f"linear:slope={self.slope:g}"
        return "table:" + ";".join(f"{x:g}/{y:g}" for x, y in zip(self.knots_x, self.knots_y))

    # evaluation ---------------------------------------------------------

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        if self.kind == "power":
            out = self.c * xp**self.beta
        elif self.kind == "linear":
            out = self.slope * xp
        else:
            out = np.interp(xp, self.knots_x, self.knots_y)
        return out if out.ndim else float(out)

    def scalar(self) -> Callable[[float], float]:
        """Plain-float version of ``self`` for tight loops."""
        if self.kind == "power":
            c, b = self.c, self.beta
            if b == 2.0:
                return lambda x: c * x * x if x > 0.0 else 0.0
            return lambda x: c * x**b if x > 0.0 else 0.0
        if self.kind == "linear":
            s = self.slope
            return lambda x: s * x if x > 0.0 else 0.0
        xs, ys = np.asarray(self.knots_x), np.asarray(self.knots_y)
        return lambda x: float(np.interp(x, xs, ys)) if x > 0.0 else 0.0

    def packed(self) -> tuple[int, float, float, np.ndarray, np.ndarray]:
        """``(code, p1, p2, xs, ys)`` for the compiled kernels."""
        xs = np.asarray(self.knots_x, dtype=np.float64)
        ys = np.asarray(self.knots_y, dtype=np.float64)
        if self.kind == "power":
            return 0, self.c, self.beta, xs, ys
        if self.kind == "linear":
            return 1, self.slope, 1.0, xs, ys
        return 2, 0.0, 0.0, xs, ys

    def micro(self, micro: MicroParams, x):
        """Microscopic response ``beta_T Phi(x / (T beta_T))``."""
        b = micro.beta_T
        return b * self(np.asarray(x, dtype=float) / (micro.T * b))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        pos = x > 0
        if self.kind == "power":
            out = np.where(pos, self.c * self.beta * np.maximum(x, 0.0) ** (self.beta - 1.0), 0.0)
        elif self.kind == "linear":
            out = np.where(pos, self.slope, 0.0)
        else:
            xs, ys = np.asarray(self.knots_x), np.asarray(self.knots_y)
            slopes = np.append(np.diff(ys) / np.diff(xs), 0.0)
            idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(slopes) - 1)
            out = np.where(pos, slopes[idx], 0.0)
        return out if out.ndim else float(out)

    def inverse(self, y):
        """The unique ``x >= 0`` with ``Phi(x) = y``."""
        y = np.asarray(y, dtype=float)
        if np.any(y < 0):
            raise ValueError("inverse is defined for y >= 0")
        if self.kind == "power":
            out = (y / self.c) ** (1.0 / self.beta)
        elif self.kind == "linear":
            if self.slope == 0:
                raise ValueError("zero-slope linear reaction is not invertible")
            out = y / self.slope
        else:
            if np.any(y > self.knots_y[-1]):
                raise ValueError(
                    f"table reaction is flat beyond y={self.knots_y[-1]:g}; inverse undefined"
                )
            out = np.interp(y, self.knots_y, self.knots_x)
        return out if out.ndim else float(out)

    def lipschitz(self, upper: float) -> float:
        """Lipschitz constant of ``Phi`` on ``(-inf, upper]``."""
        if self.kind == "power":
            return self.c * self.beta * max(upper, 0.0) ** (self.beta - 1.0)
        if self.kind == "linear":
            return self.slope
        return float(np.max(np.diff(self.knots_y) / np.diff(self.knots_x)))

    @property
    def is_convex(self) -> bool:
        # the clamp after the last knot rules out convexity for tables
        return self.kind in ("power", "linear")

    def taylor_coefficients(self, order: int) -> np.ndarray:
        """``a_k = Phi^(k)(0) / k!`` for ``k = 1..order`` (``Phi`` analytic on ``[0, inf)``)."""
        coeffs = np.zeros(order)
        if self.kind == "linear":
            if order >= 1:
                coeffs[0] = self.slope
            return coeffs
        if self.kind == "power" and float(self.beta).is_integer():
            k = int(self.beta)
            if k <= order:
                coeffs[k - 1] = self.c
            return coeffs
        raise ValueError(f"{self.describe()} has no power series at 0")


def upsilon(alpha: float, beta: float) -> float:
    """Time-scaling exponent in ``r*(gamma, t) = gamma r*(1, gamma^-upsilon t)``."""
    return (1.0 - beta) / (beta * (1.0 - alpha))
