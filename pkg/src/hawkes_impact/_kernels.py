"""Compiled inner loops shared by the solver and the simulator.

Discrete convolution convention (node arrays ``v`` of length ``n + 1``)::

    conv_n(v) = sum_{j <= n - 2} w[n - j] v[j] + w[1] v[n],   conv_0(v) = 0

i.e. each cell ``[t_j, t_{j+1}]`` carries its left-endpoint value, except the
newest cell which carries the value at the current node.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def phi_eval(code, p1, p2, xs, ys, x):
    if x <= 0.0:
        return 0.0
    if code == 0:
        if p2 == 2.0:
            return p1 * x * x
        return p1 * x**p2
    if code == 1:
        return p1 * x
    return np.interp(x, xs, ys)


@njit(cache=True, nogil=True)
def conv_nodes(v, w):
    n1 = v.shape[0]
    out = np.zeros(n1)
    for n in range(1, n1):
        s = 0.0
        for j in range(n - 1):
            s += w[n - j] * v[j]
        out[n] = s + w[1] * v[n]
    return out


@njit(cache=True, nogil=True)
def conv_cells(c, w):
    """``sum_{j <= n - 1} w[n - j] c[j]`` for cell values ``c`` (length ``n``)."""
    ncell = c.shape[0]
    out = np.zeros(ncell + 1)
    for n in range(1, ncell + 1):
        s = 0.0
        for j in range(n):
            s += w[n - j] * c[j]
        out[n] = s
    return out


@njit(cache=True, nogil=True)
def solve_nonlinear(force_cells, w, scale, code, p1, p2, xs, ys):
    """Node-by-node solve of ``u = scale (conv_cells(force) - conv_nodes(Phi(u)))``.

    Each step solves ``u + b Phi(u) = A`` by bisection on ``[0, A]``.
    """
    ncell = force_cells.shape[0]
    u = np.zeros(ncell + 1)
    r = np.zeros(ncell + 1)
    b = scale * w[1]
    for n in range(1, ncell + 1):
        s = 0.0
        for j in range(n):
            s += w[n - j] * force_cells[j]
        for j in range(n - 1):
            s -= w[n - j] * r[j]
        A = scale * s
        if A <= 0.0:
            u[n] = A
            r[n] = 0.0
            continue
        lo = 0.0
        hi = A
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if mid + b * phi_eval(code, p1, p2, xs, ys, mid) > A:
                hi = mid
            else:
                lo = mid
        u[n] = lo
        r[n] = phi_eval(code, p1, p2, xs, ys, lo)
    return u, r


@njit(cache=True, nogil=True)
def solve_linear(rhs, w, coef):
    """Node-by-node solve of ``x + coef conv_nodes(x) = rhs`` with ``x[0] = rhs[0]``."""
    n1 = rhs.shape[0]
    x = np.zeros(n1)
    x[0] = rhs[0]
    d = 1.0 + coef * w[1]
    for n in range(1, n1):
        s = 0.0
        for j in range(n - 1):
            s += w[n - j] * x[j]
        x[n] = (rhs[n] - coef * s) / d
    return x
