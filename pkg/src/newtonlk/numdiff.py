"""Central finite differences with one level of Richardson extrapolation.

Used wherever a quantity is only available pointwise on a chart (the Gauss
map, the mean curvatures, user charts without closed-form derivatives).
Both stencils are second order; combining steps ``h`` and ``h/2`` as
``(4 D(h/2) - D(h)) / 3`` cancels the leading error term.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DomainError

FIRST_STEP = 1e-4
SECOND_STEP = 1e-3


def first_step(u: np.ndarray) -> float:
    return FIRST_STEP * max(1.0, float(np.linalg.norm(u)))


def _guard(u: np.ndarray, h: float) -> None:
    if not np.isfinite(h) or h <= 0:
        raise DomainError(f"invalid finite-difference step {h!r}")
    scale = np.maximum(np.abs(u), 1.0)
    if np.any(h / 2 < 8 * np.finfo(float).eps * scale):
        raise DomainError(f"finite-difference step {h:g} underflows at |u|={np.abs(u).max():g}")


def gradient(f: Callable, u, h: float | None = None) -> np.ndarray:
    """Derivatives ``d_i f(u)``; output shape ``(n,) + f(u).shape``."""
    u = np.asarray(u, dtype=float)
    h = first_step(u) if h is None else h
    _guard(u, h)
    n = u.size

    def central(step):
        rows = []
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            rows.append((np.asarray(f(u + e)) - np.asarray(f(u - e))) / (2 * step))
        return np.array(rows)

    return (4 * central(h / 2) - central(h)) / 3


def hessian(f: Callable, u, h: float = SECOND_STEP, f0=None) -> np.ndarray:
    """Second derivatives ``d_i d_j f(u)``; output shape ``(n, n) + f(u).shape``."""
    u = np.asarray(u, dtype=float)
    _guard(u, h)
    n = u.size
    if f0 is None:
        f0 = np.asarray(f(u))

    def stencil(step):
        out = np.empty((n, n) + np.shape(f0))
        basis = np.eye(n) * step
        for i in range(n):
            ei = basis[i]
            out[i, i] = (np.asarray(f(u + ei)) - 2 * f0 + np.asarray(f(u - ei))) / step**2
            for j in range(i + 1, n):
                ej = basis[j]
                val = (
                    np.asarray(f(u + ei + ej))
                    - np.asarray(f(u + ei - ej))
                    - np.asarray(f(u - ei + ej))
                    + np.asarray(f(u - ei - ej))
                ) / (4 * step**2)
                out[i, j] = val
                out[j, i] = val
        return out

    return (4 * stencil(h / 2) - stencil(h)) / 3


def jet(f: Callable, u, h1: float | None = None, h2: float = SECOND_STEP):
    """Value, gradient and Hessian of ``f`` at ``u``."""
    u = np.asarray(u, dtype=float)
    f0 = np.asarray(f(u))
    return f0, gradient(f, u, h1), hessian(f, u, h2, f0=f0)
