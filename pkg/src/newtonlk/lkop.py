"""The linearized operators ``L_k f = tr(P_k o Hess f)`` on a chart.

Every evaluation is dual-path where a closed form exists: the numeric path
differentiates the field over the chart (finite differences of ``x(u)``,
``N(u)`` or ``H_j(u)``) and contracts the Riemannian Hessian with ``P_k``;
the closed-form path substitutes the frame's mean curvatures into

    L_k <a, x> = c_k H_{k+1} <a, N> - c c_k H_k <a, x>,
    L_k N      = -binom(n, k+1) grad H_{k+1}
                 - binom(n, k+1) (n H_1 H_{k+1} - (n-k-1) H_{k+2}) N
                 + c (k+1) binom(n, k+1) H_{k+1} x.

``P_k`` is assembled in the principal frame of the pencil ``(h, g)`` from the
eigenvalues ``mu_{i,k}``, which avoids repeated products of the skewed
chart-basis shape operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Optional

import numpy as np

from . import numdiff
from .chart import Chart, FrameData, frame, hessian, tangential_projection
from .errors import DomainError
from .symfun import c_k, newton_eigenvalues

TOL_POSITION = 1e-5
TOL_GAUSS = 1e-4


@dataclass(frozen=True, eq=False)
class LkEvaluation:
    """Result of one ``L_k`` evaluation.

    ``discrepancy`` is ``|numeric - closed| / (1 + |closed|)`` (Euclidean
    coordinate norm for vector values); it is ``None`` when no closed form
    applies.
    """

    k: int
    value_numeric: np.ndarray
    value_closed_form: Optional[np.ndarray] = None
    discrepancy: Optional[float] = None


class LinearField:
    """The coordinate function ``u -> <a, x(u)>`` of a chart."""

    def __init__(self, chart: Chart, a):
        self.chart = chart
        self.a = np.asarray(a, dtype=float)

    def __call__(self, u):
        return self.chart.space.inner(self.a, self.chart.map(u))


def relative_discrepancy(numeric, closed) -> float:
    numeric = np.asarray(numeric, dtype=float)
    closed = np.asarray(closed, dtype=float)
    return float(np.linalg.norm(numeric - closed) / (1.0 + np.linalg.norm(closed)))


def _check_k(n: int, k: int) -> None:
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= n - 1:
        raise DomainError(f"order k={k} outside [0, {n - 1}]")


def newton_chart(fr: FrameData, k: int) -> np.ndarray:
    """``P_k`` as a matrix acting on chart-coordinate tangent vectors."""
    _check_k(fr.n, k)
    V = fr.principal_dirs
    mu = newton_eigenvalues(fr.kappa, k)
    # V is g-orthonormal, so V^{-1} = V^T g
    return V @ np.diag(mu) @ V.T @ fr.g


def contract(fr: FrameData, hess_cov: np.ndarray, k: int) -> np.ndarray:
    """``tr(P_k o g^{-1} Hess)`` for a covariant Hessian with optional trailing axes."""
    _check_k(fr.n, k)
    V = fr.principal_dirs
    mu = newton_eigenvalues(fr.kappa, k)
    diag = np.einsum("ia,ij...,ja->a...", V, hess_cov, V)
    return np.tensordot(mu, diag, axes=([0], [0]))


def lk_scalar(chart: Chart, u, f: Callable, k: int, fr: FrameData | None = None) -> LkEvaluation:
    """``L_k f`` at ``u`` for ``f`` a function of the chart parameter.

    A :class:`LinearField` additionally gets the closed form
    ``c_k H_{k+1} <a, N> - c c_k H_k <a, x>``.
    """
    u = np.asarray(u, dtype=float)
    if fr is None:
        fr = frame(chart, u)
    _check_k(fr.n, k)
    value = contract(fr, hessian(chart, u, f, fr=fr), k)
    if not isinstance(f, LinearField):
        return LkEvaluation(k, value)
    space = chart.space
    ck = c_k(fr.n, k)
    closed = ck * fr.H(k + 1) * space.inner(f.a, fr.N) - space.c * ck * fr.H(k) * space.inner(f.a, fr.x)
    return LkEvaluation(k, value, closed, relative_discrepancy(value, closed))


def lk_position(chart: Chart, u, k: int, fr: FrameData | None = None) -> LkEvaluation:
    """``L_k x``: componentwise numeric path against ``c_k H_{k+1} N - c c_k H_k x``."""
    u = np.asarray(u, dtype=float)
    if fr is None:
        fr = frame(chart, u)
    _check_k(fr.n, k)
    value = contract(fr, hessian(chart, u, chart.map, fr=fr), k)
    closed = position_closed_form(fr, k)
    return LkEvaluation(k, value, closed, relative_discrepancy(value, closed))


def position_closed_form(fr: FrameData, k: int) -> np.ndarray:
    ck = c_k(fr.n, k)
    return ck * fr.H(k + 1) * fr.N - fr.space.c * ck * fr.H(k) * fr.x


def gauss_map_field(chart: Chart) -> Callable:
    """``u -> N(u)`` with the chart's orientation."""
    return lambda u: frame(chart, u).N


def mean_curvature_field(chart: Chart, j: int) -> Callable:
    """``u -> H_j(u)`` (zero for ``j > n``)."""
    return lambda u: frame(chart, u).H(j)


def curvature_differential(chart: Chart, u, j: int) -> np.ndarray:
    """Chart differential ``d_i H_j`` by central differences."""
    if j > chart.n:
        return np.zeros(chart.n)
    return numdiff.gradient(mean_curvature_field(chart, j), u)


def mean_curvature_differentials(chart: Chart, u) -> np.ndarray:
    """Rows ``d H_j`` for ``j = 0..n+2`` from one differentiation of the whole profile."""
    n = chart.n
    dH = numdiff.gradient(lambda v: frame(chart, v).profile.H, u)
    return np.vstack([dH.T, np.zeros((2, n))])


def lk_gauss(chart: Chart, u, k: int, fr: FrameData | None = None) -> LkEvaluation:
    """``L_k N``: numeric Hessian of the Gauss map against the closed form."""
    u = np.asarray(u, dtype=float)
    if fr is None:
        fr = frame(chart, u)
    n = fr.n
    _check_k(n, k)
    value = contract(fr, hessian(chart, u, gauss_map_field(chart), fr=fr), k)
    grad = fr.gradient_vector(curvature_differential(chart, u, k + 1))
    closed = gauss_closed_form(fr, k, grad)
    return LkEvaluation(k, value, closed, relative_discrepancy(value, closed))


def gauss_closed_form(fr: FrameData, k: int, grad_Hk1: np.ndarray) -> np.ndarray:
    n = fr.n
    bk = comb(n, k + 1)
    H1, Hk1, Hk2 = fr.H(1), fr.H(k + 1), fr.H(k + 2)
    return (
        -bk * grad_Hk1
        - bk * (n * H1 * Hk1 - (n - k - 1) * Hk2) * fr.N
        + fr.space.c * (k + 1) * bk * Hk1 * fr.x
    )


def point_evaluations(chart: Chart, u, orders=None) -> dict[int, tuple[LkEvaluation, LkEvaluation]]:
    """``{k: (lk_position, lk_gauss)}`` at one point, sharing the Hessians across orders."""
    u = np.asarray(u, dtype=float)
    fr = frame(chart, u)
    orders = range(fr.n) if orders is None else orders
    hess_x = hessian(chart, u, chart.map, fr=fr)
    hess_N = hessian(chart, u, gauss_map_field(chart), fr=fr)
    dH = mean_curvature_differentials(chart, u)
    out = {}
    for k in orders:
        _check_k(fr.n, k)
        vx = contract(fr, hess_x, k)
        cx = position_closed_form(fr, k)
        vN = contract(fr, hess_N, k)
        cN = gauss_closed_form(fr, k, fr.gradient_vector(dH[k + 1]))
        out[k] = (
            LkEvaluation(k, vx, cx, relative_discrepancy(vx, cx)),
            LkEvaluation(k, vN, cN, relative_discrepancy(vN, cN)),
        )
    return out


@dataclass(frozen=True)
class LkHkCheck:
    applicable: bool
    residual: Optional[float]
    precondition_defect: float


def lk_Hk(chart: Chart, u, k: int, b, fr: FrameData | None = None, tol: float = 1e-6) -> LkHkCheck:
    """Residual of ``L_k H_k = H_{k+1} <b, N> - c H_k <b, x>``.

    Only meaningful when the tangential part of ``b`` equals
    ``c_k grad H_k``; otherwise ``applicable`` is False and no residual is
    reported.
    """
    u = np.asarray(u, dtype=float)
    b = np.asarray(b, dtype=float)
    if fr is None:
        fr = frame(chart, u)
    _check_k(fr.n, k)
    space = chart.space
    grad_Hk = fr.gradient_vector(curvature_differential(chart, u, k))
    defect = float(np.linalg.norm(tangential_projection(fr, b) - c_k(fr.n, k) * grad_Hk))
    if defect > tol * (1.0 + np.linalg.norm(b)):
        return LkHkCheck(False, None, defect)
    lhs = lk_scalar(chart, u, mean_curvature_field(chart, k), k, fr=fr).value_numeric
    rhs = fr.H(k + 1) * space.inner(b, fr.N) - space.c * fr.H(k) * space.inner(b, fr.x)
    return LkHkCheck(True, float(abs(lhs - rhs)), defect)


def product_rule_defect(chart: Chart, u, f: Callable, g: Callable, k: int, fr: FrameData | None = None) -> float:
    """``|L_k(fg) - (L_k f) g - f (L_k g) - 2 <P_k grad f, grad g>|``."""
    u = np.asarray(u, dtype=float)
    if fr is None:
        fr = frame(chart, u)
    Lfg = lk_scalar(chart, u, lambda v: f(v) * g(v), k, fr=fr).value_numeric
    Lf = lk_scalar(chart, u, f, k, fr=fr).value_numeric
    Lg = lk_scalar(chart, u, g, k, fr=fr).value_numeric
    df = numdiff.gradient(f, u)
    dg = numdiff.gradient(g, u)
    # <P_k grad f, grad g> = df . P_k g^{-1} dg in chart coordinates
    cross = df @ newton_chart(fr, k) @ fr.g_inv @ dg
    return float(abs(Lfg - Lf * g(u) - f(u) * Lg - 2 * cross))
