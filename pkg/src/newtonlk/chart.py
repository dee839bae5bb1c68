"""Extrinsic geometry of parametrized hypersurfaces in the sphere or in
hyperbolic space.

The space form of curvature ``c`` sits in ``R^{n+2}`` as the quadric
``<x, x> = c``.  For ``c = -1`` the ambient metric is Lorentzian with the
timelike slot in coordinate ``x_0`` and points are taken on the upper sheet
``x_0 > 0``.  A :class:`Chart` maps ``u in R^n`` to a point ``x(u)`` of the
hypersurface; :func:`frame` turns the 2-jet of ``x`` at ``u`` into the
induced metric, Gauss map, second fundamental form, shape operator,
Christoffel symbols and principal curvatures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import numdiff
from .errors import DomainError, ImmersionError, MetricSignatureError, OffManifoldError
from .symfun import CurvatureProfile, curvature_profile

TOL_CONSTRAINT = 1e-10
TOL_DERIV = 1e-6
MAX_METRIC_CONDITION = 1e12


@dataclass(frozen=True)
class AmbientSpace:
    """``S^{n+1}`` in Euclidean ``R^{n+2}`` (c=1) or ``H^{n+1}`` in ``R^{n+2}_1`` (c=-1)."""

    c: int
    n: int

    def __post_init__(self):
        if self.c not in (1, -1):
            raise DomainError(f"curvature sign must be +1 or -1, got {self.c!r}")
        if self.n < 1:
            raise DomainError(f"hypersurface dimension must be >= 1, got {self.n}")

    @property
    def dim_ambient(self) -> int:
        return self.n + 2

    @property
    def q(self) -> int:
        return 0 if self.c == 1 else 1

    @cached_property
    def G(self) -> np.ndarray:
        """Signature matrix ``diag(-1, 1, ..., 1)`` (or the identity for the sphere)."""
        d = np.ones(self.dim_ambient)
        d[: self.q] = -1.0
        return np.diag(d)

    def inner(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        val = np.sum(x * y, axis=-1)
        if self.c == -1:
            val = val - 2 * x[..., 0] * y[..., 0]
        return val

    def constraint_defect(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(abs(self.inner(x, x) - self.c) / max(1.0, float(x @ x)))

    def check_point(self, x, tol: float = TOL_CONSTRAINT) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim_ambient,):
            raise DomainError(f"expected a point of R^{self.dim_ambient}, got shape {x.shape}")
        if self.constraint_defect(x) > tol:
            raise OffManifoldError(f"<x,x> = {self.inner(x, x):.3e} differs from c = {self.c}")
        if self.c == -1 and x[0] <= 0:
            raise OffManifoldError("point lies on the lower sheet of the hyperboloid (x_0 <= 0)")


Jet = tuple[np.ndarray, np.ndarray, np.ndarray]


class Chart:
    """Parametrization ``u -> x(u)`` of a hypersurface of a space form.

    Args:
        space: the ambient space form.
        map: ``u -> x(u)``, an ``(n,)`` to ``(n+2,)`` callable.
        jet: optional closed-form ``u -> (x, dx, ddx)`` with ``dx[i] = d_i x``
            and ``ddx[i, j] = d_i d_j x``.  Without it derivatives are taken by
            central differences.
        domain: ``(lo, hi)`` box used when sampling chart points.
        base_point: point where the orientation is fixed.
        orientation_ref: ambient vector with ``<N, ref> > 0`` at the base point.
            Without one, ``det[N, x, d_1 x, ..., d_n x] > 0`` defines the orientation.
        orientation_sign: extra global sign applied to ``N``.
    """

    def __init__(
        self,
        space: AmbientSpace,
        map: Callable[[np.ndarray], np.ndarray],
        jet: Optional[Callable[[np.ndarray], Jet]] = None,
        domain=None,
        base_point=None,
        orientation_ref=None,
        orientation_sign: int = 1,
        name: str = "chart",
    ):
        if orientation_sign not in (1, -1):
            raise DomainError("orientation_sign must be +1 or -1")
        self.space = space
        self.n = space.n
        self._map = map
        self._jet = jet
        self.name = name
        if domain is None:
            domain = (-np.ones(self.n), np.ones(self.n))
        lo, hi = (np.broadcast_to(np.asarray(b, dtype=float), (self.n,)).copy() for b in domain)
        self.domain = (lo, hi)
        self.base_point = np.zeros(self.n) if base_point is None else np.asarray(base_point, dtype=float)
        self.orientation_ref = None if orientation_ref is None else np.asarray(orientation_ref, dtype=float)
        self.orientation_sign = orientation_sign
        self._det_sign: Optional[float] = None

    @property
    def derivative_mode(self) -> str:
        return "closed_form" if self._jet is not None else "numeric"

    def map(self, u) -> np.ndarray:
        return np.asarray(self._map(np.asarray(u, dtype=float)), dtype=float)

    def jet(self, u) -> Jet:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise DomainError(f"chart point must have shape ({self.n},), got {u.shape}")
        if self._jet is not None:
            x, dx, ddx = self._jet(u)
            return np.asarray(x, float), np.asarray(dx, float), np.asarray(ddx, float)
        x, dx, ddx = numdiff.jet(self.map, u)
        return x, dx, ddx

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """``count`` points drawn uniformly from the domain box."""
        lo, hi = self.domain
        return lo + (hi - lo) * rng.random((count, self.n))

    def reparametrized(self, B, shift=None) -> "Chart":
        """The chart ``v -> x(B v + shift)``."""
        B = np.asarray(B, dtype=float)
        shift = np.zeros(self.n) if shift is None else np.asarray(shift, dtype=float)
        if B.shape != (self.n, self.n) or abs(np.linalg.det(B)) < 1e-12:
            raise DomainError("reparametrization matrix must be square and invertible")
        Binv = np.linalg.inv(B)
        inner = self

        def map_v(v):
            return inner.map(B @ v + shift)

        jet_v = None
        if self._jet is not None:

            def jet_v(v):
                x, dx, ddx = inner.jet(B @ v + shift)
                return x, B.T @ dx, np.einsum("ai,abm,bj->ijm", B, ddx, B)

        # box around the preimage of the base point, mapped inside the parent box
        v0 = Binv @ (self.base_point - shift)
        lo, hi = self.domain
        room = min(np.min(self.base_point - lo), np.min(hi - self.base_point))
        half = 0.5 * room / np.abs(B).sum(axis=1).max()
        if not half > 0:
            raise DomainError("base point lies on the boundary of the chart domain")
        return Chart(
            self.space,
            map_v,
            jet_v,
            domain=(v0 - half, v0 + half),
            base_point=v0,
            orientation_ref=frame(self, self.base_point).N,
            orientation_sign=1,
            name=f"{self.name}∘linear",
        )

    def _orientation(self) -> float:
        if self._det_sign is None:
            x, dx, _ = self.jet(self.base_point)
            n_raw = _raw_normal(self.space, x, dx)
            if self.orientation_ref is not None:
                pairing = self.space.inner(n_raw, self.orientation_ref)
                if abs(pairing) < 1e-12 * max(1.0, np.linalg.norm(self.orientation_ref)):
                    raise DomainError("orientation reference is tangent at the base point")
                n_raw = n_raw * np.sign(pairing)
            det = np.linalg.det(np.vstack([n_raw, x, dx]))
            self._det_sign = 1.0 if self.orientation_ref is None else float(np.sign(det))
        return self._det_sign

    def __repr__(self) -> str:
        return f"Chart({self.name!r}, c={self.space.c}, n={self.n}, mode={self.derivative_mode})"


def _raw_normal(space: AmbientSpace, x: np.ndarray, dx: np.ndarray) -> np.ndarray:
    """Unit normal up to sign: the null vector of the pairings against ``{x, d_i x}``."""
    pairings = np.vstack([x, dx]) @ space.G
    _, _, vt = np.linalg.svd(pairings)
    v = vt[-1]
    norm2 = space.inner(v, v)
    if norm2 <= 0:
        raise MetricSignatureError("normal direction is not spacelike")
    return v / np.sqrt(norm2)


def pencil_eigen(h: np.ndarray, g: np.ndarray):
    """Eigenvalues of ``h v = kappa g v`` via the Cholesky congruence ``g = L L^T``.

    Returns ``(kappa, V, S_on, E)``: ascending eigenvalues, g-orthonormal
    eigenvectors (columns, chart coordinates), the symmetric matrix of the
    pencil in the g-orthonormal basis ``E = L^{-T}``, and ``E`` itself.
    """
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise MetricSignatureError("induced metric is not positive definite") from exc
    E = np.linalg.inv(L).T
    S_on = E.T @ h @ E
    S_on = 0.5 * (S_on + S_on.T)
    kappa, Q = np.linalg.eigh(S_on)
    return kappa, E @ Q, S_on, E


@dataclass(frozen=True)
class FrameData:
    """Extrinsic geometry at one chart point.

    ``tangents[i]`` is ``d_i x``; ``Gamma[k, i, j]`` is ``Gamma^k_ij``;
    ``S_chart = g^{-1} h`` acts on chart-coordinate columns; ``S_on`` is the
    same operator in the g-orthonormal basis ``onb`` (columns, chart
    coordinates) and ``principal_dirs`` are its eigenvectors in chart
    coordinates.
    """

    u: np.ndarray
    x: np.ndarray
    tangents: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    N: np.ndarray
    h: np.ndarray
    S_chart: np.ndarray
    kappa: np.ndarray
    Gamma: np.ndarray
    orientation_sign: int
    S_on: np.ndarray
    onb: np.ndarray
    principal_dirs: np.ndarray
    space: AmbientSpace = field(repr=False)
    second: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.u.size

    @cached_property
    def profile(self) -> CurvatureProfile:
        return curvature_profile(self.kappa)

    def H(self, k: int) -> float:
        return self.profile.H_at(k)

    def to_ambient(self, w) -> np.ndarray:
        """Ambient vector of a tangent vector given in chart coordinates."""
        return np.asarray(w, dtype=float) @ self.tangents

    def gradient_vector(self, df) -> np.ndarray:
        """Ambient gradient of a function with chart differential ``df``."""
        return self.to_ambient(self.g_inv @ np.asarray(df, dtype=float))

    def shape_ambient(self, i: int) -> np.ndarray:
        """``S(d_i x)`` as an ambient vector."""
        return self.to_ambient(self.S_chart[:, i])


def frame(chart: Chart, u) -> FrameData:
    """Full extrinsic frame of ``chart`` at ``u``."""
    u = np.asarray(u, dtype=float)
    space = chart.space
    x, dx, ddx = chart.jet(u)
    space.check_point(x)
    G = space.G
    g = dx @ G @ dx.T
    g = 0.5 * (g + g.T)
    ev = np.linalg.eigvalsh(g)
    if ev[-1] <= 0 or ev[0] < -1e-12 * ev[-1]:
        raise MetricSignatureError(f"induced metric has eigenvalues {ev}")
    if ev[0] <= ev[-1] / MAX_METRIC_CONDITION:
        raise ImmersionError(f"tangent frame is degenerate (metric condition {ev[-1] / max(ev[0], 1e-300):.2e})")
    g_inv = np.linalg.inv(g)

    N = _raw_normal(space, x, dx)
    det = np.linalg.det(np.vstack([N, x, dx]))
    N = N * (np.sign(det) * chart._orientation() * chart.orientation_sign)

    h = np.einsum("ijm,mp,p->ij", ddx, G, N)
    h = 0.5 * (h + h.T)
    lowered = np.einsum("ijm,mp,lp->ijl", ddx, G, dx)
    Gamma = np.einsum("kl,ijl->kij", g_inv, lowered)
    Gamma = 0.5 * (Gamma + Gamma.transpose(0, 2, 1))
    kappa, V, S_on, E = pencil_eigen(h, g)
    return FrameData(
        u=u,
        x=x,
        tangents=dx,
        g=g,
        g_inv=g_inv,
        N=N,
        h=h,
        S_chart=g_inv @ h,
        kappa=kappa,
        Gamma=Gamma,
        orientation_sign=chart.orientation_sign,
        S_on=S_on,
        onb=E,
        principal_dirs=V,
        space=space,
        second=ddx,
    )


def principal_curvatures(fr: FrameData) -> np.ndarray:
    """Eigenvalues of the pencil ``(h, g)``, ascending."""
    kappa, _, _, _ = pencil_eigen(fr.h, fr.g)
    return kappa


def hessian(chart: Chart, u, f: Callable, form: str = "covariant", fr: FrameData | None = None) -> np.ndarray:
    """Riemannian Hessian of ``f`` (a function of the chart parameter) at ``u``.

    ``form="covariant"`` returns ``d_i d_j f - Gamma^k_ij d_k f``;
    ``form="endomorphism"`` raises the first index with ``g^{-1}``.  Vector
    valued ``f`` is handled componentwise (trailing axes).
    """
    if form not in ("covariant", "endomorphism"):
        raise DomainError(f"unknown Hessian form {form!r}")
    u = np.asarray(u, dtype=float)
    if fr is None:
        fr = frame(chart, u)
    _, df, ddf = numdiff.jet(f, u)
    cov = ddf - np.tensordot(fr.Gamma, df, axes=([0], [0]))
    if form == "covariant":
        return cov
    return np.tensordot(fr.g_inv, cov, axes=([1], [0]))


def tangential_projection(fr: FrameData, v) -> np.ndarray:
    """Tangential part ``v - <v,N> N - c <v,x> x`` of an ambient vector."""
    v = np.asarray(v, dtype=float)
    space = fr.space
    return v - space.inner(v, fr.N) * fr.N - space.c * space.inner(v, fr.x) * fr.x


def numeric_chart(space: AmbientSpace, map: Callable, **kwargs) -> Chart:
    """Chart whose derivatives are taken by finite differences."""
    return Chart(space, map, jet=None, **kwargs)
