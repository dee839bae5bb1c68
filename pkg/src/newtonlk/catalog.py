"""Closed-form example families and their exact affine data ``(A, b)``.

Four families satisfy ``L_k x = A x + b`` with explicitly known constants:

* ``umbilic_sphere_cap``: ``{x in S^{n+1} : <a, x> = tau}``, ``|tau| < 1``;
* ``umbilic_hyperbolic``: ``{x in H^{n+1} : <a, x> = tau}`` for a spacelike,
  timelike or lightlike axis ``a``;
* ``riemannian_product``: ``{x : x_{m+1}^2 + ... + x_{n+1}^2 = r^2}`` in
  ``S^{n+1}`` or ``H^{n+1}``;
* ``zero_Hk1``: a concrete member with ``H_{k+1} = 0`` and constant ``H_k``
  (a totally geodesic slice, or for ``c = 1`` a product whose radius solves
  ``sigma_{k+1} = 0``).

Charts are built from graph parametrizations of the unit sphere
(``w -> (w, sqrt(1 - |w|^2))``), of hyperbolic space
(``w -> (sqrt(1 + |w|^2), w)``) and, for the lightlike axis, of a
horosphere; all supply closed-form first and second derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from functools import cached_property
from math import comb, sqrt
from typing import Optional

import numpy as np

from .chart import AmbientSpace, Chart
from .errors import DomainError
from .symfun import c_k, curvature_profile

KINDS = ("umbilic_sphere_cap", "umbilic_hyperbolic", "riemannian_product", "zero_Hk1")
AXIS_TYPES = {"spacelike": 1, "timelike": -1, "lightlike": 0}


# -- graph charts of the model spaces ----------------------------------------

def _sphere_graph(w: np.ndarray):
    """Unit sphere ``S^p`` in ``R^{p+1}`` over the ball ``|w| < 1`` (pole last)."""
    p = w.size
    s2 = 1.0 - w @ w
    if s2 <= 0:
        raise DomainError("sphere graph chart needs |w| < 1")
    s = sqrt(s2)
    y = np.append(w, s)
    dy = np.zeros((p, p + 1))
    dy[:, :p] = np.eye(p)
    dy[:, p] = -w / s
    ddy = np.zeros((p, p, p + 1))
    ddy[:, :, p] = -(np.eye(p) / s + np.outer(w, w) / s**3)
    return y, dy, ddy


def _hyperbolic_graph(w: np.ndarray):
    """Unit hyperbolic space ``H^p`` in ``R^{p+1}_1`` (time slot first)."""
    p = w.size
    s = sqrt(1.0 + w @ w)
    z = np.concatenate(([s], w))
    dz = np.zeros((p, p + 1))
    dz[:, 0] = w / s
    dz[:, 1:] = np.eye(p)
    ddz = np.zeros((p, p, p + 1))
    ddz[:, :, 0] = np.eye(p) / s - np.outer(w, w) / s**3
    return z, dz, ddz


def _sphere_box(p: int) -> float:
    return 0.6 / sqrt(p)


def householder_to(a: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Orthogonal reflection exchanging the unit vectors ``e`` and ``a``."""
    v = e - a
    nv = np.linalg.norm(v)
    if nv < 1e-14:
        return np.eye(a.size)
    v = v / nv
    return np.eye(a.size) - 2 * np.outer(v, v)


# -- families ----------------------------------------------------------------

@dataclass(eq=False)
class ExampleFamily:
    """One closed-form family.

    ``axis`` is the ambient axis vector of the umbilic families; ``motion`` is
    an optional ambient isometry applied to the whole family (so the realized
    hypersurface is ``motion @ x``).  ``k`` is only needed for the
    ``zero_Hk1`` product realization, whose radius depends on it.
    """

    kind: str
    c: int
    n: int
    tau: Optional[float] = None
    r: Optional[float] = None
    m: Optional[int] = None
    axis_type: Optional[str] = None
    realization: Optional[str] = None
    k: Optional[int] = None
    axis: Optional[np.ndarray] = field(default=None, repr=False)
    motion: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        _validate(self)

    # geometry of the unmoved family, then transported by ``motion``
    @cached_property
    def _base(self):
        return _build(self)

    @property
    def space(self) -> AmbientSpace:
        return AmbientSpace(self.c, self.n)

    @property
    def axis_vector(self) -> np.ndarray:
        """Axis ``a`` of the umbilic families (after ``motion``)."""
        a = self._base["axis"]
        if a is None:
            raise DomainError(f"{self.kind} has no axis")
        return self._motion() @ a

    def _motion(self) -> np.ndarray:
        return np.eye(self.n + 2) if self.motion is None else np.asarray(self.motion, dtype=float)

    @cached_property
    def chart(self) -> Chart:
        base = self._base
        R = self._motion()
        jet0 = base["jet"]

        def jet(u):
            x, dx, ddx = jet0(u)
            return R @ x, dx @ R.T, ddx @ R.T

        def map_(u):
            return R @ jet0(u)[0]

        lo, hi = base["domain"]
        ref = R @ base["ref"]
        return Chart(self.space, map_, jet, domain=(lo, hi), orientation_ref=ref, name=self.label)

    @property
    def kappa(self) -> np.ndarray:
        """Exact principal curvatures (ascending)."""
        return np.sort(np.asarray(self._base["kappa"], dtype=float))

    @property
    def label(self) -> str:
        parts = [self.kind, f"c={self.c}", f"n={self.n}"]
        for name in ("tau", "r", "m", "axis_type", "realization", "k"):
            val = getattr(self, name)
            if val is not None:
                parts.append(f"{name}={val:.6g}" if isinstance(val, float) else f"{name}={val}")
        return " ".join(parts)

    def to_config(self) -> dict:
        cfg = {key: val for key, val in asdict(self).items() if key not in ("axis", "motion") and val is not None}
        if self.axis is not None:
            cfg["axis"] = [float(v) for v in np.asarray(self.axis, dtype=float)]
        if self.motion is not None:
            cfg["motion"] = np.asarray(self.motion, dtype=float).tolist()
        return cfg

    def admissible_orders(self) -> range:
        if self.kind == "zero_Hk1" and self.realization == "product":
            return range(self.k, self.k + 1)
        return range(self.n)


def _validate(fam: ExampleFamily) -> None:
    if fam.kind not in KINDS:
        raise DomainError(f"unknown family kind {fam.kind!r}; expected one of {KINDS}")
    if fam.c not in (1, -1):
        raise DomainError("c must be +1 or -1")
    if not isinstance(fam.n, (int, np.integer)) or fam.n < 1:
        raise DomainError("n must be a positive integer")
    if fam.motion is not None:
        R = np.asarray(fam.motion, dtype=float)
        G = AmbientSpace(fam.c, fam.n).G
        if R.shape != (fam.n + 2,) * 2 or np.abs(R.T @ G @ R - G).max() > 1e-10:
            raise DomainError("motion must be an isometry of the ambient metric")
        if fam.c == -1 and R[0, 0] <= 0:
            raise DomainError("motion must preserve the upper sheet (R_00 > 0)")

    if fam.kind == "umbilic_sphere_cap":
        if fam.c != 1:
            raise DomainError("umbilic_sphere_cap lives in the sphere (c = 1)")
        if fam.tau is None or not -1 < fam.tau < 1:
            raise DomainError(f"umbilic_sphere_cap needs -1 < tau < 1, got {fam.tau}")
        if fam.axis is not None:
            a = np.asarray(fam.axis, dtype=float)
            if a.shape != (fam.n + 2,) or abs(a @ a - 1) > 1e-10:
                raise DomainError("sphere cap axis must be a unit vector of R^{n+2}")
    elif fam.kind == "umbilic_hyperbolic":
        if fam.c != -1:
            raise DomainError("umbilic_hyperbolic lives in hyperbolic space (c = -1)")
        if fam.axis_type not in AXIS_TYPES:
            raise DomainError(f"axis_type must be one of {tuple(AXIS_TYPES)}, got {fam.axis_type!r}")
        if fam.tau is None:
            raise DomainError("umbilic_hyperbolic needs tau")
        classify_example3(AXIS_TYPES[fam.axis_type], fam.tau)
    elif fam.kind == "riemannian_product":
        _check_product(fam.c, fam.n, fam.m, fam.r)
    else:
        if fam.realization is None:
            fam.realization = "geodesic"
        if fam.realization not in ("geodesic", "product"):
            raise DomainError("zero_Hk1 realization must be 'geodesic' or 'product'")
        if fam.realization == "product":
            if fam.c != 1:
                raise DomainError("products in H^{n+1} never have a vanishing mean curvature")
            if fam.k is None or not 0 <= fam.k <= fam.n - 1:
                raise DomainError("zero_Hk1 product realization needs 0 <= k <= n-1")
            if fam.m is None or not 1 <= fam.m <= fam.n - 1:
                raise DomainError("zero_Hk1 product realization needs 1 <= m <= n-1")
            if fam.r is None:
                fam.r = zero_curvature_radius(fam.n, fam.m, fam.k)


def _check_product(c, n, m, r) -> None:
    if n < 2:
        raise DomainError("products need n >= 2")
    if m is None or not 1 <= m <= n - 1:
        raise DomainError(f"product needs 1 <= m <= n-1, got m={m}")
    if r is None:
        raise DomainError("product needs a radius r")
    if c == 1 and not 0 < r < 1:
        raise DomainError(f"product in S^(n+1) needs 0 < r < 1, got r={r}")
    if c == -1 and not r > 0:
        raise DomainError(f"product in H^(n+1) needs r > 0, got r={r}")


def zero_curvature_radius(n: int, m: int, k: int) -> float:
    """Radius ``r`` of ``S^m(sqrt(1-r^2)) x S^{n-m}(r)`` with ``H_{k+1} = 0``.

    With ``t = r^2 / (1 - r^2)`` the curvatures are ``sqrt(t)`` (m times) and
    ``-1/sqrt(t)``, and ``sigma_{k+1} = 0`` becomes a polynomial in ``t``.
    The smallest positive root is used.
    """
    coeffs = np.zeros(k + 2)
    for j in range(k + 2):
        coeffs[j] = comb(m, j) * comb(n - m, k + 1 - j) * (-1) ** (k + 1 - j)
    roots = np.roots(coeffs[::-1]) if np.any(coeffs[1:]) else np.array([])
    good = sorted(t.real for t in roots if abs(t.imag) < 1e-12 and t.real > 1e-12)
    if not good:
        raise DomainError(f"no product S^{m} x S^{n - m} has H_{k + 1} = 0")
    t = good[0]
    return sqrt(t / (1 + t))


def _build(fam: ExampleFamily) -> dict:
    n = fam.n
    dim = n + 2
    kind = fam.kind
    if kind == "zero_Hk1":
        if fam.realization == "geodesic":
            if fam.c == 1:
                proxy = ExampleFamily("umbilic_sphere_cap", 1, n, tau=0.0)
            else:
                proxy = ExampleFamily("umbilic_hyperbolic", -1, n, tau=0.0, axis_type="spacelike")
        else:
            proxy = ExampleFamily("riemannian_product", 1, n, r=fam.r, m=fam.m)
        return _build(proxy)

    if kind == "umbilic_sphere_cap":
        tau = float(fam.tau)
        rho = sqrt(1 - tau**2)
        e = np.zeros(dim)
        e[-1] = 1.0
        a = e if fam.axis is None else np.asarray(fam.axis, dtype=float)
        Q = householder_to(a, e)

        def jet(u):
            y, dy, ddy = _sphere_graph(u)
            x0 = np.append(rho * y, tau)
            dx0 = np.hstack([rho * dy, np.zeros((n, 1))])
            ddx0 = np.concatenate([rho * ddy, np.zeros((n, n, 1))], axis=2)
            return Q @ x0, dx0 @ Q.T, ddx0 @ Q.T

        box = _sphere_box(n)
        return dict(jet=jet, domain=(-box, box), ref=a, axis=a, kappa=[tau / rho] * n)

    if kind == "umbilic_hyperbolic":
        tau = float(fam.tau)
        aa = AXIS_TYPES[fam.axis_type]
        if fam.axis_type == "spacelike":
            a = np.zeros(dim)
            a[-1] = 1.0
            R = sqrt(1 + tau**2)

            def jet(u):
                z, dz, ddz = _hyperbolic_graph(u)
                return (
                    np.append(R * z, tau),
                    np.hstack([R * dz, np.zeros((n, 1))]),
                    np.concatenate([R * ddz, np.zeros((n, n, 1))], axis=2),
                )

            box = 1.0
        elif fam.axis_type == "timelike":
            # <a, x> = -a_0 x_0 must equal tau with x_0 > 0, so a_0 = -sign(tau)
            sgn = -np.sign(tau)
            a = np.zeros(dim)
            a[0] = sgn
            rad = sqrt(tau**2 - 1)

            def jet(u):
                y, dy, ddy = _sphere_graph(u)
                return (
                    np.concatenate(([abs(tau)], rad * y)),
                    np.hstack([np.zeros((n, 1)), rad * dy]),
                    np.concatenate([np.zeros((n, n, 1)), rad * ddy], axis=2),
                )

            box = _sphere_box(n)
        else:
            # a = s (e_0 + e_{n+1}) with s = -sign(tau) so that x_0 - x_{n+1} = |tau| > 0
            sgn = -np.sign(tau)
            a = np.zeros(dim)
            a[0] = sgn
            a[-1] = sgn
            v = abs(tau)

            def jet(u):
                q = 1.0 + u @ u
                x = np.concatenate(([(v + q / v) / 2], u, [(q / v - v) / 2]))
                dx = np.zeros((n, dim))
                dx[:, 0] = u / v
                dx[:, 1 : n + 1] = np.eye(n)
                dx[:, -1] = u / v
                ddx = np.zeros((n, n, dim))
                ddx[:, :, 0] = np.eye(n) / v
                ddx[:, :, -1] = np.eye(n) / v
                return x, dx, ddx

            box = 1.0
        D = sqrt(aa + tau**2)
        return dict(jet=jet, domain=(-box, box), ref=a, axis=a, kappa=[-tau / D] * n)

    # riemannian_product
    c, m, r = fam.c, fam.m, float(fam.r)
    rho = sqrt(1 - c * r**2)
    first = _sphere_graph if c == 1 else _hyperbolic_graph

    def jet(u):
        y1, dy1, ddy1 = first(u[:m])
        y2, dy2, ddy2 = _sphere_graph(u[m:])
        x = np.concatenate([rho * y1, r * y2])
        dx = np.zeros((n, dim))
        dx[:m, : m + 1] = rho * dy1
        dx[m:, m + 1 :] = r * dy2
        ddx = np.zeros((n, n, dim))
        ddx[:m, :m, : m + 1] = rho * ddy1
        ddx[m:, m:, m + 1 :] = r * ddy2
        return x, dx, ddx

    lo = np.concatenate([np.full(m, _sphere_box(m) if c == 1 else 1.0), np.full(n - m, _sphere_box(n - m))])
    x_base = jet(np.zeros(n))[0]
    ref = product_normal(c, m, r, x_base)
    kappa = [c * r / rho] * m + [-rho / r] * (n - m)
    return dict(jet=jet, domain=(-lo, lo), ref=ref, axis=None, kappa=kappa)


def product_normal(c: int, m: int, r: float, x: np.ndarray) -> np.ndarray:
    """Gauss map of the standard product at ``x``."""
    rho = sqrt(1 - c * r**2)
    x = np.asarray(x, dtype=float)
    scale = np.concatenate([np.full(m + 1, -c * r / rho), np.full(x.size - m - 1, rho / r)])
    return scale * x


# -- constructors --------------------------------------------------------------

def umbilic_sphere_cap(n: int, tau: float, axis=None) -> ExampleFamily:
    return ExampleFamily("umbilic_sphere_cap", 1, n, tau=float(tau), axis=axis)


def umbilic_hyperbolic(n: int, tau: float, axis_type: str = "spacelike", motion=None) -> ExampleFamily:
    return ExampleFamily("umbilic_hyperbolic", -1, n, tau=float(tau), axis_type=axis_type, motion=motion)


def riemannian_product(c: int, n: int, m: int, r: float, motion=None) -> ExampleFamily:
    return ExampleFamily("riemannian_product", c, n, r=float(r), m=m, motion=motion)


def zero_hk1(c: int, n: int, realization: str = "geodesic", k: int | None = None, m: int | None = None) -> ExampleFamily:
    return ExampleFamily("zero_Hk1", c, n, realization=realization, k=k, m=m)


def family_from_config(cfg: dict) -> ExampleFamily:
    """Inverse of :meth:`ExampleFamily.to_config`."""
    cfg = dict(cfg)
    known = {"kind", "c", "n", "tau", "r", "m", "axis_type", "realization", "k", "axis", "motion"}
    unknown = set(cfg) - known
    if unknown:
        raise DomainError(f"unknown family parameters: {sorted(unknown)}")
    if "kind" not in cfg or "n" not in cfg:
        raise DomainError("family config needs 'kind' and 'n'")
    kind = cfg["kind"]
    c = cfg.get("c")
    if c is None:
        c = {"umbilic_sphere_cap": 1, "umbilic_hyperbolic": -1}.get(kind, 1)
    for key in ("axis", "motion"):
        if cfg.get(key) is not None:
            cfg[key] = np.asarray(cfg[key], dtype=float)
    for key in ("tau", "r"):
        if cfg.get(key) is not None:
            cfg[key] = float(cfg[key])
    cfg["c"] = int(c)
    return ExampleFamily(**cfg)


# -- predictions ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PredictedAffine:
    A: np.ndarray
    b: np.ndarray
    k: int


def _check_k(fam: ExampleFamily, k: int) -> None:
    if k not in fam.admissible_orders():
        raise DomainError(f"k={k} is not admissible for {fam.label}")


def predicted_Hk(fam: ExampleFamily, k: int) -> float:
    """Exact ``H_k`` of the family (``0 <= k <= n``; ``0`` beyond ``n``)."""
    if k < 0:
        raise DomainError(f"negative order {k}")
    if k > fam.n:
        return 0.0
    if fam.kind == "umbilic_sphere_cap":
        tau = fam.tau
        return tau**k / (1 - tau**2) ** (k / 2)
    if fam.kind == "umbilic_hyperbolic":
        tau = fam.tau
        return (-1) ** k * tau**k / (AXIS_TYPES[fam.axis_type] + tau**2) ** (k / 2)
    return curvature_profile(fam.kappa).H_at(k)


def predicted_affine(fam: ExampleFamily, k: int) -> PredictedAffine:
    """The family's ``(A, b)`` from the closed-form formulas."""
    _check_k(fam, k)
    n, c = fam.n, fam.c
    ck = c_k(n, k)
    dim = n + 2
    if fam.kind == "umbilic_sphere_cap":
        tau = fam.tau
        scale = (1 - tau**2) ** ((k + 2) / 2)
        A = -ck * tau**k / scale * np.eye(dim)
        b = ck * tau ** (k + 1) / scale * fam.axis_vector
    elif fam.kind == "umbilic_hyperbolic":
        tau = fam.tau
        aa = AXIS_TYPES[fam.axis_type]
        scale = (aa + tau**2) ** ((k + 2) / 2)
        A = (-1) ** k * ck * aa * tau**k / scale * np.eye(dim)
        b = (-1) ** (k + 1) * ck * tau ** (k + 1) / scale * fam.axis_vector
    elif fam.kind == "zero_Hk1":
        Hk1 = predicted_Hk(fam, k + 1)
        if abs(Hk1) > 1e-12:
            raise DomainError(f"H_{k + 1} = {Hk1:.3e} does not vanish for {fam.label}")
        A = -c * ck * predicted_Hk(fam, k) * np.eye(dim)
        b = np.zeros(dim)
    else:
        r, m = fam.r, fam.m
        rho = sqrt(1 - c * r**2)
        Hk, Hk1 = predicted_Hk(fam, k), predicted_Hk(fam, k + 1)
        lam = -c * ck * Hk1 * r / rho - c * ck * Hk
        mu = ck * Hk1 * rho / r - c * ck * Hk
        A = np.diag([lam] * (m + 1) + [mu] * (n - m + 1))
        b = np.zeros(dim)
    R = fam._motion()
    if fam.motion is not None and fam.kind in ("riemannian_product", "zero_Hk1"):
        A = R @ A @ np.linalg.inv(R)
        b = R @ b
    return PredictedAffine(A=A, b=b, k=k)


@dataclass(frozen=True)
class Example3Type:
    kind: str  # "hyperbolic" | "sphere" | "euclidean"
    radius: Optional[float]
    totally_geodesic: bool


def classify_example3(a_norm: int, tau: float) -> Example3Type:
    """Type of the totally umbilical slice ``<a, x> = tau`` of ``H^{n+1}`` with ``<a, a> = a_norm``."""
    if a_norm not in (1, 0, -1):
        raise DomainError(f"<a,a> must be 1, 0 or -1, got {a_norm}")
    if a_norm + tau**2 <= 0:
        raise DomainError(f"<a,a> + tau^2 = {a_norm + tau**2:g} must be positive")
    if a_norm == 1:
        return Example3Type("hyperbolic", -sqrt(1 + tau**2), tau == 0)
    if a_norm == -1:
        if abs(tau) <= 1:
            raise DomainError("timelike axis needs |tau| > 1")
        return Example3Type("sphere", sqrt(tau**2 - 1), False)
    if tau == 0:
        raise DomainError("lightlike axis needs tau != 0")
    return Example3Type("euclidean", None, False)
