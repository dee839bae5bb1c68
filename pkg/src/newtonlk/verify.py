"""Fitting ``L_k x = A x + b`` from samples and classifying the result.

The fit is a plain linear least-squares problem in the entries of ``(A, b)``
with the coordinate-Euclidean residual norm.  Optionally ``A`` is restricted
to ``A = G M`` with ``M`` symmetric, which is exactly the set of matrices
self-adjoint for the ambient metric ``G``.

Samples confined to an affine hyperplane (every umbilic slice
``<a, x> = tau``) do not determine ``(A, b)``: adding ``w (G a)^T`` to ``A``
and ``-tau w`` to ``b`` changes nothing on the samples.  :class:`AffineFit`
carries these directions as ``gauge`` so that comparisons with a reference
pair can be made modulo them.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np

from . import lkop
from .chart import AmbientSpace, Chart, FrameData, frame, tangential_projection
from .errors import DomainError
from .symfun import c_k, curvature_profile, newton_eigenvalues

TOL_CLASS = 1e-4
CLUSTER_GAP = 1e-3
RCOND = 1e-9
VERDICTS = ("zero_Hk1_const_Hk", "totally_umbilical", "isoparametric_product", "no_match")


@dataclass(eq=False)
class SampleSet:
    """Triples ``(u, x(u), L_k x(u))`` from one chart, stacked row-wise."""

    k: int
    c: int
    u: np.ndarray
    x: np.ndarray
    lkx: np.ndarray
    position_discrepancy: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.u = np.atleast_2d(np.asarray(self.u, dtype=float))
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.lkx = np.atleast_2d(np.asarray(self.lkx, dtype=float))
        if self.c not in (1, -1):
            raise DomainError("c must be +1 or -1")
        count = self.x.shape[0]
        if count < 2:
            raise DomainError(f"need at least 2 samples, got {count}")
        if self.u.shape[0] != count or self.lkx.shape[0] != count:
            raise DomainError("u, x and L_k x must have the same number of rows")
        if self.x.shape[1] != self.u.shape[1] + 2 or self.lkx.shape != self.x.shape:
            raise DomainError("ambient columns must number n + 2")
        if not 0 <= self.k <= self.n - 1:
            raise DomainError(f"k={self.k} outside [0, {self.n - 1}]")

    @property
    def n(self) -> int:
        return self.u.shape[1]

    @property
    def space(self) -> AmbientSpace:
        return AmbientSpace(self.c, self.n)

    def __len__(self) -> int:
        return self.x.shape[0]

    def transformed(self, R) -> "SampleSet":
        """Samples moved by the ambient linear map ``R``."""
        R = np.asarray(R, dtype=float)
        return SampleSet(self.k, self.c, self.u, self.x @ R.T, self.lkx @ R.T, self.position_discrepancy)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("NEWTONLK_THREADS", "1")))
    except ValueError:
        return 1


def _ordered_map(fn, items):
    workers = worker_count()
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sample_chart(chart: Chart, k: int, us) -> SampleSet:
    """Evaluate ``L_k x`` by the numeric path at the chart points ``us``.

    The closed-form discrepancy of every evaluation is kept alongside.
    """
    us = np.atleast_2d(np.asarray(us, dtype=float))
    evals = _ordered_map(lambda u: lkop.lk_position(chart, u, k), us)
    x = np.array([chart.map(u) for u in us])
    lkx = np.array([ev.value_numeric for ev in evals])
    disc = np.array([ev.discrepancy for ev in evals])
    return SampleSet(k, chart.space.c, us, x, lkx, disc)


def frames_at(chart: Chart, us) -> list[FrameData]:
    return _ordered_map(lambda u: frame(chart, u), np.atleast_2d(np.asarray(us, dtype=float)))


# -- fitting -------------------------------------------------------------------

@dataclass(eq=False)
class AffineFit:
    """Least-squares ``(A, b)``.

    ``rank_info`` holds the design rank, the number of unknowns and whether the
    solution is unique; ``gauge`` is an orthonormal basis (columns, length
    ``n + 3``) of the null space of ``[x, 1]``, i.e. the directions ``z`` for
    which ``(A + w z[:-1]^T, b + w z[-1])`` fits equally well for every ``w``.
    """

    A: np.ndarray
    b: np.ndarray
    rms_residual: float
    selfadjoint_defect: float
    rank_info: dict
    constrained: bool
    gauge: np.ndarray = field(repr=False)
    tolerance: float = RCOND

    def predict(self, x) -> np.ndarray:
        return np.asarray(x) @ self.A.T + self.b


def selfadjoint_defect(A, G) -> float:
    """``||A^T G - G A||_inf / (1 + ||A||_inf)`` (induced infinity norms)."""
    A = np.asarray(A, dtype=float)
    G = np.asarray(G, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or G.shape != A.shape:
        raise DomainError(f"dimension mismatch: A {A.shape}, G {G.shape}")
    num = np.linalg.norm(A.T @ G - G @ A, ord=np.inf)
    return float(num / (1.0 + np.linalg.norm(A, ord=np.inf)))


def _symmetric_basis(m: int) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of symmetric ``m x m`` matrices."""
    basis = []
    for p in range(m):
        for q in range(p, m):
            E = np.zeros((m, m))
            if p == q:
                E[p, p] = 1.0
            else:
                E[p, q] = E[q, p] = 1.0 / np.sqrt(2.0)
            basis.append(E)
    return basis


def fit_affine(samples: SampleSet, constrain_selfadjoint: bool = False, rcond: float = RCOND) -> AffineFit:
    """Minimum-norm least-squares fit of ``L_k x_i ~ A x_i + b``."""
    X, Y = samples.x, samples.lkx
    count, m = X.shape
    G = samples.space.G
    design = np.hstack([X, np.ones((count, 1))])
    sv = np.linalg.svd(design, compute_uv=False)
    _, _, vt = np.linalg.svd(design, full_matrices=True)
    cutoff = rcond * sv[0]
    design_rank = int(np.sum(sv > cutoff))
    gauge = vt[design_rank:].T

    if not constrain_selfadjoint:
        W, _, rank, _ = np.linalg.lstsq(design, Y, rcond=rcond)
        A, b = W[:m].T, W[m]
        unknowns = m * (m + 1)
        unique = rank == m + 1
    else:
        basis = _symmetric_basis(m)
        cols = [(X @ (G @ E).T).ravel() for E in basis]
        for p in range(m):
            e = np.zeros((count, m))
            e[:, p] = 1.0
            cols.append(e.ravel())
        M_design = np.column_stack(cols)
        theta, _, rank, _ = np.linalg.lstsq(M_design, Y.ravel(), rcond=rcond)
        M = sum(t * E for t, E in zip(theta[: len(basis)], basis))
        A, b = G @ M, theta[len(basis) :]
        unknowns = M_design.shape[1]
        unique = rank == unknowns
    resid = Y - (X @ A.T + b)
    rms = float(np.sqrt(np.mean(np.sum(resid**2, axis=1))))
    rank_info = {
        "rank": int(rank),
        "unknowns": int(unknowns),
        "design_rank": design_rank,
        "design_columns": m + 1,
        "unique": bool(unique),
        "smallest_singular_ratio": float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0,
    }
    return AffineFit(
        A=A,
        b=b,
        rms_residual=rms,
        selfadjoint_defect=selfadjoint_defect(A, G),
        rank_info=rank_info,
        constrained=constrain_selfadjoint,
        gauge=gauge,
        tolerance=rcond,
    )


@dataclass(frozen=True, eq=False)
class AffineComparison:
    """Fitted vs reference ``(A, b)``; ``aligned_*`` removes the gauge directions."""

    max_entry_error: float
    raw_max_entry_error: float
    aligned_A: np.ndarray
    aligned_b: np.ndarray
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.max_entry_error <= self.tolerance


def compare_affine(fit: AffineFit, A_ref, b_ref, rtol: float = 1e-4) -> AffineComparison:
    """Entrywise error between the fit and a reference, modulo the fit's gauge.

    The tolerance is ``rtol * (1 + ||A_ref||_inf)``.
    """
    A_ref = np.asarray(A_ref, dtype=float)
    b_ref = np.asarray(b_ref, dtype=float)
    W_fit = np.vstack([fit.A.T, fit.b])
    W_ref = np.vstack([A_ref.T, b_ref])
    Z = fit.gauge
    W_aligned = W_fit + Z @ (Z.T @ (W_ref - W_fit)) if Z.size else W_fit
    m = fit.A.shape[0]
    return AffineComparison(
        max_entry_error=float(np.abs(W_ref - W_aligned).max()),
        raw_max_entry_error=float(np.abs(W_ref - W_fit).max()),
        aligned_A=W_aligned[:m].T,
        aligned_b=W_aligned[m],
        tolerance=rtol * (1.0 + float(np.linalg.norm(A_ref, ord=np.inf))),
    )


def b_gauge_removable(fit: AffineFit, tol: float = 1e-8) -> bool:
    """Whether a gauge shift makes ``b`` vanish (possible iff ``b`` is reachable by the gauge)."""
    Z = fit.gauge
    scale = max(1.0, float(np.linalg.norm(fit.b)))
    if np.linalg.norm(fit.b) <= tol * scale:
        return True
    if not Z.size:
        return False
    # b + sum_j w_j Z[-1, j] = 0 needs some gauge direction with a nonzero constant slot
    return bool(np.abs(Z[-1]).max() > tol)


# -- structural relations -------------------------------------------------------

def structural_checks(samples: SampleSet, fit: AffineFit, chart: Chart, frames: Sequence[FrameData] | None = None) -> dict:
    """Residuals of the relations implied by ``L_k x = A x + b`` at each sample.

    * ``tangent_relation``: ``A X + c_k H_{k+1} S X + c c_k H_k X - c_k X(H_{k+1}) N + c c_k X(H_k) x``
      for every coordinate tangent vector (max norm over samples);
    * ``b_dot_x_minus_ckHk_std``: sample standard deviation of ``<b, x> - c_k H_k``;
    * ``position_relation``: ``A x`` against ``-b^T + (c_k H_{k+1} - <b,N>) N - c (c_k H_k + <b,x>) x``;
    * ``gradient_relation``: diagnostic residual where ``|H_{k+1}|`` is away from zero;
    * ``alpha``: mean and spread of
      ``-binom(n,k+1)(n H_1 H_{k+1} - (n-k-1) H_{k+2}) - c c_k H_k``.
    """
    k, c, n = samples.k, samples.c, samples.n
    space = samples.space
    ck = c_k(n, k)
    bk1 = comb(n, k + 1)
    A, b = fit.A, fit.b
    if frames is None:
        frames = frames_at(chart, samples.u)

    def per_point(args):
        u, fr = args
        dH = lkop.mean_curvature_differentials(chart, u)
        dHk, dHk1 = dH[k], dH[k + 1]
        Hk, Hk1 = fr.H(k), fr.H(k + 1)
        ax = 0.0
        for i in range(n):
            X = fr.tangents[i]
            r = A @ X + ck * Hk1 * fr.shape_ambient(i) + c * ck * Hk * X - ck * dHk1[i] * fr.N + c * ck * dHk[i] * fr.x
            ax = max(ax, float(np.linalg.norm(r)))
        b_top = tangential_projection(fr, b)
        rhs = -b_top + (ck * Hk1 - space.inner(b, fr.N)) * fr.N - c * (ck * Hk + space.inner(b, fr.x)) * fr.x
        ax_pos = float(np.linalg.norm(A @ fr.x - rhs))
        eq1 = float(space.inner(b, fr.x) - ck * Hk)
        alpha = -bk1 * (n * fr.H(1) * Hk1 - (n - k - 1) * fr.H(k + 2)) - c * ck * Hk
        eq2 = None
        if abs(Hk1) > 1e-8:
            P = lkop.newton_chart(fr, k)
            gHk1, gHk = fr.g_inv @ dHk1, fr.g_inv @ dHk
            lhs = 2 / Hk1 * fr.S_chart @ P @ gHk1 + (k + 2) * bk1 * gHk1
            rhs2 = -c / Hk1 * (2 * P @ gHk + ck * Hk * gHk)
            d = lhs - rhs2
            eq2 = float(np.sqrt(d @ fr.g @ d))
        return ax, ax_pos, eq1, alpha, eq2

    rows = _ordered_map(per_point, list(zip(samples.u, frames)))
    ax, ax_pos, eq1, alpha, eq2 = zip(*rows)
    eq2 = [v for v in eq2 if v is not None]
    alpha = np.array(alpha)
    return {
        "tangent_relation": float(max(ax)),
        "position_relation": float(max(ax_pos)),
        "b_dot_x_minus_ckHk_std": float(np.std(eq1)),
        "b_dot_x_minus_ckHk_mean": float(np.mean(eq1)),
        "gradient_relation": float(max(eq2)) if eq2 else None,
        "alpha_mean": float(alpha.mean()),
        "alpha_std": float(alpha.std()),
    }


# -- quadratic equation and classification ---------------------------------------

def _shape_list(items) -> list[np.ndarray]:
    out = []
    for item in items:
        out.append(item.S_on if isinstance(item, FrameData) else np.asarray(item, dtype=float))
    return out


def quadratic_shape_check(frames, c: int) -> tuple[float, float]:
    """Best constant ``lambda`` for ``S^2 + lambda S - c I = 0`` and the worst defect.

    ``lambda* = -sum <S^2 - cI, S>_F / sum ||S||_F^2`` minimizes the summed
    squared Frobenius residual; the defect is the largest entry of
    ``S^2 + lambda* S - cI`` over all frames.  ``frames`` may be
    :class:`FrameData` or symmetric matrices in an orthonormal frame.
    """
    shapes = _shape_list(frames)
    if not shapes:
        raise DomainError("need at least one frame")
    num = 0.0
    den = 0.0
    for S in shapes:
        R = S @ S - c * np.eye(S.shape[0])
        num += np.sum(R * S)
        den += np.sum(S * S)
    lam = -num / den if den > 0 else 0.0
    defect = max(float(np.abs(S @ S + lam * S - c * np.eye(S.shape[0])).max()) for S in shapes)
    return float(lam), defect


def curvature_clusters(kappa, gap: float = CLUSTER_GAP) -> list[float]:
    """Centers of groups of sorted values separated by more than ``gap``."""
    kappa = np.sort(np.asarray(kappa, dtype=float))
    groups = [[kappa[0]]]
    for value in kappa[1:]:
        if value - groups[-1][-1] > gap:
            groups.append([value])
        else:
            groups[-1].append(value)
    return [float(np.mean(g)) for g in groups]


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    verdict: str
    evidence: dict
    thresholds: dict
    also_matches: tuple[str, ...] = ()
    reason: str = ""


@dataclass(frozen=True, eq=False)
class _PointShape:
    S_on: np.ndarray
    Hk: float
    Hk1: float
    N: Optional[np.ndarray]


def shapes_from_fit(samples: SampleSet, fit: AffineFit) -> list[Optional[_PointShape]]:
    """Shape operators recovered from samples alone.

    ``H_k = -<L_k x, x> / c_k`` and ``c_k H_{k+1} N = L_k x + c c_k H_k x``
    fix ``H_k``, ``|H_{k+1}|`` and ``N``; on the tangent space ``{x, N}^perp``
    the constant-curvature form of the derivative relation
    ``A X = -c_k H_{k+1} S X - c c_k H_k X`` then gives ``S``.  Points with
    ``H_{k+1} ~ 0`` carry no shape information (``S_on`` is NaN).
    """
    space = samples.space
    n, k, c = samples.n, samples.k, samples.c
    ck = c_k(n, k)
    G = space.G
    out = []
    for x, lkx in zip(samples.x, samples.lkx):
        Hk = -space.inner(lkx, x) / ck
        V = lkx + c * ck * Hk * x
        vv = space.inner(V, V)
        Hk1 = np.sqrt(max(vv, 0.0)) / ck
        if Hk1 < 1e-8:
            out.append(_PointShape(np.full((n, n), np.nan), Hk, 0.0, None))
            continue
        N = V / (ck * Hk1)
        # g-orthonormal basis of {x, N}^perp
        _, _, vt = np.linalg.svd(np.vstack([x, N]) @ G)
        T = vt[2:]
        gram = T @ G @ T.T
        L = np.linalg.cholesky(0.5 * (gram + gram.T))
        E = np.linalg.solve(L, T)
        SE = -(E @ fit.A.T + c * ck * Hk * E) / (ck * Hk1)
        S_on = SE @ G @ E.T
        out.append(_PointShape(0.5 * (S_on + S_on.T), Hk, Hk1, N))
    return out


def classify(
    samples: SampleSet,
    fit: AffineFit,
    frames: Sequence[FrameData] | None = None,
    tol_class: float = TOL_CLASS,
    cluster_gap: float = CLUSTER_GAP,
) -> ClassificationReport:
    """Assign one of :data:`VERDICTS`.

    Precedence: the condition must hold (relative fit rms within
    ``tol_class``), then isoparametric_product (quadratic equation with two
    curvature clusters at every point), zero_Hk1_const_Hk, totally_umbilical,
    otherwise no_match.  Without ``frames`` the shape operators are
    reconstructed from the samples and the fit (:func:`shapes_from_fit`).
    """
    k, c, n = samples.k, samples.c, samples.n
    ck = c_k(n, k)
    if frames is not None:
        pts = [_PointShape(fr.S_on, fr.H(k), fr.H(k + 1), fr.N) for fr in frames]
        source = "frames"
    else:
        pts = shapes_from_fit(samples, fit)
        source = "reconstructed_from_fit"
    Hk = np.array([p.Hk for p in pts])
    Hk1 = np.array([p.Hk1 for p in pts])
    with_shape = [p for p in pts if np.all(np.isfinite(p.S_on))]

    scale_lkx = float(np.sqrt(np.mean(np.sum(samples.lkx**2, axis=1))))
    rel_rms = fit.rms_residual / (1.0 + scale_lkx)
    evidence = {
        "shape_source": source,
        "samples": len(samples),
        "fit_rms": fit.rms_residual,
        "fit_relative_rms": rel_rms,
        "selfadjoint_defect": fit.selfadjoint_defect,
        "Hk1_mean": float(Hk1.mean()),
        "Hk1_mean_abs": float(np.abs(Hk1).mean()),
        "Hk1_std": float(Hk1.std()),
        "Hk_mean": float(Hk.mean()),
        "Hk_std": float(Hk.std()),
        "b_norm": float(np.linalg.norm(fit.b)),
        "b_gauge_removable": b_gauge_removable(fit),
    }
    matches = []
    if with_shape:
        H1 = [np.trace(p.S_on) / n for p in with_shape]
        umb = max(float(np.abs(p.S_on - h1 * np.eye(n)).max()) for p, h1 in zip(with_shape, H1))
        umb_norm = umb / (1.0 + max(abs(h) for h in H1))
        lam, qdef = quadratic_shape_check([p.S_on for p in with_shape], c)
        s_scale = max(float(np.abs(p.S_on).max()) for p in with_shape)
        qdef_norm = qdef / (1.0 + s_scale**2)
        cluster_sets = [curvature_clusters(np.linalg.eigvalsh(p.S_on), cluster_gap) for p in with_shape]
        counts = sorted({len(cs) for cs in cluster_sets})
        evidence.update(
            umbilicity_defect=umb,
            umbilicity_defect_normalized=umb_norm,
            quadratic_lambda=lam,
            quadratic_defect=qdef,
            quadratic_defect_normalized=qdef_norm,
            cluster_counts=counts,
            cluster_centers=cluster_sets[0],
            points_with_shape=len(with_shape),
        )
        if len(with_shape) == len(pts) and qdef_norm <= tol_class and counts == [2]:
            matches.append("isoparametric_product")
    if evidence["Hk1_mean_abs"] <= tol_class and evidence["Hk_std"] <= tol_class:
        matches.append("zero_Hk1_const_Hk")
    if with_shape and len(with_shape) == len(pts) and evidence["umbilicity_defect_normalized"] <= tol_class:
        matches.append("totally_umbilical")

    if frames is not None:
        n_idx = comb(n, k + 1)
        alpha = []
        for fr in frames:
            alpha.append(-n_idx * (n * fr.H(1) * fr.H(k + 1) - (n - k - 1) * fr.H(k + 2)) - c * ck * fr.H(k))
        alpha = np.array(alpha)
        evidence["alpha_mean"] = float(alpha.mean())
        evidence["alpha_std"] = float(alpha.std())
        if np.all(np.abs(Hk1) > 1e-8):
            lam_alpha = alpha / (ck * Hk1) + 2 * c * Hk / Hk1
            evidence["lambda_from_alpha"] = float(lam_alpha.mean())
            # alpha from the fit: <AN, N> - c (H_k / H_{k+1}) <Ax, N>
            space = samples.space
            af = [
                space.inner(fit.A @ fr.N, fr.N) - c * fr.H(k) / fr.H(k + 1) * space.inner(fit.A @ fr.x, fr.N)
                for fr in frames
            ]
            evidence["alpha_from_fit_mean"] = float(np.mean(af))

    thresholds = {"tol_class": tol_class, "cluster_gap": cluster_gap, "fit_gate": tol_class}
    if rel_rms > tol_class:
        return ClassificationReport("no_match", evidence, thresholds, tuple(matches), "L_k x = Ax + b does not hold on the samples")
    for verdict in ("isoparametric_product", "zero_Hk1_const_Hk", "totally_umbilical"):
        if verdict in matches:
            reason = ""
            if verdict == "totally_umbilical" and evidence["b_norm"] <= tol_class and abs(evidence["Hk1_mean"]) > tol_class:
                reason = "umbilic with b = 0 and H_{k+1} != 0"
            return ClassificationReport(verdict, evidence, thresholds, tuple(m for m in matches if m != verdict), reason)
    return ClassificationReport("no_match", evidence, thresholds, (), "no branch matched")
