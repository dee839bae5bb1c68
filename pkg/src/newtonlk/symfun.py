"""Elementary symmetric functions, higher order mean curvatures and Newton
transformations of a shape operator.

Everything here is pure linear algebra on a real symmetric ``n x n`` matrix
``S`` (the shape operator written in an orthonormal tangent frame) or on its
eigenvalues ``kappa``.  The conventions are

    s_k = sigma_k(kappa_1, ..., kappa_n),      binom(n, k) H_k = s_k,
    P_0 = I,  P_k = s_k I - S P_{k-1},         c_k = (n - k) binom(n, k).

Indices past ``n`` are allowed where a formula needs them and evaluate to
zero (``s_{n+1} = H_{n+1} = 0``).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DomainError

__all__ = [
    "CurvatureProfile",
    "shape_matrix",
    "principal_curvatures_of",
    "elementary_symmetric",
    "mean_curvatures",
    "c_k",
    "curvature_profile",
    "newton_matrix",
    "newton_matrix_sum",
    "newton_eigenvalues",
    "trace_identities",
    "scalar_curvature_check",
    "characteristic_polynomial",
]

SYMMETRY_RTOL = 1e-12


def shape_matrix(S) -> np.ndarray:
    """Validate ``S`` as a real symmetric matrix and return its symmetrized copy.

    The asymmetry allowed is ``1e-12 * max(1, ||S||)``; anything beyond that
    raises :class:`DomainError`.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] < 1:
        raise DomainError(f"shape operator must be a non-empty square matrix, got shape {S.shape}")
    scale = max(1.0, float(np.abs(S).max()))
    if np.abs(S - S.T).max() > SYMMETRY_RTOL * scale:
        raise DomainError("shape operator is not symmetric")
    return 0.5 * (S + S.T)


def principal_curvatures_of(S) -> np.ndarray:
    """Eigenvalues of a symmetric shape matrix, ascending."""
    return np.linalg.eigvalsh(shape_matrix(S))


def elementary_symmetric(kappa) -> np.ndarray:
    """Return ``(s_0, ..., s_n)`` for the values ``kappa``.

    Expands ``prod_i (t + kappa_i)`` one factor at a time, so the cost is
    ``O(n^2)`` and no subsets are enumerated.
    """
    kappa = np.asarray(kappa, dtype=float).ravel()
    n = kappa.size
    if n < 1:
        raise DomainError("need at least one principal curvature")
    s = np.zeros(n + 1)
    s[0] = 1.0
    for i, value in enumerate(kappa):
        # rhs uses the previous factor's coefficients; numpy builds it before assigning
        s[1 : i + 2] = s[1 : i + 2] + value * s[0 : i + 1]
    return s


def mean_curvatures(s, n: int | None = None) -> np.ndarray:
    """``H_k = s_k / binom(n, k)`` for ``k = 0..n``."""
    s = np.asarray(s, dtype=float).ravel()
    if n is None:
        n = s.size - 1
    if s.size != n + 1:
        raise DomainError(f"expected {n + 1} symmetric functions, got {s.size}")
    binoms = np.array([comb(n, k) for k in range(n + 1)], dtype=float)
    return s / binoms


def c_k(n: int, k: int) -> int:
    """The constant ``(n - k) binom(n, k)``, equal to ``(k + 1) binom(n, k + 1)``."""
    if not 0 <= k <= n:
        raise DomainError(f"k={k} out of range for n={n}")
    return (n - k) * comb(n, k)


@dataclass(frozen=True)
class CurvatureProfile:
    """Symmetric functions and mean curvatures of one point.

    Attributes:
        kappa: principal curvatures, ascending.
        s: ``s_0..s_n``.
        H: ``H_0..H_n``.
        c_k_table: ``c_0..c_{n-1}``.
    """

    kappa: np.ndarray
    s: np.ndarray
    H: np.ndarray
    c_k_table: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.kappa.size

    def H_at(self, k: int) -> float:
        """``H_k`` with ``H_k = 0`` for ``k > n``."""
        if k < 0:
            raise DomainError(f"negative index {k}")
        return float(self.H[k]) if k <= self.n else 0.0

    def s_at(self, k: int) -> float:
        if k < 0:
            raise DomainError(f"negative index {k}")
        return float(self.s[k]) if k <= self.n else 0.0

    def newton_eigenvalues(self, k: int) -> np.ndarray:
        return newton_eigenvalues(self.kappa, k)


def curvature_profile(kappa) -> CurvatureProfile:
    kappa = np.sort(np.asarray(kappa, dtype=float).ravel())
    n = kappa.size
    s = elementary_symmetric(kappa)
    return CurvatureProfile(
        kappa=kappa,
        s=s,
        H=mean_curvatures(s, n),
        c_k_table=tuple(c_k(n, k) for k in range(n)),
    )


def _check_order(k: int, lo: int, hi: int) -> None:
    if not isinstance(k, (int, np.integer)) or not lo <= k <= hi:
        raise DomainError(f"order k={k} outside [{lo}, {hi}]")


def newton_matrix(S, k: int) -> np.ndarray:
    """Newton transformation ``P_k`` by the recursion ``P_k = s_k I - S P_{k-1}``."""
    S = shape_matrix(S)
    n = S.shape[0]
    _check_order(k, 0, n)
    s = elementary_symmetric(np.linalg.eigvalsh(S))
    eye = np.eye(n)
    P = eye.copy()
    for j in range(1, k + 1):
        P = s[j] * eye - S @ P
    return P


def newton_matrix_sum(S, k: int) -> np.ndarray:
    """``P_k`` from the closed sum ``sum_j (-1)^j s_{k-j} S^j``.

    Kept as an independent cross-check of :func:`newton_matrix`.
    """
    S = shape_matrix(S)
    n = S.shape[0]
    _check_order(k, 0, n)
    s = elementary_symmetric(np.linalg.eigvalsh(S))
    P = np.zeros_like(S)
    power = np.eye(n)
    for j in range(k + 1):
        P += (-1) ** j * s[k - j] * power
        power = power @ S
    return P


def newton_eigenvalues(kappa, k: int) -> np.ndarray:
    """Eigenvalues ``mu_{i,k}`` of ``P_k``: ``sigma_k`` of the curvatures other than ``kappa_i``."""
    kappa = np.asarray(kappa, dtype=float).ravel()
    n = kappa.size
    _check_order(k, 0, n - 1)
    if n == 1:
        return np.ones(1)
    mu = np.empty(n)
    for i in range(n):
        rest = np.delete(kappa, i)
        mu[i] = elementary_symmetric(rest)[k]
    return mu


def trace_identities(S, k: int) -> tuple[float, float, float]:
    """Absolute residuals of the three trace formulas for ``P_k``.

    ``tr P_k = c_k H_k``, ``tr(S P_k) = c_k H_{k+1}`` and
    ``tr(S^2 P_k) = binom(n, k+1) (n H_1 H_{k+1} - (n-k-1) H_{k+2})``.
    """
    S = shape_matrix(S)
    n = S.shape[0]
    _check_order(k, 0, n - 1)
    prof = curvature_profile(np.linalg.eigvalsh(S))
    P = newton_matrix(S, k)
    ck = c_k(n, k)
    SP = S @ P
    r1 = abs(np.trace(P) - ck * prof.H_at(k))
    r2 = abs(np.trace(SP) - ck * prof.H_at(k + 1))
    rhs3 = comb(n, k + 1) * (n * prof.H_at(1) * prof.H_at(k + 1) - (n - k - 1) * prof.H_at(k + 2))
    r3 = abs(np.trace(S @ SP) - rhs3)
    return float(r1), float(r2), float(r3)


def scalar_curvature_check(S, c: float) -> float:
    """Residual between ``n(n-1)c + n^2 H_1^2 - tr S^2`` and ``n(n-1)(c + H_2)``."""
    S = shape_matrix(S)
    n = S.shape[0]
    prof = curvature_profile(np.linalg.eigvalsh(S))
    lhs = n * (n - 1) * c + n**2 * prof.H_at(1) ** 2 - np.trace(S @ S)
    rhs = n * (n - 1) * (c + prof.H_at(2))
    return float(abs(lhs - rhs))


def characteristic_polynomial(S) -> np.ndarray:
    """Coefficients of ``det(tI - S)``, highest degree first (``numpy.polyval`` order)."""
    S = shape_matrix(S)
    s = elementary_symmetric(np.linalg.eigvalsh(S))
    signs = (-1.0) ** np.arange(s.size)
    return signs * s


IDENTITY_NAMES = ("trPk", "trSPk", "trS2Pk", "recursion_vs_sum", "commutation", "cayley_hamilton", "scalar")


def identity_residuals(S) -> dict[str, float]:
    """Worst relative residual of each algebraic identity over all orders ``k``.

    Each residual is divided by ``||S||^deg`` (spectral norm, with ``1`` in
    place of a zero norm), ``deg`` being the polynomial degree of the
    identity in ``S``; the scalar identity is checked for ``c = 1`` and
    ``c = -1``.
    """
    S = shape_matrix(S)
    n = S.shape[0]
    norm = float(np.linalg.norm(S, 2)) or 1.0
    out = dict.fromkeys(IDENTITY_NAMES, 0.0)
    for k in range(n):
        r1, r2, r3 = trace_identities(S, k)
        out["trPk"] = max(out["trPk"], r1 / norm**k)
        out["trSPk"] = max(out["trSPk"], r2 / norm ** (k + 1))
        out["trS2Pk"] = max(out["trS2Pk"], r3 / norm ** (k + 2))
        P = newton_matrix(S, k)
        diff = np.abs(P - newton_matrix_sum(S, k)).max()
        out["recursion_vs_sum"] = max(out["recursion_vs_sum"], diff / norm**k)
        comm = np.abs(S @ P - P @ S).max()
        out["commutation"] = max(out["commutation"], comm / norm ** (k + 1))
    out["cayley_hamilton"] = float(np.abs(newton_matrix(S, n)).max() / norm**n)
    out["scalar"] = max(scalar_curvature_check(S, c) for c in (1, -1)) / norm**2
    return {key: float(v) for key, v in out.items()}
