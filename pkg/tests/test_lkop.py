from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from newtonlk import catalog
from newtonlk.chart import frame
from newtonlk.errors import DomainError
from newtonlk.lkop import (
    TOL_GAUSS,
    TOL_POSITION,
    LinearField,
    contract,
    lk_gauss,
    lk_Hk,
    lk_position,
    lk_scalar,
    newton_chart,
    point_evaluations,
    product_rule_defect,
)
from newtonlk.symfun import newton_matrix


def test_lk_scalar_linear_field_closed_form(rng):
    fam = catalog.umbilic_hyperbolic(3, 0.6, "spacelike")
    a = np.array([0.2, -0.4, 1.1, 0.3, -0.7])
    for k in range(3):
        for u in fam.chart.sample(rng, 2):
            ev = lk_scalar(fam.chart, u, LinearField(fam.chart, a), k)
            assert ev.discrepancy <= TOL_POSITION


def test_lk_scalar_constant_is_zero(rng):
    fam = catalog.riemannian_product(1, 3, 1, 0.6)
    u = fam.chart.sample(rng, 1)[0]
    for k in range(3):
        ev = lk_scalar(fam.chart, u, lambda v: 3.0, k)
        assert ev.value_numeric == 0.0 and ev.value_closed_form is None


def test_laplacian_on_equator(rng):
    fam = catalog.umbilic_sphere_cap(2, 0.0)
    a = np.array([0.5, -0.1, 0.8, 0.2])
    for u in fam.chart.sample(rng, 3):
        x = fam.chart.map(u)
        ev = lk_scalar(fam.chart, u, LinearField(fam.chart, a), 0)
        # Laplace-Beltrami eigenfunction: Delta <a,x> = -n <a,x>
        assert ev.value_numeric == pytest.approx(-2 * (a @ x), abs=1e-6)


def test_order_out_of_range():
    fam = catalog.umbilic_sphere_cap(2, 0.5)
    with pytest.raises(DomainError):
        lk_position(fam.chart, np.zeros(2), 2)
    with pytest.raises(DomainError):
        lk_scalar(fam.chart, np.zeros(2), lambda v: 0.0, -1)


def test_newton_chart_matches_recursion(rng):
    fam = catalog.riemannian_product(-1, 3, 2, 0.7)
    fr = frame(fam.chart, fam.chart.sample(rng, 1)[0])
    for k in range(3):
        # P_k in the chart basis from the recursion on S_chart
        assert np.allclose(newton_chart(fr, k), newton_matrix_chart(fr.S_chart, k), atol=1e-10)


def newton_matrix_chart(S, k):
    from newtonlk.symfun import elementary_symmetric

    s = elementary_symmetric(np.linalg.eigvals(S).real)
    P = np.eye(S.shape[0])
    for j in range(1, k + 1):
        P = s[j] * np.eye(S.shape[0]) - S @ P
    return P


def test_contract_equals_trace(rng):
    fam = catalog.umbilic_sphere_cap(3, 0.3)
    fr = frame(fam.chart, fam.chart.sample(rng, 1)[0])
    M = rng.normal(size=(3, 3))
    M = M + M.T
    for k in range(3):
        assert contract(fr, M, k) == pytest.approx(np.trace(newton_chart(fr, k) @ fr.g_inv @ M))


# -- position and Gauss map closed forms --------------------------------------------------

def test_position_sphere_cap_k0():
    fam = catalog.umbilic_sphere_cap(2, 0.5)
    u = np.array([0.1, -0.2])
    fr = frame(fam.chart, u)
    H1 = 0.5 / np.sqrt(0.75)
    ev = lk_position(fam.chart, u, 0)
    assert np.allclose(ev.value_closed_form, 2 * H1 * fr.N - 2 * fr.x, atol=1e-14)
    assert ev.discrepancy <= TOL_POSITION


def test_position_minimal_point_is_radial():
    # Clifford torus, k=0: H_1 = 0 so L_0 x = -2x
    fam = catalog.riemannian_product(1, 2, 1, 2**-0.5)
    u = np.array([0.2, 0.3])
    ev = lk_position(fam.chart, u, 0)
    assert np.allclose(ev.value_numeric, -2 * fam.chart.map(u), atol=1e-7)


def test_gauss_sphere_cap_k0():
    fam = catalog.umbilic_sphere_cap(2, 0.5)
    u = np.array([-0.15, 0.05])
    fr = frame(fam.chart, u)
    H1, H2 = 1 / np.sqrt(3), 1 / 3
    ev = lk_gauss(fam.chart, u, 0)
    assert np.allclose(ev.value_closed_form, -2 * (2 * H1**2 - H2) * fr.N + 2 * H1 * fr.x, atol=1e-12)
    assert ev.discrepancy <= TOL_GAUSS


def test_gauss_equator_vanishes(rng):
    fam = catalog.umbilic_sphere_cap(3, 0.0)
    for k in range(3):
        ev = lk_gauss(fam.chart, fam.chart.sample(rng, 1)[0], k)
        assert np.abs(ev.value_closed_form).max() <= 1e-14
        assert np.abs(ev.value_numeric).max() <= 1e-5


def test_gauss_product_has_no_gradient_term(rng):
    fam = catalog.riemannian_product(1, 3, 1, 0.6)
    u = fam.chart.sample(rng, 1)[0]
    fr = frame(fam.chart, u)
    n, k = 3, 1
    bk = comb(n, k + 1)
    expected = -bk * (n * fr.H(1) * fr.H(2) - (n - k - 1) * fr.H(3)) * fr.N + (k + 1) * bk * fr.H(2) * fr.x
    ev = lk_gauss(fam.chart, u, k)
    assert np.allclose(ev.value_closed_form, expected, atol=1e-7)
    assert ev.discrepancy <= TOL_GAUSS


def test_point_evaluations_agree_with_single_calls(rng):
    fam = catalog.umbilic_hyperbolic(2, -0.9, "lightlike")
    u = fam.chart.sample(rng, 1)[0]
    both = point_evaluations(fam.chart, u)
    assert set(both) == {0, 1}
    for k, (pos, gau) in both.items():
        assert np.allclose(pos.value_numeric, lk_position(fam.chart, u, k).value_numeric, rtol=0, atol=1e-14)
        assert np.allclose(gau.value_numeric, lk_gauss(fam.chart, u, k).value_numeric, rtol=0, atol=1e-14)


# -- the L_k H_k relation ---------------------------------------------------------------------

def test_lk_Hk_sphere_cap(rng):
    fam = catalog.umbilic_sphere_cap(2, 0.5)
    b = catalog.predicted_affine(fam, 0).b
    # a = rho N + tau x on the cap, so b has no tangential part and grad H_0 = 0
    for u in fam.chart.sample(rng, 3):
        res = lk_Hk(fam.chart, u, 0, b)
        assert res.applicable and res.residual <= 1e-6


def test_lk_Hk_not_applicable():
    fam = catalog.umbilic_sphere_cap(2, 0.5)
    res = lk_Hk(fam.chart, np.array([0.1, 0.1]), 0, np.array([1.0, 0.0, 0.0, 0.0]))
    assert not res.applicable and res.residual is None and res.precondition_defect > 0.1


def test_lk_Hk_product_b_zero(rng):
    fam = catalog.riemannian_product(1, 3, 2, 0.6)
    for k in range(3):
        res = lk_Hk(fam.chart, fam.chart.sample(rng, 1)[0], k, np.zeros(5))
        assert res.applicable and res.residual <= 1e-6


# -- operator identities ------------------------------------------------------------------------

def poly(coeffs):
    return lambda v: coeffs[0] + coeffs[1] * v[0] + coeffs[2] * v[1] ** 2 + coeffs[3] * v[0] * v[1]


coeff_vectors = st.lists(st.floats(-2, 2, allow_nan=False), min_size=4, max_size=4)


@given(coeff_vectors, coeff_vectors, st.integers(0, 1))
def test_product_rule(cf, cg, k):
    fam = catalog.umbilic_hyperbolic(2, 0.5, "spacelike")
    u = np.array([0.2, -0.3])
    assert product_rule_defect(fam.chart, u, poly(cf), poly(cg), k) <= 1e-6


@given(coeff_vectors, coeff_vectors, st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 1))
def test_linearity(cf, cg, alpha, beta, k):
    fam = catalog.riemannian_product(1, 2, 1, 0.6)
    u = np.array([0.1, 0.25])
    fr = frame(fam.chart, u)
    f, g = poly(cf), poly(cg)
    lhs = lk_scalar(fam.chart, u, lambda v: alpha * f(v) + beta * g(v), k, fr=fr).value_numeric
    rhs = alpha * lk_scalar(fam.chart, u, f, k, fr=fr).value_numeric + beta * lk_scalar(fam.chart, u, g, k, fr=fr).value_numeric
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(alpha) + abs(beta)) * 10)
