"""Stiffness, mass and load assembly against quadrature and closed-form oracles."""

from math import gamma

import numpy as np
import pytest
from scipy.linalg import toeplitz

from _oracles import (
    closed_form_kernel,
    highorder_entry,
    load_entry,
    mass_entry,
    random_pairs,
    stiffness_entry,
)
from fracwave.assembly import (
    FractionalForm1D,
    FractionalForm2D,
    assemble_A,
    assemble_C2d,
    assemble_mass,
    highorder_generators_1d,
    load_vector_1d,
    load_vector_2d,
    mass_generators_1d,
    reference_kernel,
    stiffness_generators_1d,
)
from fracwave.linalg import condition_number_2


def dense_left(r, beta, n):
    a1, q1 = stiffness_generators_1d(FractionalForm1D(p=1, q=0, beta=beta, r=r, n=n))
    row = np.zeros_like(q1)
    row[: len(a1)] = a1
    return toeplitz(q1, row)


# ---- form validation ---------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [dict(p=0.7, q=0.7), dict(p=-0.1, q=1.1), dict(beta=1.0), dict(a=0.0), dict(r=4), dict(n=1)],
)
def test_form1d_rejects(kwargs):
    with pytest.raises(ValueError):
        FractionalForm1D(**kwargs)


@pytest.mark.parametrize("kwargs", [dict(s=4), dict(r=2), dict(p1=0.2, q1=0.2), dict(alpha=1.2)])
def test_form2d_rejects(kwargs):
    with pytest.raises(ValueError):
        FractionalForm2D(**kwargs)


# ---- reference kernel --------------------------------------------------------


@pytest.mark.parametrize("r, s, order", [(2, 1, 0.5), (2, 1, 0.75), (3, 1, 0.25), (3, 2, 0.75), (3, 3, 0.75), (3, 3, 0.25)])
def test_kernel_matches_convolution_identity(r, s, order):
    for d in range(-12, r + 2):
        expected = closed_form_kernel(r, s, order, d)
        assert reference_kernel(r, s, order, d) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_kernel_frozen_values():
    # r = 2, beta = 0.5 on the unit grid, frozen from the convolution-identity oracle
    expected = {
        -3: -0.03275754287,
        -2: -0.139883704207,
        -1: 0.088431884958,
        0: 0.881318950114,
        1: -0.752252778064,
        2: 0.0,
    }
    for d, v in expected.items():
        assert reference_kernel(2, 1, 0.5, d) == pytest.approx(v, abs=1e-11)


# ---- 1D stiffness ------------------------------------------------------------


def test_classical_limit_is_hat_stiffness():
    n = 4
    A = assemble_A(FractionalForm1D(beta=0.0, p=0.5, q=0.5, r=2, n=n)).dense()
    m = A.shape[0]
    expected = 2 ** (2 * n) * (2 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1))
    np.testing.assert_allclose(A, expected, atol=1e-9)


@pytest.mark.parametrize("r", [2, 3])
def test_small_beta_continuity(r):
    A0 = dense_left(r, 0.0, 5)
    A1 = dense_left(r, 1e-8, 5)
    assert np.max(np.abs(A1 - A0)) <= 1e-5 * np.max(np.abs(A0))


@pytest.mark.parametrize("r, beta", [(2, 0.5), (2, 0.75), (3, 0.5)])
def test_entries_match_quadrature(r, beta):
    n = 3
    A = dense_left(r, beta, n)
    scale = np.max(np.abs(A))
    for i, j in random_pairs(A.shape[0], 20, seed=int(100 * beta) + r):
        assert abs(A[i, j] - stiffness_entry(r, n, beta, i, j)) <= 1e-10 * scale


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.75])
def test_adjoint_symmetry(beta):
    # right-sided entries equal the transposed left-sided ones
    n, r = 3, 2
    A = dense_left(r, beta, n)
    rng = np.random.default_rng(7)
    for _ in range(7):
        i, j = (int(v) for v in rng.integers(0, A.shape[0], 2))
        right = stiffness_entry(r, n, beta, i, j, side="right")
        assert right == pytest.approx(A[j, i], rel=1e-9, abs=1e-10)


def test_symmetric_for_equal_weights():
    A = assemble_A(FractionalForm1D(p=0.5, q=0.5, beta=0.5, r=2, n=6)).dense()
    np.testing.assert_allclose(A, A.T, atol=0)


@pytest.mark.parametrize("r, beta", [(2, 0.5), (2, 0.75), (3, 0.25), (3, 0.75)])
def test_equal_weights_positive_definite(r, beta):
    for n in range(3, 9):
        A = assemble_A(FractionalForm1D(p=0.5, q=0.5, beta=beta, r=r, n=n)).dense()
        assert np.linalg.eigvalsh(A).min() > 0


def test_toeplitz_generators_shape():
    a1, q1 = stiffness_generators_1d(FractionalForm1D(beta=0.5, r=3, n=5))
    assert len(a1) == 3 and len(q1) == 30
    assert a1[0] == q1[0]


def test_condition_number_table_cell():
    A = assemble_A(FractionalForm1D(p=0.5, q=0.5, beta=0.5, r=2, n=3))
    assert condition_number_2(A) == pytest.approx(10.0502, rel=1e-4)


def test_scaling_with_level():
    g3 = dense_left(2, 0.5, 3)[0, 0]
    g4 = dense_left(2, 0.5, 4)[0, 0]
    assert g4 / g3 == pytest.approx(2**1.5, rel=1e-14)


# ---- higher-order directional factors ---------------------------------------


@pytest.mark.parametrize("s, alpha", [(2, 0.75), (3, 0.75), (3, 0.25)])
def test_highorder_entries_match_quadrature(s, alpha):
    n = 3
    col, row = highorder_generators_1d(s, alpha, 3, n)
    G = toeplitz(col, row)
    scale = np.max(np.abs(G))
    for i, j in random_pairs(G.shape[0], 20, seed=10 * s + int(100 * alpha)):
        assert abs(G[i, j] - highorder_entry(s, alpha, n, i, j)) <= 1e-10 * scale


def test_highorder_classical_limit():
    # alpha -> 0, s = 2: -<phi_j', phi_i''> by exact polynomial integration at alpha = 0
    c0, r0 = highorder_generators_1d(2, 0.0, 3, 4)
    c1, r1 = highorder_generators_1d(2, 1e-8, 3, 4)
    G0, G1 = toeplitz(c0, r0), toeplitz(c1, r1)
    assert np.max(np.abs(G1 - G0)) <= 1e-5 * np.max(np.abs(G0))
    # at alpha = 0 the s = 2 form is <phi_j'', phi_i'>, skew after one integration by parts
    np.testing.assert_allclose(G0, -G0.T, atol=1e-9 * np.max(np.abs(G0)))
    from _oracles import basis, outer

    for i, j in [(0, 0), (0, 1), (3, 2), (5, 7)]:
        d2j = basis(3, 4, j, 2)
        assert G0[i, j] == pytest.approx(outer(basis(3, 4, i, 1), None, lambda x: float(d2j(x))), abs=1e-8)


@pytest.mark.parametrize("bad", [dict(s=1), dict(r=2), dict(alpha=1.0)])
def test_highorder_validation(bad):
    kw = dict(s=2, alpha=0.5, r=3, n=4)
    kw.update(bad)
    with pytest.raises(ValueError):
        highorder_generators_1d(**kw)


@pytest.mark.parametrize("s, expected", [(2, 29.4463), (3, 160.09)])
def test_c2d_condition_number(s, expected):
    C = assemble_C2d(FractionalForm2D(s=s, n=4))
    assert condition_number_2(C) == pytest.approx(expected, rel=1e-4)


def test_c2d_swap_symmetry():
    form = FractionalForm2D(s=3, alpha=0.6, beta=0.6, p1=0.3, q1=0.7, p2=0.3, q2=0.7, n=4)
    C = assemble_C2d(form).dense()
    m = int(round(np.sqrt(C.shape[0])))
    perm = np.arange(m * m).reshape(m, m).T.ravel()
    np.testing.assert_allclose(C[np.ix_(perm, perm)], C, atol=1e-12 * np.abs(C).max())


def test_c2d_right_sided_term_from_quadrature():
    # the right-sided directional factor carries (-1)**(s-1) relative to G^T
    from _oracles import basis, outer, rl_right

    n, alpha = 3, 0.75
    col, row = highorder_generators_1d(2, alpha, 3, n)
    G = toeplitz(col, row)
    for i, j in [(0, 0), (1, 3), (4, 2)]:
        # <D x D1^{-alpha} phi_j', phi_i'> = -<xD1^{-alpha} phi_j', phi_i''>
        di2 = basis(3, n, i, 2)
        dj = basis(3, n, j, 1)
        right = -outer(di2, dj, lambda x: rl_right(alpha, dj, x))
        assert right == pytest.approx(-G[j, i], rel=1e-9, abs=1e-9)


def test_equal_weight_2d_structure():
    # s = 2 with p = q = 1/2 is skew; s = 3 is symmetric negative definite
    half = dict(p1=0.5, q1=0.5, p2=0.5, q2=0.5, n=4)
    C2 = assemble_C2d(FractionalForm2D(s=2, **half)).dense()
    np.testing.assert_allclose(C2, -C2.T, atol=1e-12 * np.abs(C2).max())
    C3 = assemble_C2d(FractionalForm2D(s=3, **half)).dense()
    np.testing.assert_allclose(C3, C3.T, atol=1e-12 * np.abs(C3).max())
    assert np.linalg.eigvalsh(C3).max() < 0


# ---- mass matrix -------------------------------------------------------------


def test_mass_generators():
    np.testing.assert_allclose(mass_generators_1d(2, 4)[0][:3], [2 / 3, 1 / 6, 0], atol=1e-15)
    np.testing.assert_allclose(mass_generators_1d(3, 4)[0][:4], [11 / 20, 13 / 60, 1 / 120, 0], atol=1e-15)
    M = assemble_mass(2, 4).dense()
    np.testing.assert_allclose(M[1:-1].sum(axis=1), 1.0, atol=1e-14)


@pytest.mark.parametrize("r", [2, 3])
def test_mass_matches_quadrature(r):
    n = 3
    M = assemble_mass(r, n).dense()
    for i, j in random_pairs(M.shape[0], 20, seed=r):
        assert M[i, j] == pytest.approx(mass_entry(r, n, i, j), abs=1e-10)


# ---- load vectors ------------------------------------------------------------


def test_load_of_constant():
    n = 5
    b = load_vector_1d([(1.0, 0.0)], 2, n)
    np.testing.assert_allclose(b, 2 ** (-n / 2), rtol=1e-14)


def test_f1_value_at_one():
    beta = 0.5
    val = -2 / gamma(1.5) + 6 / gamma(2.5)
    assert val == pytest.approx(2.256758, abs=1e-6)


@pytest.mark.parametrize(
    "terms, r",
    [
        ([(-gamma(2.1) / gamma(0.85), -0.15), (1 / gamma(0.75), -0.25)], 2),
        ([(1.0, 0.5), (-3.0, 1.75)], 3),
        ([(2.0, -1.25)], 3),
    ],
)
def test_load_matches_quadrature(terms, r):
    n = 4
    b = load_vector_1d(terms, r, n)
    assert np.all(np.isfinite(b))
    for j in range(len(b)):
        assert b[j] == pytest.approx(load_entry(terms, r, n, j), rel=1e-9, abs=1e-12)


def test_f2_value_at_one():
    val = -gamma(2.1) / gamma(1.85) + 1 / gamma(0.75)
    assert val == pytest.approx(-0.29063, abs=5e-5)


def test_nonintegrable_power_rejected():
    # phi_{n,0} vanishes to order r - 1 at the origin, which sets the threshold
    assert np.all(np.isfinite(load_vector_1d([(1.0, -1.0)], 2, 3)))
    with pytest.raises(ValueError):
        load_vector_1d([(1.0, -2.0)], 2, 3)
    with pytest.raises(ValueError):
        load_vector_1d([(1.0, -3.0)], 3, 3)


def test_load_2d_is_tensor_product():
    terms = [(1.5, 0.5, 2.0), (-0.5, 1.0, 0.25)]
    b = load_vector_2d(terms, 3, 3)
    expected = sum(c * np.kron(load_vector_1d([(1, gx)], 3, 3), load_vector_1d([(1, gy)], 3, 3)) for c, gx, gy in terms)
    np.testing.assert_allclose(b, expected, rtol=1e-14)
