import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opfractal.basis import CoeffVector, gamma_set
from opfractal.operators import (
    TruncatedOperator,
    TruncationError,
    apply,
    build_S,
    build_U,
    closed_columns,
    commutator_norms,
    eigen_residual,
    iterate_regression,
    spatial_obstruction,
)
from opfractal.transform import mu_hat


def product_oracle(t):
    p = 1.0
    for k in range(1, 61):
        p *= math.cos(2 * math.pi * t * 0.25**k)
    return p


def test_u_entries_match_oracle():
    S = gamma_set(4)
    U = build_U(S).entries
    for i, xi in enumerate(S.elements):
        for j, g in enumerate(S.elements):
            assert abs(U[i, j] - product_oracle(5 * g - xi)) <= 1e-12


def test_u_fixes_e0_and_maps_e1_to_e5_column():
    S = gamma_set(6)
    v, rep = apply(build_U(S), CoeffVector.basis(S, 0))
    assert v.coeff(0) == 1.0 and rep.leakage == 0.0
    w, _ = apply(build_U(S), CoeffVector.basis(S, 1))
    assert w.coeff(5) == 1.0
    assert w.coeff(1) == 0.0


def test_u_thread_count_independent():
    S = gamma_set(8)
    a = build_U(S, threads=1).entries
    b = build_U(S, threads=4).entries
    assert np.array_equal(a, b)


def test_u_requires_scale_one():
    with pytest.raises(ValueError):
        build_U(gamma_set(3, 5))


def test_operator_validation():
    S = gamma_set(2)
    with pytest.raises(ValueError):
        TruncatedOperator(S, np.eye(3), "U5")
    with pytest.raises(ValueError):
        TruncatedOperator(S, np.eye(4), "V")
    with pytest.raises(ValueError):
        build_S(S, 2)


def test_adjoint_kinds():
    S = gamma_set(3)
    assert build_U(S).adjoint().kind == "U5_adjoint"
    assert build_S(S, 1).adjoint().adjoint().kind == "S1"
    assert (build_U(S) @ build_S(S, 0)).kind == "product"


@pytest.mark.parametrize("which", [0, 1])
@pytest.mark.parametrize("m", [2, 5, 7])
def test_cuntz_isometry_on_closed_columns(which, m):
    S = gamma_set(m)
    Si = build_S(S, which)
    cols = closed_columns(S, which)
    P = (Si.adjoint() @ Si).entries[np.ix_(cols, cols)]
    assert np.array_equal(P, np.eye(len(cols)))


def test_cuntz_ranges_are_orthogonal():
    S = gamma_set(6)
    cross = (build_S(S, 0).adjoint() @ build_S(S, 1)).entries
    assert not cross.any()


def test_commutators():
    r = commutator_norms(gamma_set(7))
    assert r.us0_minus_s0u <= 1e-8
    assert r.us1_minus_s1u == pytest.approx(8.473, abs=1e-3)
    assert (r.closed_size_s0, r.closed_size_s1) == (64, 64)
    r2 = commutator_norms(gamma_set(2))
    assert r2.us0_minus_s0u == 0.0
    assert r2.us1_minus_s1u == pytest.approx(1.5290, abs=1e-4)


def test_regression_values():
    r = iterate_regression(9)
    assert r.terms == 512
    assert r.coeff_e5_of_e125 == 0.5046124145297286
    assert r.coeff_e5_of_U3e1 == pytest.approx(0.5811539214294845, abs=1e-13)


@pytest.mark.parametrize("m", [10, 11])
def test_regression_stable_under_growth(m):
    assert iterate_regression(m).coeff_e5_of_U3e1 == pytest.approx(0.5811539214294845, abs=1e-12)


def test_regression_against_matrix_oracle():
    # apply the compressed U to the expansion of e_25 and read off row 5
    S = gamma_set(9)
    v = np.array([product_oracle(25 - g) for g in S.elements])
    U = build_U(S).entries
    assert (U @ v)[S.position(5)].real == pytest.approx(0.5811539214294845, abs=1e-10)


@pytest.mark.parametrize("gamma", [1, 4, 5, 16, 21])
def test_no_eigenvectors_among_basis_elements(gamma):
    for j in range(16):
        lam = np.exp(2j * np.pi * j / 16)
        assert abs(eigen_residual(gamma, lam) - 2) <= 1e-6


def test_eigen_residual_errors():
    with pytest.raises(ValueError):
        eigen_residual(0, 1)
    with pytest.raises(ValueError):
        eigen_residual(2, 1, S=gamma_set(3))


def test_spatial_obstruction_values():
    r = spatial_obstruction()
    assert r.const_coeff_e10 == pytest.approx(0.3803094606584578, abs=1e-14)
    assert r.const_coeff_Ue2 == pytest.approx(mu_hat(2.0).value, abs=1e-6)
    assert r.collapsed_const_coeff_Ue2 == 0.0
    assert r.gap >= 0.3


def test_truncation_error_message():
    e = TruncationError(0.2, 0.1, 9)
    assert "0.2" in str(e) and e.steps == 9


@given(st.integers(1, 7), st.integers(0, 2**7 - 1))
def test_columns_are_contractions(m, j):
    S = gamma_set(m)
    n2 = build_U(S).column_norms2()
    assert np.all(n2 <= 1 + 1e-9)
    v = CoeffVector(S, np.eye(len(S))[j % len(S)])
    _, rep = apply(build_U(S), v)
    assert rep.leakage >= -1e-12


@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=16, max_size=16))
def test_adjoint_is_conjugate_transpose(c):
    S = gamma_set(4)
    U = build_U(S)
    x = CoeffVector(S, c)
    y = CoeffVector(S, c[::-1])
    lhs = apply(U, x)[0].inner(y)
    rhs = x.inner(apply(U.adjoint(), y)[0])
    assert abs(lhs - rhs) <= 1e-9 * (1 + x.norm2 + y.norm2)
