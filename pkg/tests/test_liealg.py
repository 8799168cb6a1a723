import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poissonlie.liealg import (
    AlgebraElement,
    GroupElement,
    LieAlgebraError,
    bracket,
    build_algebra,
    group_Ad,
    group_exp,
    pairing,
    positive_roots,
)

KINDS = [("sl_split", 1), ("sl_split", 2), ("su_compact", 1), ("su_compact", 2)]
coeffs = st.lists(st.floats(-1, 1), min_size=8, max_size=8)


@pytest.mark.parametrize("kind,rank", KINDS)
def test_structure_constants_match_commutators(kind, rank):
    alg = build_algebra(kind, rank)
    M = alg.matrices
    for a in range(alg.dim):
        for b in range(alg.dim):
            comm = M[a] @ M[b] - M[b] @ M[a]
            assert np.allclose(alg.to_matrix(alg.structure_constants[a, b]), comm, atol=1e-13)


@pytest.mark.parametrize("kind,rank", KINDS)
def test_jacobi_invariance_and_representation(kind, rank):
    alg = build_algebra(kind, rank)
    assert alg.jacobi_residual() < 1e-13
    assert alg.invariance_residual() < 1e-13
    assert alg.rep_residual() < 1e-13


def test_sl2_chevalley_brackets(sl2):
    E, H, F = np.eye(3)
    assert np.allclose(sl2.br(H, E), 2 * E)
    assert np.allclose(sl2.br(H, F), -2 * F)
    assert np.allclose(sl2.br(E, F), H)


def test_sl2_trace_form(sl2):
    assert np.allclose(sl2.bilinear_form, [[0, 0, 1], [0, 2, 0], [1, 0, 0]])


def test_su_form_negative_definite(su3):
    assert np.all(np.linalg.eigvalsh(su3.bilinear_form) < 0)


def test_dimensions(sl3, su3):
    assert sl3.dim == su3.dim == 8
    assert len(positive_roots(3)) == 3


@settings(max_examples=40, deadline=None)
@given(coeffs, coeffs)
def test_bracket_antisymmetric_and_form_invariant(x, y):
    alg = build_algebra("sl_split", 2)
    x, y = np.array(x), np.array(y)
    assert np.allclose(alg.br(x, y), -alg.br(y, x), atol=1e-13)
    z = np.roll(x, 3)
    assert abs(alg.form(alg.br(x, y), z) - alg.form(x, alg.br(y, z))) < 1e-12


@settings(max_examples=40, deadline=None)
@given(coeffs)
def test_matrix_roundtrip(x):
    alg = build_algebra("su_compact", 2)
    x = np.array(x)
    assert np.allclose(alg.coeffs_of(alg.to_matrix(x)).real, x, atol=1e-13)


def test_coeffs_of_rejects_foreign_matrix(su2):
    with pytest.raises(LieAlgebraError):
        su2.coeffs_of(np.eye(2))


def test_group_element_validation(su2):
    with pytest.raises(LieAlgebraError):
        GroupElement("SU", np.array([[2.0, 0], [0, 0.5]]))
    with pytest.raises(LieAlgebraError):
        GroupElement("SL", np.eye(2) * 2)


def test_element_helpers(sl2, rng):
    x = AlgebraElement(sl2, rng.normal(size=3))
    y = AlgebraElement(sl2, rng.normal(size=3))
    z = bracket(x, y)
    assert np.allclose(z.matrix, x.matrix @ y.matrix - y.matrix @ x.matrix)
    assert np.isclose(pairing(x, y), np.trace(x.matrix @ y.matrix).real)
    g = group_exp(x)
    assert np.allclose(group_Ad(g, y).matrix, g.matrix @ y.matrix @ np.linalg.inv(g.matrix))
    with pytest.raises(LieAlgebraError):
        x + AlgebraElement(build_algebra("sl_split", 2), np.zeros(8))


def test_realified_double_split(rng):
    D = build_algebra("realified_double", 2)
    Z = D.from_real_coords(rng.normal(size=2 * 8))
    X, Y = D.split(Z)
    assert np.allclose(X + Y, Z)
    assert np.allclose(X, -X.conj().T)
    assert np.allclose(np.tril(Y, -1), 0) and np.allclose(np.diag(Y).imag, 0)


def test_borel_to_compact_is_well_conditioned():
    for rank in (1, 2):
        D = build_algebra("realified_double", rank)
        assert np.linalg.cond(D.b_to_g_matrix) < 1e3


def test_bad_requests():
    with pytest.raises(LieAlgebraError):
        build_algebra("so_compact", 2)
    with pytest.raises(LieAlgebraError):
        build_algebra("sl_split", 0)


def test_to_json_is_serializable(sl2):
    import json
    assert json.loads(json.dumps(sl2.to_json()))["kind"] == "sl_split"
