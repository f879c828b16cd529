from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gptengine import linalg

seeds = st.integers(0, 2**32 - 1)


def _random_herm(d: int, seed: int) -> np.ndarray:
    g = np.random.default_rng(seed)
    a = g.normal(size=(d, d)) + 1j * g.normal(size=(d, d))
    return a + a.conj().T


def test_hs_inner_of_orthogonal_projectors():
    p0 = linalg.projector([1, 0])
    p1 = linalg.projector([0, 1])
    assert linalg.hs_inner(p0, p1) == 0.0
    assert linalg.hs_inner(p0, p0) == 1.0


def test_hs_inner_rejects_mismatched_shapes():
    with pytest.raises(ValueError):
        linalg.hs_inner(np.eye(2), np.eye(3))


def test_as_herm_rejects_non_hermitian():
    with pytest.raises(ValueError):
        linalg.as_herm([[0, 1], [0, 0]])


@given(seeds, st.integers(1, 5))
def test_eig_herm_reconstructs_and_sorts(seed, d):
    a = _random_herm(d, seed)
    vals, vecs = linalg.eig_herm(a)
    assert np.all(np.diff(vals) <= 1e-12)
    assert np.allclose(linalg.reconstruct(vals, vecs), a, atol=1e-10)
    assert np.allclose(vecs.conj().T @ vecs, np.eye(d), atol=1e-10)


@given(seeds)
def test_eigenvalues_match_characteristic_polynomial_for_2x2(seed):
    a = _random_herm(2, seed)
    tr, det = np.trace(a).real, np.linalg.det(a).real
    disc = np.sqrt(tr**2 - 4 * det)
    vals = linalg.eig_herm(a)[0]
    assert np.allclose(vals, [(tr + disc) / 2, (tr - disc) / 2], atol=1e-9)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_hermitian_basis_is_orthonormal_with_identity_first(d):
    b = linalg.hermitian_basis(d)
    gram = np.einsum("aij,bji->ab", b, b)
    assert np.allclose(gram, np.eye(d * d), atol=1e-12)
    assert np.allclose(b[0], np.eye(d) / np.sqrt(d))


@given(seeds, st.integers(1, 4))
def test_coords_roundtrip(seed, d):
    a = _random_herm(d, seed)
    assert np.allclose(linalg.from_coords(linalg.to_coords(a)), a, atol=1e-12)


def test_partial_transpose_of_product_is_product_of_transposes(rng):
    a = _random_herm(2, 1)
    b = _random_herm(2, 2)
    pt = linalg.partial_transpose(np.kron(a, b), (2, 2), 1)
    assert np.allclose(pt, np.kron(a, b.T))
    pt0 = linalg.partial_transpose(np.kron(a, b), (2, 2), 0)
    assert np.allclose(pt0, np.kron(a.T, b))


def test_swap_operator_exchanges_factors():
    a, b = _random_herm(2, 3), _random_herm(3, 4)
    s = linalg.swap_operator(2, 3)
    assert np.allclose(s @ np.kron(a, b) @ s.conj().T, np.kron(b, a))


def test_psd_power_inverse_square_root():
    a = _random_herm(3, 5)
    a = a @ a + np.eye(3)
    r = linalg.psd_power(a, -0.5)
    assert np.allclose(r @ a @ r, np.eye(3), atol=1e-10)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_bloch_roundtrip(x, y, z):
    r = np.array([x, y, z])
    if np.linalg.norm(r) > 1:
        r = r / np.linalg.norm(r)
    rho = linalg.bloch_to_state(r)
    assert np.isclose(np.trace(rho).real, 1.0)
    assert np.allclose(linalg.state_to_bloch(rho), r, atol=1e-12)
