from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gptengine import models
from gptengine.core import (
    Effect,
    Measurement,
    ModelError,
    VertexPolytope,
    parse_number,
    perfectly_distinguishable,
    space_from_json,
    space_to_json,
)


@pytest.fixture
def square():
    return models.make_square_bit()


def test_square_bit_geometry(square):
    assert square.n_vertices == 4
    assert square.membership([1, 0, 0])
    assert square.membership([1, 1, -1])
    assert not square.membership([1, 1.01, 0])
    assert square.is_pure([1, -1, 1])
    assert not square.is_pure([1, 0, 1])


def test_state_construction_checks(square):
    with pytest.raises(ModelError):
        square.state([2, 0, 0])
    with pytest.raises(ModelError):
        square.state([1, 2, 0])
    with pytest.raises(ModelError):
        square.state([1, 0])


def test_duplicate_vertices_are_merged():
    p = VertexPolytope([[1, 0], [0, 1], [1, 0]], [1, 1])
    assert p.n_vertices == 2


def test_classical_is_simplex():
    c = models.make_classical(3)
    assert c.is_simplex
    assert c.membership([0.2, 0.3, 0.5])
    assert not c.membership([1.2, -0.2, 0.0])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_classical_vertices_jointly_distinguishable(n):
    c = models.make_classical(n)
    states = [c.state(v) for v in c.vertices]
    m = perfectly_distinguishable(states, c)
    assert m is not None
    table = np.array([[e(s) for s in states] for e in m])
    assert np.allclose(table, np.eye(n), atol=1e-9)
    assert m.sums_to_unit(c.unit)


def test_square_bit_pairs_distinguishable_but_no_triples(square):
    verts = [square.state(v) for v in square.vertices]
    for a, b in itertools.combinations(verts, 2):
        m = perfectly_distinguishable([a, b], square)
        assert m is not None
        m.validate(square)
    for triple in itertools.combinations(verts, 3):
        assert perfectly_distinguishable(list(triple), square) is None


def test_mixed_states_are_not_distinguishable(square):
    a = square.state([1, 0, 0])
    b = square.state([1, 1, 1])
    assert perfectly_distinguishable([a, b], square) is None


def test_effect_affine_folding(square):
    e = Effect.affine([0, 0.5, 0], 0.5, square.unit)
    assert e([1, 1, 1]) == pytest.approx(1.0)
    assert e([1, -1, 1]) == pytest.approx(0.0)
    assert e.is_valid(square)
    assert not Effect([0, 1, 0]).is_valid(square)


def test_measurement_validation_rejects_bad_sums(square):
    m = Measurement((Effect([0.5, 0, 0]), Effect([0.4, 0, 0])))
    with pytest.raises(ModelError):
        m.validate(square)


@given(st.integers(0, 2**32 - 1))
def test_effect_min_matches_brute_force_on_qubit(seed):
    q = models.make_qubit()
    g = np.random.default_rng(seed)
    a = g.normal(size=(2, 2)) + 1j * g.normal(size=(2, 2))
    e = q.effect_from_matrix(a + a.conj().T)
    kets = [models.random_ket(2, g) for _ in range(200)]
    brute = min(e(q.state_from_matrix(np.outer(k, k.conj()))) for k in kets)
    assert q.effect_min(e.coeffs) <= brute + 1e-12


def test_matrix_model_roundtrip_and_purity(rng):
    q = models.make_quantum(3)
    k = models.random_ket(3, rng)
    s = q.state_from_matrix(np.outer(k, k.conj()))
    assert s.is_pure()
    assert np.allclose(s.matrix, np.outer(k, k.conj()))
    assert not q.state_from_matrix(np.eye(3) / 3).is_pure()
    with pytest.raises(ModelError):
        q.state_from_matrix(np.diag([1.5, -0.5, 0.0]))


def test_rational_strings_parse_exactly():
    assert parse_number("1/3") == 1 / 3
    assert parse_number(" 0.25 ") == 0.25
    with pytest.raises(ModelError):
        parse_number(None)


def test_space_json_roundtrip(square):
    again = space_from_json(space_to_json(square))
    assert np.allclose(again.vertices, square.vertices)
    assert np.allclose(again.unit, square.unit)
    q = space_from_json({"kind": "matrix", "model": "qubit", "hilbert_dims": [2]})
    assert q is models.get_model("qubit")
    with pytest.raises(ModelError):
        space_from_json({"kind": "matrix", "model": "qubit", "hilbert_dims": [3]})
    with pytest.raises(ModelError):
        space_from_json({"kind": "polytope", "dim": 4, "unit": [1, 0, 0], "vertices": [[1, 0, 0]]})
