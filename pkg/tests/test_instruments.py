from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gptengine import models, sampling, thermo
from gptengine.core import Effect, Measurement, ModelError
from gptengine.instruments import (
    ConditionalKernel,
    Instrument,
    MPPInstrument,
    coarse_grain,
    groenewold_majorizes,
    identity_instrument,
    instrument_from_json,
    instrument_to_json,
    is_repeatable,
    is_state_preserving,
    make_separating_spm,
    majorization_residual,
    refine_to_pure,
)

seeds = st.integers(0, 2**32 - 1)


def _classical_setup(seed: int, n: int = 3, k: int = 3):
    g = np.random.default_rng(seed)
    space = models.make_classical(n)
    return g, space, sampling.random_classical_instrument(space, k, g), sampling.random_simplex_state(space, g)


def test_classical_instrument_probabilities_sum_to_one(rng):
    space = models.make_classical(4)
    t = sampling.random_classical_instrument(space, 3, rng)
    t.validate()
    rho = sampling.random_simplex_state(space, rng)
    assert t.probabilities(rho).sum() == pytest.approx(1.0)
    assert t.apply(1, rho).weight == pytest.approx(t.probabilities(rho)[1])
    with pytest.raises(IndexError):
        t.apply(3, rho)


def test_instrument_validation_catches_bad_maps():
    space = models.make_classical(2)
    with pytest.raises(ModelError):
        Instrument(np.eye(2)[None] * 0.5, space)
    with pytest.raises(ModelError):
        Instrument(np.zeros((1, 3, 3)), space)
    flip_neg = np.array([[[1.0, 0.0], [0.0, 1.0]], [[0.0, 0.0], [0.0, 0.0]]])
    flip_neg[0, 1, 0] = -0.5
    flip_neg[1, 1, 0] = 0.5
    with pytest.raises(ModelError):
        Instrument(flip_neg, space)


def test_generic_maps_on_matrix_models_are_rejected():
    q = models.get_model("qubit")
    with pytest.raises(ModelError):
        Instrument(np.eye(4)[None], q)


def test_mpp_requires_pure_outputs():
    q = models.get_model("qubit")
    meas = Measurement((Effect(q.unit),))
    with pytest.raises(ModelError):
        MPPInstrument(meas, [q.state_from_matrix(np.eye(2) / 2)], q)


def test_identity_instrument_is_repeatable_and_preserving(rng):
    space = models.make_classical(3)
    ident = identity_instrument(space)
    assert is_repeatable(ident)
    assert is_state_preserving(ident, sampling.random_simplex_state(space, rng))


@given(seeds)
def test_coarse_grain_is_majorized(seed):
    g, space, t, rho = _classical_setup(seed)
    kernel = ConditionalKernel.random(int(g.integers(1, 4)), t.n_outcomes, g)
    s = coarse_grain(t, kernel)
    found = groenewold_majorizes(t, s, rho)
    assert found is not None
    assert majorization_residual(t, s, rho, found) <= 1e-8


@given(seeds)
def test_majorization_is_reflexive_and_transitive(seed):
    g, space, t, rho = _classical_setup(seed)
    k1 = groenewold_majorizes(t, t, rho)
    assert k1 is not None and majorization_residual(t, t, rho, k1) <= 1e-8
    a = ConditionalKernel.random(3, t.n_outcomes, g)
    b = ConditionalKernel.random(2, 3, g)
    s = coarse_grain(t, a)
    r = coarse_grain(s, b)
    assert groenewold_majorizes(t, r, rho) is not None
    assert np.allclose(coarse_grain(t, b.compose(a)).maps, r.maps, atol=1e-12)


def test_kernel_validation():
    with pytest.raises(ModelError):
        ConditionalKernel([[0.5, 1.0], [0.6, 0.0]])
    with pytest.raises(ModelError):
        ConditionalKernel([[1.2], [-0.2]])
    with pytest.raises(ModelError):
        coarse_grain(identity_instrument(models.make_classical(2)), ConditionalKernel.identity(2))


def test_trivial_instrument_cannot_majorize_sharp_one():
    space = models.make_classical(2)
    rho = space.state([0.5, 0.5])
    sharp = Instrument(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]), space)
    assert groenewold_majorizes(identity_instrument(space), sharp, rho) is None
    assert groenewold_majorizes(sharp, identity_instrument(space), rho) is not None


@given(seeds)
def test_refine_to_pure_is_strictly_finer_on_qubit(seed):
    g = np.random.default_rng(seed)
    q = models.get_model("qubit")
    s = sampling.random_qubit_measure_prepare(q, 2, g)
    rho = sampling.random_qubit_state(q, g)
    t = refine_to_pure(s, rho)
    t.validate()
    assert all(o is None or o.is_pure() for o in t.normalized_outputs(rho))
    assert groenewold_majorizes(t, s, rho) is not None
    if s.probabilities(rho)[0] > 1e-3:
        assert groenewold_majorizes(s, t, rho) is None


def test_refined_labels_record_the_split(rng):
    space = models.make_classical(2)
    s = identity_instrument(space)
    rho = space.state([0.25, 0.75])
    t = refine_to_pure(s, rho)
    assert t.labels == [(0, 0), (1, 0)]
    assert np.allclose(t.outputs(rho).sum(axis=0), rho.coords)


def test_separating_spm_is_repeatable_and_preserving():
    square = models.make_square_bit()
    center = square.state([1, 0, 0])
    for dec in thermo.enumerate_pdp_decompositions(center).decompositions:
        spm = make_separating_spm(dec)
        check = is_repeatable(spm)
        assert check.holds and check.spanning
        assert is_state_preserving(spm, center)


def test_json_roundtrip_generic_and_mpp(rng):
    space = models.make_classical(3)
    t = sampling.random_classical_instrument(space, 2, rng)
    again = instrument_from_json(json.loads(json.dumps(instrument_to_json(t))), space)
    assert np.allclose(again.maps, t.maps)
    q = models.get_model("qubit")
    m = sampling.random_qubit_mpp(q, 3, rng)
    again = instrument_from_json(instrument_to_json(m), q)
    assert isinstance(again, MPPInstrument)
    assert np.allclose(again.maps, m.maps, atol=1e-12)


def test_json_accepts_rationals_offsets_and_matrices():
    space = models.make_classical(2)
    obj = {"kind": "generic", "events": [
        {"matrix": [["1/2", 0], [0, 0]], "offset": [0, 0]},
        {"matrix": [["1/2", 0], [0, 1]]},
    ]}
    t = instrument_from_json(obj, space)
    assert t.probabilities(space.state([1, 0])) == pytest.approx([0.5, 0.5])
    q = models.get_model("qubit")
    z = {"kind": "mpp",
         "effects": [{"matrix": [[1, 0], [0, 0]]}, {"matrix": [[0, 0], [0, 1]]}],
         "outputs": [{"matrix": [[1, 0], [0, 0]]}, {"matrix": [[0, 0], [0, [1, 0]]]}]}
    inst = instrument_from_json(z, q)
    assert inst.probabilities(q.state_from_matrix(np.eye(2) / 2)) == pytest.approx([0.5, 0.5])
    with pytest.raises(ModelError):
        instrument_from_json({"kind": "other"}, space)
