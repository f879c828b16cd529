"""Seeded random states and instruments for the property suites."""

from __future__ import annotations

import numpy as np

from . import linalg
from .core import MatrixModel, Measurement, State, VertexPolytope
from .instruments import Instrument, MeasurePrepareInstrument, MPPInstrument
from .models import random_ket


def random_simplex_state(space: VertexPolytope, rng: np.random.Generator, floor: float = 1e-3) -> State:
    """Random interior point of a polytope (Dirichlet weights on the vertices)."""
    w = rng.dirichlet(np.ones(space.n_vertices))
    w = (w + floor) / (1 + floor * len(w))
    return space.state(w @ space.vertices, check=False)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_mixed_density(d: int, rng: np.random.Generator, max_eig: float = 0.95) -> np.ndarray:
    """Density matrix whose top eigenvalue is at most ``max_eig``."""
    while True:
        m = random_density(d, rng)
        if linalg.eig_herm(m)[0][0] <= max_eig:
            return m


def random_qubit_state(space: MatrixModel, rng: np.random.Generator) -> State:
    return space.state_from_matrix(random_density(space.dim, rng), check=False)


def random_povm(d: int, n: int, rng: np.random.Generator) -> list[np.ndarray]:
    """``n``-outcome POVM from random positive operators, ``E_k = S^-1/2 A_k S^-1/2``."""
    while True:
        parts = [random_density(d, rng, rank=int(rng.integers(1, d + 1))) for _ in range(n)]
        total = sum(parts)
        if linalg.eig_herm(total)[0][-1] > 1e-3:
            break
    root = linalg.psd_power(total, -0.5)
    effects = [root @ a @ root for a in parts]
    effects = [0.5 * (e + e.conj().T) for e in effects]
    effects[-1] = np.eye(d) - sum(effects[:-1])
    return effects


def random_classical_instrument(space: VertexPolytope, n_outcomes: int,
                                rng: np.random.Generator) -> Instrument:
    """``maps[k][o, i] = P(k, o | i)`` with a random joint kernel per input symbol."""
    n = space.n_vertices
    maps = np.zeros((n_outcomes, n, n))
    for i in range(n):
        joint = rng.dirichlet(np.full(n_outcomes * n, 0.7)).reshape(n_outcomes, n)
        maps[:, :, i] = joint
    return Instrument(maps, space, check=False)


def random_qubit_mpp(space: MatrixModel, n_outcomes: int, rng: np.random.Generator) -> MPPInstrument:
    povm = random_povm(space.dim, n_outcomes, rng)
    outs = [space.state_from_matrix(linalg.projector(random_ket(space.dim, rng)), check=False)
            for _ in range(n_outcomes)]
    meas = Measurement(tuple(space.effect_from_matrix(e) for e in povm))
    return MPPInstrument(meas, outs, space, check=False)


def random_qubit_measure_prepare(space: MatrixModel, n_outcomes: int, rng: np.random.Generator,
                                 max_eig: float = 0.9) -> MeasurePrepareInstrument:
    """Measure-and-prepare instrument whose first output is mixed (top eigenvalue <= ``max_eig``)."""
    povm = random_povm(space.dim, n_outcomes, rng)
    outs = [space.state_from_matrix(random_mixed_density(space.dim, rng, max_eig), check=False)]
    for _ in range(n_outcomes - 1):
        if rng.random() < 0.5:
            m = linalg.projector(random_ket(space.dim, rng))
        else:
            m = random_density(space.dim, rng)
        outs.append(space.state_from_matrix(m, check=False))
    meas = Measurement(tuple(space.effect_from_matrix(e) for e in povm))
    return MeasurePrepareInstrument(meas, outs, space, check=False)

