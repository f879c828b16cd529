"""State spaces, states, effects, measurements and perfect distinguishability."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .lp import FEAS_TOL, LinearProgram, solve

EQ_TOL = 1e-9
COEF_TOL = 1e-12
DUP_TOL = 1e-12


class ModelError(ValueError):
    """Raised for malformed models or queries a model cannot answer."""


class StateSpace:
    """A convex state space embedded in ``R^d`` with unit effect ``unit``.

    Subclasses decide membership, purity and effect validity.
    """

    name: str
    unit: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.unit.shape[0]

    def membership(self, x) -> bool | None:
        raise NotImplementedError

    def is_pure(self, x) -> bool:
        raise NotImplementedError

    def effect_min(self, coeffs: np.ndarray) -> float:
        """Minimum of the linear form ``coeffs`` over the pure states."""
        raise NotImplementedError

    def pure_decomposition(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Weights and pure states (rows) whose mixture is ``x``."""
        raise ModelError(f"model {self.name!r} has no pure-decomposition oracle")

    def state(self, coords, check: bool = True) -> State:
        return State(np.asarray(coords, dtype=float), self, check=check)

    def weight(self, x) -> float:
        return float(self.unit @ np.asarray(x, dtype=float))

    def probe_states(self) -> np.ndarray:
        raise NotImplementedError


class VertexPolytope(StateSpace):
    """Polytope given by its vertex list (rows)."""

    def __init__(self, vertices, unit, name: str = "polytope"):
        verts = np.atleast_2d(np.asarray(vertices, dtype=float))
        unit = np.asarray(unit, dtype=float)
        if verts.shape[1] != unit.shape[0]:
            raise ModelError("vertex length does not match unit length")
        if np.max(np.abs(verts @ unit - 1.0)) > EQ_TOL:
            raise ModelError("every vertex must satisfy unit(v) = 1")
        kept: list[np.ndarray] = []
        for v in verts:
            if not any(np.max(np.abs(v - w)) <= DUP_TOL for w in kept):
                kept.append(v)
        self.vertices = np.array(kept)
        self.vertices.setflags(write=False)
        self.unit = unit
        self.unit.setflags(write=False)
        self.name = name
        self._dist_cache: dict[tuple[int, ...], Measurement | None] = {}
        self.is_simplex = (self.vertices.shape[0] == self.vertices.shape[1]
                           and np.allclose(self.vertices, np.eye(len(self.vertices)))
                           and np.allclose(self.unit, 1.0))

    def __repr__(self) -> str:
        return f"VertexPolytope({self.name!r}, n_vertices={len(self.vertices)})"

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def hull_weights(self, x) -> np.ndarray | None:
        """Convex weights ``lam`` with ``lam @ vertices = x`` (a vertex solution), or ``None``."""
        x = np.asarray(x, dtype=float)
        a = np.vstack([self.vertices.T, np.ones(self.n_vertices)])
        b = np.concatenate([x, [1.0]])
        res = solve(LinearProgram(a, b))
        return res.x if res.feasible else None

    def membership(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if abs(self.weight(x) - 1.0) > EQ_TOL:
            return False
        if self.is_simplex:
            return bool(np.all(x >= -EQ_TOL))
        return self.hull_weights(x) is not None

    def vertex_index(self, x, tol: float = EQ_TOL) -> int | None:
        d = np.max(np.abs(self.vertices - np.asarray(x, dtype=float)), axis=1)
        i = int(np.argmin(d))
        return i if d[i] <= tol else None

    def is_pure(self, x) -> bool:
        return self.vertex_index(x) is not None

    def effect_min(self, coeffs) -> float:
        return float(np.min(self.vertices @ np.asarray(coeffs, dtype=float)))

    def effect_max(self, coeffs) -> float:
        return float(np.max(self.vertices @ np.asarray(coeffs, dtype=float)))

    def pure_decomposition(self, x):
        lam = self.hull_weights(x)
        if lam is None:
            raise ModelError("state is not in the polytope")
        keep = lam > COEF_TOL
        w = lam[keep] / lam[keep].sum()
        return w, self.vertices[keep]

    def probe_states(self) -> np.ndarray:
        return self.vertices

    def distinguishing_measurement(self, idx: Sequence[int]) -> Measurement | None:
        """Cached perfect-distinguishability LP for a tuple of vertex indices."""
        key = tuple(idx)
        if key not in self._dist_cache:
            self._dist_cache[key] = perfectly_distinguishable(
                [self.state(self.vertices[i], check=False) for i in key], self)
        return self._dist_cache[key]


class MatrixModel(StateSpace):
    """State space of unit-trace Hermitian matrices, vectorized in the Hermitian basis.

    ``membership_oracle`` returns ``True``/``False`` or ``None`` when it cannot
    decide.  ``effect_min_oracle`` minimizes ``Tr{E rho}`` over pure states.
    ``pure_generator(rng)`` samples a pure state matrix.
    """

    def __init__(self, name: str, hilbert_dims: Sequence[int],
                 membership_oracle: Callable[[np.ndarray], bool | None],
                 effect_min_oracle: Callable[[np.ndarray], float],
                 pure_generator: Callable[[np.random.Generator], np.ndarray],
                 decomposer: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None,
                 extra_pure: Sequence[np.ndarray] = ()):
        self.name = name
        self.hilbert_dims = tuple(int(d) for d in hilbert_dims)
        self.dim = int(np.prod(self.hilbert_dims))
        self.unit = linalg.to_coords(np.eye(self.dim))
        self.unit.setflags(write=False)
        self._membership = membership_oracle
        self._effect_min = effect_min_oracle
        self.pure_generator = pure_generator
        self._decomposer = decomposer
        self.extra_pure = [linalg.as_herm(m) for m in extra_pure]

    def __repr__(self) -> str:
        return f"MatrixModel({self.name!r}, hilbert_dims={self.hilbert_dims})"

    def to_coords(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=complex)
        if m.shape != (self.dim, self.dim):
            raise ModelError(f"expected a {self.dim}x{self.dim} matrix, got {m.shape}")
        return linalg.to_coords(m)

    def to_matrix(self, x) -> np.ndarray:
        return linalg.from_coords(x)

    def state_from_matrix(self, m, check: bool = True) -> State:
        return self.state(self.to_coords(linalg.as_herm(m)), check=check)

    def effect_from_matrix(self, m) -> Effect:
        return Effect(self.to_coords(linalg.as_herm(m)))

    def membership(self, x) -> bool | None:
        x = np.asarray(x, dtype=float)
        if abs(self.weight(x) - 1.0) > EQ_TOL:
            return False
        return self._membership(self.to_matrix(x))

    def is_pure(self, x) -> bool:
        vals, _ = linalg.eig_herm(self.to_matrix(x))
        return bool(vals[0] >= 1.0 - EQ_TOL)

    def effect_min(self, coeffs) -> float:
        return float(self._effect_min(self.to_matrix(coeffs)))

    def pure_decomposition(self, x):
        if self._decomposer is None:
            return super().pure_decomposition(x)
        w, mats = self._decomposer(self.to_matrix(x))
        return np.asarray(w, dtype=float), linalg.to_coords(np.asarray(mats))

    def random_pure(self, rng: np.random.Generator) -> State:
        return self.state_from_matrix(self.pure_generator(rng), check=False)

    def probe_states(self) -> np.ndarray:
        # a spanning set: real and imaginary superpositions of basis kets
        d = self.dim
        probes = []
        for i in range(d):
            e = np.zeros(d, dtype=complex)
            e[i] = 1
            probes.append(linalg.projector(e))
        for i, j in itertools.combinations(range(d), 2):
            for phase in (1, 1j):
                e = np.zeros(d, dtype=complex)
                e[i], e[j] = 1, phase
                probes.append(linalg.projector(e))
        return linalg.to_coords(np.array(probes))


@dataclass(frozen=True, eq=False)
class State:
    coords: np.ndarray
    space: StateSpace = field(repr=False)
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        if c.shape != (self.space.ambient_dim,):
            raise ModelError(f"state has {c.shape} coords, space needs {self.space.ambient_dim}")
        if abs(self.space.weight(c) - 1.0) > EQ_TOL:
            raise ModelError(f"state is not normalized: unit(x) = {self.space.weight(c)}")
        if self.check and self.space.membership(c) is False:
            raise ModelError("state is not a member of the space")

    @property
    def matrix(self) -> np.ndarray:
        if not isinstance(self.space, MatrixModel):
            raise ModelError("state of a polytope model has no matrix form")
        return self.space.to_matrix(self.coords)

    def is_pure(self) -> bool:
        return self.space.is_pure(self.coords)

    def mix(self, other: State, p: float) -> State:
        return State(p * self.coords + (1 - p) * other.coords, self.space, check=False)

    def allclose(self, other, tol: float = EQ_TOL) -> bool:
        y = other.coords if isinstance(other, State) else np.asarray(other)
        return bool(np.max(np.abs(self.coords - y)) <= tol)


@dataclass(frozen=True, eq=False)
class SubState:
    coords: np.ndarray
    space: StateSpace = field(repr=False)

    @property
    def weight(self) -> float:
        return self.space.weight(self.coords)

    def normalized(self) -> State | None:
        w = self.weight
        if w <= COEF_TOL:
            return None
        return State(self.coords / w, self.space, check=False)


@dataclass(frozen=True)
class Effect:
    """Linear form ``e(x) = coeffs . x`` on the ambient coordinates.

    Use :meth:`affine` to build one from ``a . x + c`` on normalized states;
    the constant is folded in as ``c * unit`` so that evaluation stays
    linear on subnormalized states.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def affine(cls, a, const: float, unit) -> Effect:
        return cls(np.asarray(a, dtype=float) + const * np.asarray(unit, dtype=float))

    def __call__(self, x) -> float:
        if isinstance(x, (State, SubState)):
            x = x.coords
        return float(self.coeffs @ np.asarray(x, dtype=float))

    def is_valid(self, space: StateSpace, tol: float = EQ_TOL) -> bool:
        lo = space.effect_min(self.coeffs)
        hi = -space.effect_min(-self.coeffs)
        return lo >= -tol and hi <= 1 + tol


@dataclass(frozen=True)
class Measurement:
    effects: tuple[Effect, ...]

    def __post_init__(self):
        object.__setattr__(self, "effects", tuple(self.effects))
        if not self.effects:
            raise ModelError("a measurement needs at least one effect")

    def __len__(self) -> int:
        return len(self.effects)

    def __getitem__(self, j: int) -> Effect:
        return self.effects[j]

    def __iter__(self):
        return iter(self.effects)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([e.coeffs for e in self.effects])

    def probabilities(self, x) -> np.ndarray:
        if isinstance(x, (State, SubState)):
            x = x.coords
        return self.matrix @ np.asarray(x, dtype=float)

    def sums_to_unit(self, unit, tol: float = COEF_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix.sum(axis=0) - unit)) <= tol)

    def validate(self, space: StateSpace, tol: float = EQ_TOL) -> None:
        if not self.sums_to_unit(space.unit):
            raise ModelError("effects do not sum to the unit effect")
        for j, e in enumerate(self.effects):
            if not e.is_valid(space, tol):
                raise ModelError(f"effect {j} leaves [0, 1] on the state space")

    def permuted(self, order: Sequence[int]) -> Measurement:
        return Measurement(tuple(self.effects[i] for i in order))


def membership(x, space: StateSpace) -> bool | None:
    if isinstance(x, State):
        x = x.coords
    return space.membership(x)


def is_pure(rho: State, space: StateSpace | None = None) -> bool:
    space = space or rho.space
    return space.is_pure(rho.coords)


def perfectly_distinguishable(states: Sequence[State], space: VertexPolytope,
                              tol: float = FEAS_TOL) -> Measurement | None:
    """Measurement with ``e_j(rho_j') = delta_jj'`` or ``None`` if none exists.

    Variables are the effect coefficient vectors (free); constraints are
    ``0 <= e_j(v) <= 1`` at the vertices, ``sum_j e_j = u`` and the
    distinguishing conditions.
    """
    if not isinstance(space, VertexPolytope):
        raise ModelError("the distinguishability LP needs a vertex description")
    n = len(states)
    if n < 2:
        raise ModelError("need at least two states")
    for s in states:
        if not space.membership(s.coords):
            raise ModelError("state is not in the space")
    d = space.ambient_dim
    verts = space.vertices
    nv = len(verts)
    nvar = n * d
    rows, rhs = [], []
    # sum_j e_j = u
    for i in range(d):
        r = np.zeros(nvar)
        r[i::d] = 1.0
        rows.append(r)
        rhs.append(space.unit[i])
    # e_j(rho_j') = delta
    for j in range(n):
        for jp in range(n):
            r = np.zeros(nvar)
            r[j * d:(j + 1) * d] = states[jp].coords
            rows.append(r)
            rhs.append(1.0 if j == jp else 0.0)
    # 0 <= e_j(v) <= 1 via slack variables bounded in [0, 1]
    a_eq = np.zeros((len(rows) + n * nv, nvar + n * nv))
    a_eq[:len(rows), :nvar] = np.array(rows)
    b_eq = np.concatenate([rhs, np.zeros(n * nv)])
    for j in range(n):
        blk = slice(len(rows) + j * nv, len(rows) + (j + 1) * nv)
        a_eq[blk, j * d:(j + 1) * d] = verts
        a_eq[blk, nvar + j * nv:nvar + (j + 1) * nv] = -np.eye(nv)
    bounds = np.vstack([np.tile([-np.inf, np.inf], (nvar, 1)),
                        np.tile([0.0, 1.0], (n * nv, 1))])
    res = solve(LinearProgram(a_eq, b_eq, bounds=bounds), feas_tol=tol)
    if not res.feasible:
        return None
    coeffs = res.x[:nvar].reshape(n, d)
    # restore exact normalization; the correction is O(solver residual)
    coeffs[-1] = space.unit - coeffs[:-1].sum(axis=0)
    return Measurement(tuple(Effect(c) for c in coeffs))


# --- JSON I/O -------------------------------------------------------------

def parse_number(v) -> float:
    """Accept numbers, decimal strings, and exact rational strings like ``"1/3"``."""
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        s = v.strip()
        if "/" in s:
            return float(Fraction(s))
        return float(s)
    raise ModelError(f"cannot parse number {v!r}")


def parse_vector(vs) -> np.ndarray:
    return np.array([parse_number(v) for v in vs], dtype=float)


def format_number(x: float) -> str:
    return repr(float(x))


def space_from_json(obj: dict) -> StateSpace:
    kind = obj.get("kind")
    if kind == "polytope":
        verts = np.array([parse_vector(v) for v in obj["vertices"]])
        unit = parse_vector(obj["unit"])
        if "dim" in obj and int(obj["dim"]) != unit.shape[0]:
            raise ModelError("declared dim does not match the unit length")
        return VertexPolytope(verts, unit, name=obj.get("name", "polytope"))
    if kind == "matrix":
        from .models import get_model
        space = get_model(obj["model"])
        if "hilbert_dims" in obj and tuple(obj["hilbert_dims"]) != space.hilbert_dims:
            raise ModelError("hilbert_dims do not match the named model")
        return space
    raise ModelError(f"unknown state-space kind {kind!r}")


def space_to_json(space: StateSpace) -> dict:
    if isinstance(space, VertexPolytope):
        return {"kind": "polytope", "name": space.name, "dim": space.ambient_dim,
                "unit": [format_number(u) for u in space.unit],
                "vertices": [[format_number(c) for c in v] for v in space.vertices]}
    if isinstance(space, MatrixModel):
        return {"kind": "matrix", "hilbert_dims": list(space.hilbert_dims), "model": space.name}
    raise ModelError(f"cannot serialize {space!r}")
