"""Spectral entropy, PDP decompositions and the membrane-cycle work ledger.

Entropies are in nats and work is ``H * N * k_B * T``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .core import (
    COEF_TOL,
    EQ_TOL,
    Effect,
    MatrixModel,
    Measurement,
    ModelError,
    State,
    StateSpace,
    VertexPolytope,
)
from .instruments import Instrument, groenewold_majorizes

PROB_CLIP = 1e-12


class EntropyError(ModelError):
    """The spectral entropy is undefined or not unique at a state."""


class CycleNotClosedError(ModelError):
    pass


def shannon_entropy(p, tol: float = EQ_TOL) -> float:
    p = np.asarray(p, dtype=float)
    if np.any(p < -tol):
        raise ValueError("probabilities must be nonnegative")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"probabilities sum to {p.sum()}, not 1")
    p = p[p > PROB_CLIP]
    return float(-np.sum(p * np.log(p))) + 0.0


@dataclass(frozen=True, eq=False)
class PDPDecomposition:
    """``rho = sum_i p_i rho_i`` over perfectly distinguishable pure states."""

    probs: np.ndarray
    states: tuple[State, ...]
    witness: Measurement | None = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "states", tuple(self.states))
        if len(p) != len(self.states):
            raise ModelError("one probability per state is required")
        if self.check:
            self.validate()

    def validate(self, tol: float = EQ_TOL) -> None:
        p = self.probs
        if np.any(p <= PROB_CLIP) or abs(p.sum() - 1.0) > 1e-12:
            raise ModelError("probabilities must be positive and sum to one")
        for i, s in enumerate(self.states):
            if not s.is_pure():
                raise ModelError(f"component {i} is not pure")
        if self.witness is not None:
            table = np.array([[e(s) for s in self.states] for e in self.witness])
            if table.shape != (len(p), len(p)) or np.max(np.abs(table - np.eye(len(p)))) > tol:
                raise ModelError("witness does not distinguish the components")

    @property
    def space(self) -> StateSpace:
        return self.states[0].space

    @property
    def target(self) -> State:
        coords = sum(pi * s.coords for pi, s in zip(self.probs, self.states))
        return State(coords, self.space, check=False)

    @property
    def entropy(self) -> float:
        return shannon_entropy(self.probs)

    def to_json(self) -> dict:
        return {"probs": [float(x) for x in self.probs],
                "states": [[float(c) for c in s.coords] for s in self.states],
                "entropy": self.entropy}


@dataclass(frozen=True)
class DecompositionSet:
    target: State
    decompositions: tuple[PDPDecomposition, ...]
    complete: bool = False
    rejected_dependent: int = 0

    def __len__(self) -> int:
        return len(self.decompositions)

    def entropies(self) -> list[float]:
        return [d.entropy for d in self.decompositions]

    def distributions(self, tol: float = EQ_TOL) -> list[np.ndarray]:
        """Distinct probability vectors up to permutation."""
        out: list[np.ndarray] = []
        for d in self.decompositions:
            p = np.sort(d.probs)[::-1]
            if not any(len(q) == len(p) and np.max(np.abs(q - p)) <= tol for q in out):
                out.append(p)
        return out

    def to_json(self) -> dict:
        return {"target": [float(c) for c in self.target.coords],
                "complete": self.complete,
                "rejected_dependent": self.rejected_dependent,
                "decompositions": [d.to_json() for d in self.decompositions]}


def enumerate_pdp_decompositions(rho: State, space: VertexPolytope | None = None,
                                 max_size: int | None = None) -> DecompositionSet:
    """All decompositions of ``rho`` over jointly distinguishable vertex subsets.

    Perfectly distinguishable vertices are linearly independent, so only
    independent subsets are searched; dependent ones are counted.
    """
    space = space or rho.space
    if not isinstance(space, VertexPolytope):
        raise ModelError("enumeration needs a vertex description")
    nv = space.n_vertices
    max_size = min(nv, max_size if max_size is not None else nv)
    verts = space.vertices
    found: list[PDPDecomposition] = []
    rejected = 0
    for size in range(1, max_size + 1):
        for idx in itertools.combinations(range(nv), size):
            sub = verts[list(idx)]
            if np.linalg.matrix_rank(sub, tol=1e-10) < size:
                rejected += 1
                continue
            p, *_ = np.linalg.lstsq(sub.T, rho.coords, rcond=None)
            if np.max(np.abs(sub.T @ p - rho.coords)) > EQ_TOL or np.any(p < -PROB_CLIP):
                continue
            if np.any(p <= PROB_CLIP):
                # the same decomposition appears over a smaller subset
                continue
            if size == 1:
                wit = Measurement((Effect(space.unit),))
            else:
                wit = space.distinguishing_measurement(idx)
                if wit is None:
                    continue
            p = p / p.sum()
            states = tuple(space.state(v, check=False) for v in sub)
            found.append(PDPDecomposition(p, states, wit))
    complete = max_size >= min(nv, space.ambient_dim)
    return DecompositionSet(rho, tuple(found), complete=complete, rejected_dependent=rejected)


def pdp_from_basis(rho, kets, space: MatrixModel | None = None) -> PDPDecomposition:
    """Decomposition of a matrix diagonal in the orthonormal basis ``kets`` (columns or list)."""
    rho = linalg.as_herm(rho)
    d = rho.shape[0]
    if space is None:
        from .models import get_model
        space = get_model("qubit" if d == 2 else f"quantum:{d}")
    kets = [np.asarray(k, dtype=complex) for k in kets]
    projs = [linalg.projector(k) for k in kets]
    probs = np.array([linalg.hs_inner(p, rho) for p in projs])
    recon = sum(p * m for p, m in zip(probs, projs))
    if np.max(np.abs(recon - rho)) > EQ_TOL:
        raise ModelError("state is not diagonal in the given basis")
    keep = [i for i, p in enumerate(probs) if p > PROB_CLIP]
    kept = [projs[i] for i in keep]
    effects = [space.effect_from_matrix(m) for m in kept]
    rest = np.eye(d) - sum(kept)
    effects[-1] = Effect(effects[-1].coeffs + space.to_coords(rest))
    probs = probs[keep] / probs[keep].sum()
    states = tuple(space.state_from_matrix(m, check=False) for m in kept)
    return PDPDecomposition(probs, states, Measurement(tuple(effects)))


def quantum_pdp(rho, space: MatrixModel | None = None) -> PDPDecomposition:
    """Spectral decomposition with eigenprojector components and projective witness."""
    vals, vecs = linalg.eig_herm(rho)
    if vals[-1] < -EQ_TOL or abs(vals.sum() - 1.0) > EQ_TOL:
        raise ModelError("expected a unit-trace positive semidefinite matrix")
    return pdp_from_basis(rho, [vecs[:, i] for i in range(len(vals))], space)


def quantum_decomposition_set(rho, space: MatrixModel | None = None) -> DecompositionSet:
    dec = quantum_pdp(rho, space)
    return DecompositionSet(dec.target, (dec,), complete=False)


# --- entropy verdicts and oracles ---------------------------------------------

@dataclass(frozen=True)
class EntropyVerdict:
    kind: str  # "Unique", "NonUnique" or "Empty"
    values: tuple[float, ...] = ()

    @property
    def value(self) -> float:
        if self.kind != "Unique":
            raise EntropyError(f"entropy is {self.kind}")
        return self.values[0]


def check_entropy_uniqueness(ds: DecompositionSet, tol: float = EQ_TOL) -> EntropyVerdict:
    hs = ds.entropies()
    if not hs:
        return EntropyVerdict("Empty")
    distinct: list[float] = []
    for h in hs:
        if not any(abs(h - g) <= tol for g in distinct):
            distinct.append(h)
    if len(distinct) == 1:
        return EntropyVerdict("Unique", (distinct[0],))
    return EntropyVerdict("NonUnique", tuple(distinct))


EntropyOracle = Callable[[State], float]


def entropy_oracle(space: StateSpace) -> EntropyOracle:
    """Model-supplied spectral entropy; raises ``EntropyError`` where undefined."""
    if isinstance(space, VertexPolytope):
        if space.is_simplex:
            def classical(s: State) -> float:
                p = np.clip(s.coords, 0.0, None)
                return shannon_entropy(p / p.sum())
            return classical

        def polytope_entropy(s: State) -> float:
            v = check_entropy_uniqueness(enumerate_pdp_decompositions(s, space))
            if v.kind == "Empty":
                raise EntropyError("state is not weakly spectral")
            return v.value
        return polytope_entropy
    if isinstance(space, MatrixModel) and (space.name == "qubit" or space.name.startswith("quantum:")):
        def von_neumann(s: State) -> float:
            vals = np.clip(linalg.eig_herm(s.matrix)[0], 0.0, None)
            return shannon_entropy(vals / vals.sum())
        return von_neumann

    def undefined(s: State) -> float:
        raise EntropyError(f"model {space.name!r} has no consistent spectral entropy")
    return undefined


# --- the work ledger ------------------------------------------------------------

@dataclass(frozen=True)
class CycleReport:
    W_separation: float
    W_mixing: float
    delta_W: float
    N: float
    T: float
    k_B: float
    H_q: float
    H_p: float

    def to_json(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def separation_work(decomp: PDPDecomposition, N: float = 1, T: float = 1.0, k_B: float = 1.0) -> float:
    """Isothermal compression work ``H(q) N k_B T`` to sort the components into chambers."""
    return decomp.entropy * N * k_B * T


def cycle_delta_work(decomp_q: PDPDecomposition, decomp_p: PDPDecomposition,
                     N: float = 1, T: float = 1.0, k_B: float = 1.0,
                     tol: float = EQ_TOL) -> CycleReport:
    """Separate along ``q``, relabel pure chambers for free, remix along ``p``."""
    gap = float(np.max(np.abs(decomp_q.target.coords - decomp_p.target.coords)))
    if gap > tol:
        raise CycleNotClosedError(f"decompositions target different states (gap {gap:.3e})")
    hq, hp = decomp_q.entropy, decomp_p.entropy
    w_sep = hq * N * k_B * T
    w_mix = hp * N * k_B * T
    return CycleReport(w_sep, w_mix, (hp - hq) * N * k_B * T, N, T, k_B, hq, hp)


def work_curve(probs: Sequence[float], N: float = 1, kT: float = 1.0, leg: str = "separation",
               n_points: int = 21) -> list[dict]:
    """Cumulative isothermal work along one leg, sampled at ``n_points`` progress values.

    On the separation leg chamber ``j`` is compressed from ``V`` to ``q_j V``
    (work done on the gas); on the mixing leg it expands back (work
    extracted).  Both legs end at ``H(probs) N kT``.
    """
    probs = np.asarray(probs, dtype=float)
    rows = []
    for f in np.linspace(0.0, 1.0, n_points):
        if leg == "separation":
            vol = 1.0 - f * (1.0 - probs)
            chamber = -probs * N * kT * np.log(vol) + 0.0
        elif leg == "mixing":
            vol = probs + f * (1.0 - probs)
            chamber = probs * N * kT * np.log(vol / probs)
        else:
            raise ValueError(f"unknown leg {leg!r}")
        total = float(chamber.sum())
        for j, (v, w) in enumerate(zip(vol, chamber)):
            rows.append({"leg": leg, "progress": float(f), "chamber": j,
                         "volume_fraction": float(v), "chamber_work": float(w),
                         "leg_work": total})
    return rows


# --- concavity and information gain ---------------------------------------------------

def concavity_slack(rho1: State, rho2: State, p: float, oracle: EntropyOracle) -> float:
    """``H(p rho1 + (1-p) rho2) - p H(rho1) - (1-p) H(rho2)``."""
    mix = rho1.mix(rho2, p)
    return oracle(mix) - p * oracle(rho1) - (1 - p) * oracle(rho2)


def concavity_check(rho1: State, rho2: State, p: float, oracle: EntropyOracle,
                    tol: float = EQ_TOL) -> bool:
    if not 0.0 <= p <= 1.0:
        raise ValueError("mixing weight must lie in [0, 1]")
    return concavity_slack(rho1, rho2, p, oracle) >= -tol


def info_gain(rho: State, instr: Instrument, oracle: EntropyOracle) -> float:
    """``H(rho) - sum_j e_j(rho) H(s_j(rho) / e_j(rho))``."""
    total = oracle(rho)
    for y in instr.outputs(rho):
        w = instr.space.weight(y)
        if w <= COEF_TOL:
            continue
        total -= w * oracle(State(y / w, instr.space, check=False))
    return float(total)


@dataclass(frozen=True)
class MonotonicityVerdict:
    kind: str  # "Holds", "Violated" or "NotComparable"
    info_t: float | None = None
    info_s: float | None = None
    kernel: np.ndarray | None = field(default=None, repr=False)

    @property
    def slack(self) -> float | None:
        if self.info_t is None or self.info_s is None:
            return None
        return self.info_t - self.info_s


def monotonicity_check(rho: State, t: Instrument, s: Instrument, oracle: EntropyOracle,
                       tol: float = EQ_TOL) -> MonotonicityVerdict:
    kernel = groenewold_majorizes(t, s, rho)
    if kernel is None:
        return MonotonicityVerdict("NotComparable")
    it, is_ = info_gain(rho, t, oracle), info_gain(rho, s, oracle)
    kind = "Holds" if it >= is_ - tol else "Violated"
    return MonotonicityVerdict(kind, it, is_, kernel.p)
