"""Instruments as families of linear maps on ambient coordinates.

Affine maps ``x -> M x + b`` on normalized states are stored homogenized
as ``M + b u^T`` so they act linearly on subnormalized states too.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    COEF_TOL,
    EQ_TOL,
    Effect,
    MatrixModel,
    Measurement,
    ModelError,
    State,
    StateSpace,
    SubState,
    VertexPolytope,
    parse_number,
    parse_vector,
)
from .lp import FEAS_TOL, LinearProgram, solve

logger = logging.getLogger(__name__)


class Instrument:
    """Generic instrument ``{s_j}`` given by linear maps ``maps[j]``."""

    def __init__(self, maps, space: StateSpace, check: bool = True, labels: Sequence | None = None):
        arr = np.asarray(maps, dtype=float)
        d = space.ambient_dim
        if arr.ndim != 3 or arr.shape[1:] != (d, d):
            raise ModelError(f"instrument maps must have shape (n, {d}, {d}), got {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        self.maps = arr
        self.space = space
        self.labels = list(labels) if labels is not None else list(range(len(arr)))
        if len(self.labels) != len(arr):
            raise ModelError("one label per outcome is required")
        if check:
            self.validate()

    @classmethod
    def from_affine(cls, matrices, offsets, space: StateSpace, check: bool = True) -> Instrument:
        mats = np.asarray(matrices, dtype=float)
        offs = np.asarray(offsets, dtype=float)
        return cls(mats + np.einsum("ni,j->nij", offs, space.unit), space, check=check)

    def __len__(self) -> int:
        return len(self.maps)

    @property
    def n_outcomes(self) -> int:
        return len(self.maps)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n_outcomes={self.n_outcomes}, space={self.space.name!r})"

    def validate(self) -> None:
        sp = self.space
        probes = sp.probe_states()
        total = self.maps.sum(axis=0)
        if np.max(np.abs(probes @ total.T @ sp.unit - 1.0)) > EQ_TOL:
            raise ModelError("outcome probabilities do not sum to one")
        if isinstance(sp, VertexPolytope):
            for j, m in enumerate(self.maps):
                for v in sp.vertices:
                    out = m @ v
                    w = sp.weight(out)
                    if w < -EQ_TOL or w > 1 + EQ_TOL:
                        raise ModelError(f"event {j} gives probability {w} on a vertex")
                    if w > COEF_TOL and not sp.membership(out / w):
                        raise ModelError(f"event {j} maps a vertex outside the space")
                    if w <= COEF_TOL and np.max(np.abs(out)) > EQ_TOL:
                        raise ModelError(f"event {j} has a zero-weight nonzero output")
        elif type(self) is Instrument:
            raise ModelError("generic instruments on matrix models are not supported; use MPP form")

    def effect(self, j: int) -> Effect:
        return Effect(self.space.unit @ self.maps[j])

    @property
    def measurement(self) -> Measurement:
        return Measurement(tuple(self.effect(j) for j in range(self.n_outcomes)))

    def apply(self, j: int, rho) -> SubState:
        if not 0 <= j < self.n_outcomes:
            raise IndexError(f"outcome {j} out of range for {self.n_outcomes} outcomes")
        x = rho.coords if isinstance(rho, (State, SubState)) else np.asarray(rho, dtype=float)
        return SubState(self.maps[j] @ x, self.space)

    def outputs(self, rho) -> np.ndarray:
        """Rows ``s_j(rho)``."""
        x = rho.coords if isinstance(rho, (State, SubState)) else np.asarray(rho, dtype=float)
        return self.maps @ x

    def probabilities(self, rho) -> np.ndarray:
        return self.outputs(rho) @ self.space.unit

    def normalized_outputs(self, rho) -> list[State | None]:
        out = []
        for y in self.outputs(rho):
            w = self.space.weight(y)
            out.append(State(y / w, self.space, check=False) if w > COEF_TOL else None)
        return out


GenericInstrument = Instrument


class MeasurePrepareInstrument(Instrument):
    """``s_j(x) = e_j(x) sigma_j`` for a measurement ``{e_j}`` and states ``{sigma_j}``."""

    require_pure = False

    def __init__(self, effects: Measurement | Sequence[Effect], outputs: Sequence[State],
                 space: StateSpace | None = None, check: bool = True, labels: Sequence | None = None):
        meas = effects if isinstance(effects, Measurement) else Measurement(tuple(effects))
        outs = tuple(outputs)
        if len(outs) != len(meas):
            raise ModelError("need one output state per effect")
        space = space or outs[0].space
        self.effects = meas
        self.outputs_states = outs
        maps = np.array([np.outer(s.coords, e.coeffs) for e, s in zip(meas, outs)])
        super().__init__(maps, space, check=False, labels=labels)
        if check:
            self.validate()

    def validate(self) -> None:
        self.effects.validate(self.space)
        for j, s in enumerate(self.outputs_states):
            if self.space.membership(s.coords) is False:
                raise ModelError(f"output {j} is not a state of the space")
            if self.require_pure and not self.space.is_pure(s.coords):
                raise ModelError(f"output {j} is not pure")

    def effect(self, j: int) -> Effect:
        return self.effects[j]


class MPPInstrument(MeasurePrepareInstrument):
    """Measure-and-prepare-pure instrument."""

    require_pure = True


def identity_instrument(space: StateSpace) -> Instrument:
    return Instrument(np.eye(space.ambient_dim)[None], space, check=False)


def apply(instr: Instrument, j: int, rho) -> SubState:
    return instr.apply(j, rho)


# --- checks ------------------------------------------------------------------

@dataclass(frozen=True)
class RepeatabilityCheck:
    holds: bool
    spanning: bool
    max_error: float

    def __bool__(self) -> bool:
        return self.holds


def is_repeatable(instr: Instrument, probe_states=None, tol: float = EQ_TOL) -> RepeatabilityCheck:
    """``s_j'(s_j(x)) = delta_jj' s_j(x)`` on every probe.

    ``spanning`` is False when the probes do not span the ambient space, in
    which case the verdict holds on the probes only.
    """
    if probe_states is None:
        probes = instr.space.probe_states()
    else:
        probes = np.array([p.coords if isinstance(p, State) else np.asarray(p, dtype=float)
                           for p in probe_states])
    spanning = np.linalg.matrix_rank(probes, tol=1e-9) == instr.space.ambient_dim
    if not spanning:
        logger.info("repeatability certified on probes only (rank-deficient probe set)")
    m = instr.maps
    n = len(m)
    comp = np.einsum("aij,bjk->abik", m, m)  # s_a o s_b
    target = np.zeros_like(comp)
    target[np.arange(n), np.arange(n)] = m
    err = float(np.max(np.abs(np.einsum("abik,pk->abpi", comp - target, probes)), initial=0.0))
    return RepeatabilityCheck(err <= tol, bool(spanning), err)


def is_state_preserving(instr: Instrument, rho: State, tol: float = EQ_TOL) -> bool:
    return bool(np.max(np.abs(instr.outputs(rho).sum(axis=0) - rho.coords)) <= tol)


# --- majorization --------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalKernel:
    """Column-stochastic ``p[j, k] = p(j|k)``."""

    p: np.ndarray
    tol: float = field(default=1e-12, repr=False, compare=False)

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.p, dtype=float)).copy()
        if np.any(p < -self.tol):
            raise ModelError("kernel has negative entries")
        if np.max(np.abs(p.sum(axis=0) - 1.0)) > self.tol:
            raise ModelError("kernel columns must sum to one")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def identity(cls, n: int) -> ConditionalKernel:
        return cls(np.eye(n))

    @classmethod
    def random(cls, n_out: int, n_in: int, rng: np.random.Generator) -> ConditionalKernel:
        p = rng.dirichlet(np.ones(n_out), size=n_in).T
        p[-1] = 1.0 - p[:-1].sum(axis=0)
        return cls(np.clip(p, 0.0, None))

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape

    def compose(self, other: ConditionalKernel) -> ConditionalKernel:
        """``(self o other)(j|l) = sum_k self(j|k) other(k|l)``."""
        return ConditionalKernel(self.p @ other.p, tol=1e-9)


def coarse_grain(t: Instrument, kernel: ConditionalKernel) -> Instrument:
    """``s_j = sum_k p(j|k) t_k``."""
    p = kernel.p if isinstance(kernel, ConditionalKernel) else ConditionalKernel(kernel).p
    if p.shape[1] != t.n_outcomes:
        raise ModelError(f"kernel has {p.shape[1]} columns, instrument has {t.n_outcomes} outcomes")
    return Instrument(np.einsum("jk,kab->jab", p, t.maps), t.space, check=False)


def groenewold_majorizes(t: Instrument, s: Instrument, rho: State,
                         tol: float = FEAS_TOL) -> ConditionalKernel | None:
    """A kernel ``p(j|k)`` with ``s_j(rho) = sum_k p(j|k) t_k(rho)``, or ``None``."""
    tk = t.outputs(rho)
    sj = s.outputs(rho)
    nj, nk, d = len(sj), len(tk), tk.shape[1]
    nvar = nj * nk
    rows = []
    rhs = []
    for k in range(nk):
        r = np.zeros(nvar)
        r[k::nk] = 1.0
        rows.append(r)
        rhs.append(1.0)
    for j in range(nj):
        blk = np.zeros((d, nvar))
        blk[:, j * nk:(j + 1) * nk] = tk.T
        rows.extend(blk)
        rhs.extend(sj[j])
    res = solve(LinearProgram(np.array(rows), np.array(rhs)), feas_tol=tol)
    if not res.feasible:
        return None
    p = np.clip(res.x.reshape(nj, nk), 0.0, None)
    p /= p.sum(axis=0, keepdims=True)
    return ConditionalKernel(p, tol=1e-9)


def majorization_residual(t: Instrument, s: Instrument, rho: State, kernel: ConditionalKernel) -> float:
    return float(np.max(np.abs(kernel.p @ t.outputs(rho) - s.outputs(rho))))


def _some_pure_state(space: StateSpace) -> State:
    if isinstance(space, VertexPolytope):
        return space.state(space.vertices[0], check=False)
    return space.state(space.probe_states()[0], check=False)


def refine_to_pure(s: Instrument, rho: State) -> MPPInstrument:
    """Split every mixed output of ``s`` at ``rho`` into pure components.

    The result acts as ``s`` on ``rho`` for outcomes whose output is already
    pure; a mixed output ``e_j(rho) sum_l q_l sigma_l`` becomes the outcomes
    ``(l, j)`` with effects ``q_l e_j`` and outputs ``sigma_l``.  Outcomes
    with probability at most ``1e-12`` are kept unsplit.
    """
    space = s.space
    effects: list[Effect] = []
    outputs: list[State] = []
    labels: list = []
    for j in range(s.n_outcomes):
        e = s.effect(j)
        y = s.maps[j] @ rho.coords
        w = space.weight(y)
        if w <= COEF_TOL:
            effects.append(e)
            outputs.append(_some_pure_state(space))
            labels.append(s.labels[j])
            continue
        sigma = y / w
        if space.is_pure(sigma):
            effects.append(e)
            outputs.append(State(sigma, space, check=False))
            labels.append(s.labels[j])
            continue
        weights, pures = space.pure_decomposition(sigma)
        for l, (q, v) in enumerate(zip(weights, pures)):
            effects.append(Effect(q * e.coeffs))
            outputs.append(State(v, space, check=False))
            labels.append((l, s.labels[j]))
    # restore exact normalization in the last effect
    meas = list(effects)
    resid = space.unit - sum(e.coeffs for e in meas)
    meas[-1] = Effect(meas[-1].coeffs + resid)
    return MPPInstrument(Measurement(tuple(meas)), outputs, space, check=False, labels=labels)


def make_separating_spm(decomp) -> MPPInstrument:
    """The repeatable MPP instrument ``{e_j, sigma_j}`` built from a PDP decomposition's witness."""
    wit = decomp.witness
    if wit is None:
        raise ModelError("decomposition has no distinguishing measurement")
    states = tuple(decomp.states)
    space = states[0].space
    effects = list(wit.effects)
    if len(effects) != len(states):
        raise ModelError("witness and decomposition sizes differ")
    return MPPInstrument(Measurement(tuple(effects)), states, space, check=True)


# --- JSON I/O ------------------------------------------------------------------

def _parse_matrix(m) -> np.ndarray:
    rows = []
    for row in m:
        vals = []
        for z in row:
            if isinstance(z, (list, tuple)):
                vals.append(complex(parse_number(z[0]), parse_number(z[1])))
            else:
                vals.append(complex(parse_number(z), 0.0))
        rows.append(vals)
    return np.array(rows, dtype=complex)


def _parse_effect(obj, space: StateSpace) -> Effect:
    if isinstance(obj, dict):
        if "matrix" in obj:
            if not isinstance(space, MatrixModel):
                raise ModelError("matrix-form effects need a matrix model")
            return space.effect_from_matrix(_parse_matrix(obj["matrix"]))
        return Effect.affine(parse_vector(obj["coeffs"]), parse_number(obj.get("const", 0)), space.unit)
    return Effect(parse_vector(obj))


def parse_state(obj, space: StateSpace, check: bool = True) -> State:
    if isinstance(obj, dict) and "matrix" in obj:
        if not isinstance(space, MatrixModel):
            raise ModelError("matrix-form states need a matrix model")
        return space.state_from_matrix(_parse_matrix(obj["matrix"]), check=check)
    return space.state(parse_vector(obj), check=check)


def instrument_from_json(obj: dict, space: StateSpace) -> Instrument:
    kind = obj.get("kind")
    if kind in ("mpp", "measure-prepare"):
        effects = Measurement(tuple(_parse_effect(e, space) for e in obj["effects"]))
        outputs = [parse_state(o, space) for o in obj["outputs"]]
        cls = MPPInstrument if kind == "mpp" else MeasurePrepareInstrument
        return cls(effects, outputs, space)
    if kind == "generic":
        d = space.ambient_dim
        mats, offs = [], []
        for ev in obj["events"]:
            mats.append(np.array([parse_vector(r) for r in ev["matrix"]]))
            offs.append(parse_vector(ev["offset"]) if "offset" in ev else np.zeros(d))
        return Instrument.from_affine(np.array(mats), np.array(offs), space)
    raise ModelError(f"unknown instrument kind {kind!r}")


def instrument_to_json(instr: Instrument) -> dict:
    if isinstance(instr, MeasurePrepareInstrument):
        return {"kind": "mpp" if isinstance(instr, MPPInstrument) else "measure-prepare",
                "effects": [[repr(float(c)) for c in e.coeffs] for e in instr.effects],
                "outputs": [[repr(float(c)) for c in s.coords] for s in instr.outputs_states]}
    return {"kind": "generic",
            "events": [{"matrix": [[repr(float(c)) for c in row] for row in m],
                        "offset": ["0.0"] * instr.space.ambient_dim} for m in instr.maps]}
