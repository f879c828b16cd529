"""Concrete state spaces and the two-qubit separable-state fixtures.

Model names accepted by :func:`get_model`: ``classical:n``, ``quantum:d``,
``qubit``, ``square-bit``, ``sep22`` and ``omega-bar``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .core import (
    COEF_TOL,
    EQ_TOL,
    Effect,
    MatrixModel,
    Measurement,
    ModelError,
    StateSpace,
    VertexPolytope,
)
from .thermo import PDPDecomposition

SQRT3 = np.sqrt(3.0)
KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KETP = np.array([1, 1], dtype=complex) / np.sqrt(2)


# --- polytopes --------------------------------------------------------------

def make_classical(n: int) -> VertexPolytope:
    """Probability simplex on ``n`` symbols; coordinates are the probabilities."""
    if n < 2:
        raise ModelError("a classical model needs n >= 2")
    return VertexPolytope(np.eye(n), np.ones(n), name=f"classical:{n}")


def make_square_bit() -> VertexPolytope:
    """Square with vertices ``(1, +-1, +-1)``; the first coordinate is the normalization."""
    verts = [[1, 1, 1], [1, -1, 1], [1, -1, -1], [1, 1, -1]]
    return VertexPolytope(verts, [1, 0, 0], name="square-bit")


# --- quantum ----------------------------------------------------------------

def random_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def _psd_member(m: np.ndarray) -> bool:
    return bool(linalg.eig_herm(m)[0][-1] >= -EQ_TOL)


def _eigen_decomposition(m: np.ndarray):
    vals, vecs = linalg.eig_herm(m)
    keep = vals > COEF_TOL
    w = vals[keep] / vals[keep].sum()
    mats = np.array([linalg.projector(vecs[:, i]) for i in np.flatnonzero(keep)])
    return w, mats


def make_quantum(d: int) -> MatrixModel:
    return MatrixModel(
        name="qubit" if d == 2 else f"quantum:{d}",
        hilbert_dims=(d,),
        membership_oracle=_psd_member,
        effect_min_oracle=lambda e: float(linalg.eig_herm(e)[0][-1]),
        pure_generator=lambda rng: linalg.projector(random_ket(d, rng)),
        decomposer=_eigen_decomposition,
    )


def make_qubit() -> MatrixModel:
    return make_quantum(2)


# --- product-state minimization --------------------------------------------

def pauli_coefficients(e) -> np.ndarray:
    """``C[i, j] = Tr{E (P_i x P_j)}`` so that ``Tr{E rhoA x rhoB} = a^T C b / 4``."""
    e = np.asarray(e, dtype=complex)
    c = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            c[i, j] = np.trace(e @ np.kron(linalg.PAULI[i], linalg.PAULI[j])).real
    return c


def _bloch_grid(n: int) -> np.ndarray:
    th = np.linspace(0.0, np.pi, n)
    ph = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    t, p = np.meshgrid(th, ph, indexing="ij")
    pts = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)
    return pts.reshape(-1, 3)


def _unit(v: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(v)
    if nrm < 1e-15:
        return np.array([0.0, 0.0, 1.0])
    return v / nrm


def seesaw_min(c: np.ndarray, a: np.ndarray, iters: int = 200) -> tuple[float, np.ndarray, np.ndarray]:
    """Alternating exact minimization over the two Bloch vectors from start ``a``."""
    val = np.inf
    b = np.zeros(3)
    for _ in range(iters):
        w = c.T @ np.concatenate([[1.0], a])
        b = -_unit(w[1:])
        v = c @ np.concatenate([[1.0], b])
        a = -_unit(v[1:])
        new = 0.25 * (v[0] - np.linalg.norm(v[1:]))
        if val - new < 1e-15:
            val = min(val, new)
            break
        val = new
    return float(val), a, b


def min_over_product_states(e, restarts: int = 64, grid: int = 30, seed: int = 0) -> float:
    """Minimum of ``Tr{E (rhoA x rhoB)}`` over pure product states of two qubits.

    Combines a seeded multistart see-saw with a deterministic Bloch-angle
    grid and returns the smaller estimate.
    """
    c = pauli_coefficients(linalg.as_herm(e))
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(restarts):
        val, _, _ = seesaw_min(c, _unit(rng.normal(size=3)))
        best = min(best, val)
    pts = _bloch_grid(grid)
    hom = np.hstack([np.ones((len(pts), 1)), pts])
    grid_min = float(np.min(hom @ c @ hom.T) / 4.0)
    return float(min(best, grid_min))


# --- SEP(2;2) and its extension --------------------------------------------

def ppt_min_eig(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=complex)
    return float(min(linalg.eig_herm(m)[0][-1],
                     linalg.eig_herm(linalg.partial_transpose(m, (2, 2), 1))[0][-1]))


def _sep_member(m: np.ndarray) -> bool:
    # PPT is necessary and sufficient for separability of two qubits
    return ppt_min_eig(m) >= -EQ_TOL


def random_product_state(rng: np.random.Generator) -> np.ndarray:
    return np.kron(linalg.projector(random_ket(2, rng)), linalg.projector(random_ket(2, rng)))


def make_sep22() -> MatrixModel:
    return MatrixModel(
        name="sep22",
        hilbert_dims=(2, 2),
        membership_oracle=_sep_member,
        effect_min_oracle=min_over_product_states,
        pure_generator=random_product_state,
    )


def omega_bar_sigmas() -> tuple[np.ndarray, np.ndarray]:
    v1 = np.array([SQRT3, 1, 1, 1], dtype=complex) / np.sqrt(6)
    v2 = np.array([SQRT3, -1, -1, -1], dtype=complex) / np.sqrt(6)
    return np.outer(v1, v1.conj()), np.outer(v2, v2.conj())


def _omega_bar_member(m: np.ndarray, tol: float = EQ_TOL, unsure: float = 1e-6) -> bool | None:
    """Decide ``m in Hul(SEP u {sigma1, sigma2})``.

    ``m = a sigma1 + b sigma2 + (1-a-b) tau`` with ``tau`` separable; the
    largest PPT margin over the triangle ``a, b >= 0, a + b <= 1`` is a
    concave function, maximized by coarse-to-fine grid search.  Margins in
    ``(-unsure, -tol)`` are reported as undecided.
    """
    s1, s2 = omega_bar_sigmas()

    def margin(a: float, b: float) -> float:
        return ppt_min_eig(m - a * s1 - b * s2)

    best, ba, bb = margin(0.0, 0.0), 0.0, 0.0
    if best >= -tol:
        return True
    lo_a, hi_a, lo_b, hi_b = 0.0, 1.0, 0.0, 1.0
    for _ in range(40):
        for a in np.linspace(lo_a, hi_a, 11):
            for b in np.linspace(lo_b, hi_b, 11):
                if a + b > 1.0 + 1e-15:
                    continue
                val = margin(a, b)
                if val > best:
                    best, ba, bb = val, a, b
        if best >= -tol:
            return True
        wa, wb = (hi_a - lo_a) / 4, (hi_b - lo_b) / 4
        lo_a, hi_a = max(0.0, ba - wa), min(1.0, ba + wa)
        lo_b, hi_b = max(0.0, bb - wb), min(1.0, bb + wb)
        if wa < 1e-13:
            break
    if best < -unsure:
        return False
    return None


def _omega_bar_effect_min(e: np.ndarray) -> float:
    s1, s2 = omega_bar_sigmas()
    return float(min(min_over_product_states(e), linalg.hs_inner(e, s1), linalg.hs_inner(e, s2)))


def _omega_bar_pure(rng: np.random.Generator) -> np.ndarray:
    u = rng.random()
    if u < 0.1:
        return omega_bar_sigmas()[0]
    if u < 0.2:
        return omega_bar_sigmas()[1]
    return random_product_state(rng)


def make_omega_bar() -> MatrixModel:
    s1, s2 = omega_bar_sigmas()
    return MatrixModel(
        name="omega-bar",
        hilbert_dims=(2, 2),
        membership_oracle=_omega_bar_member,
        effect_min_oracle=_omega_bar_effect_min,
        pure_generator=_omega_bar_pure,
        extra_pure=(s1, s2),
    )


def get_model(name: str) -> StateSpace:
    """Look up a model by its command-line name."""
    return _build_model(name.strip().lower())


@functools.lru_cache(maxsize=None)
def _build_model(name: str) -> StateSpace:
    if name.startswith("classical:"):
        try:
            n = int(name.split(":", 1)[1])
        except ValueError:
            raise ModelError(f"bad classical size in {name!r}") from None
        return make_classical(n)
    if name.startswith("quantum:"):
        try:
            d = int(name.split(":", 1)[1])
        except ValueError:
            raise ModelError(f"bad quantum dimension in {name!r}") from None
        return make_quantum(d)
    builders = {"qubit": make_qubit, "square-bit": make_square_bit,
                "sep22": make_sep22, "omega-bar": make_omega_bar}
    if name not in builders:
        raise ModelError(f"unknown model {name!r}")
    return builders[name]()


# --- product states and SEP automorphisms ------------------------------------

@dataclass(frozen=True)
class ProductPureState:
    bloch_a: np.ndarray
    bloch_b: np.ndarray
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = np.asarray(self.bloch_a, dtype=float)
        b = np.asarray(self.bloch_b, dtype=float)
        if abs(np.linalg.norm(a) - 1) > 1e-9 or abs(np.linalg.norm(b) - 1) > 1e-9:
            raise ModelError("Bloch vectors of pure states must have unit length")
        object.__setattr__(self, "bloch_a", a)
        object.__setattr__(self, "bloch_b", b)
        object.__setattr__(self, "matrix", np.kron(linalg.bloch_to_state(a), linalg.bloch_to_state(b)))

    @classmethod
    def from_kets(cls, ka, kb) -> ProductPureState:
        return cls(linalg.state_to_bloch(linalg.projector(ka)), linalg.state_to_bloch(linalg.projector(kb)))

    @classmethod
    def random(cls, rng: np.random.Generator) -> ProductPureState:
        return cls(_unit(rng.normal(size=3)), _unit(rng.normal(size=3)))

    @property
    def local_a(self) -> np.ndarray:
        return linalg.bloch_to_state(self.bloch_a)

    @property
    def local_b(self) -> np.ndarray:
        return linalg.bloch_to_state(self.bloch_b)


def local_overlap_sum(p: ProductPureState, q: ProductPureState) -> float:
    """``Tr{pA qA} + Tr{pB qB}``."""
    return linalg.hs_inner(p.local_a, q.local_a) + linalg.hs_inner(p.local_b, q.local_b)


def sep_distinguishable(p: ProductPureState, q: ProductPureState, tol: float = 1e-12) -> bool:
    """Two pure product states are perfectly distinguishable in SEP iff the sum is at most 1."""
    return local_overlap_sum(p, q) <= 1.0 + tol


@dataclass(frozen=True)
class SepAutomorphism:
    """``A x B -> F_A(A) x F_B(B)`` (or swapped), ``F(X) = U X U^dag`` or ``U X^T U^dag``."""

    unitary_a: np.ndarray
    unitary_b: np.ndarray
    transpose_a: bool = False
    transpose_b: bool = False
    swap: bool = False
    dims: tuple[int, int] = (2, 2)

    def __post_init__(self):
        for u in (self.unitary_a, self.unitary_b):
            u = np.asarray(u)
            if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > 1e-10:
                raise ModelError("local map is not unitary")
        if self.swap and self.dims[0] != self.dims[1]:
            raise ModelError("swap requires equal local dimensions")

    @classmethod
    def identity(cls) -> SepAutomorphism:
        return cls(np.eye(2), np.eye(2))

    @classmethod
    def random(cls, rng: np.random.Generator) -> SepAutomorphism:
        flags = rng.integers(0, 2, size=3).astype(bool)
        return cls(random_unitary(2, rng), random_unitary(2, rng), *map(bool, flags))

    @property
    def operator(self) -> np.ndarray:
        u = np.kron(self.unitary_a, self.unitary_b)
        if self.swap:
            u = linalg.swap_operator(*self.dims) @ u
        return u


def apply_sep_automorphism(f: SepAutomorphism, rho) -> np.ndarray:
    rho = linalg.as_herm(rho)
    if rho.shape != (4, 4):
        raise ModelError("expected a 4x4 matrix")
    if f.transpose_a:
        rho = linalg.partial_transpose(rho, f.dims, 0)
    if f.transpose_b:
        rho = linalg.partial_transpose(rho, f.dims, 1)
    u = f.operator
    return u @ rho @ u.conj().T


def apply_sep_automorphisms_batch(fs: list[SepAutomorphism], rhos: np.ndarray) -> np.ndarray:
    """Apply every automorphism to every matrix; result shape ``(len(fs), len(rhos), 4, 4)``."""
    rhos = np.asarray(rhos, dtype=complex)
    out = np.empty((len(fs),) + rhos.shape, dtype=complex)
    t = rhos.reshape(-1, 2, 2, 2, 2)
    for i, f in enumerate(fs):
        x = t
        if f.transpose_a:
            x = x.transpose(0, 3, 2, 1, 4)
        if f.transpose_b:
            x = x.transpose(0, 1, 4, 3, 2)
        x = x.reshape(rhos.shape)
        u = f.operator
        out[i] = u @ x @ u.conj().T
    return out


def local_unitary_between(ket_from, ket_to) -> np.ndarray:
    """A 2x2 unitary mapping ``ket_from`` to ``ket_to`` (up to phase)."""
    a = np.asarray(ket_from, dtype=complex)
    b = np.asarray(ket_to, dtype=complex)
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    a_perp = np.array([-a[1].conjugate(), a[0].conjugate()])
    b_perp = np.array([-b[1].conjugate(), b[0].conjugate()])
    return np.outer(b, a.conj()) + np.outer(b_perp, a_perp.conj())


def bloch_to_ket(r) -> np.ndarray:
    vals, vecs = linalg.eig_herm(linalg.bloch_to_state(r))
    return vecs[:, 0]


def asymmetric_quadruple() -> dict[str, ProductPureState]:
    """The quadruple used to show SEP(2;2) is not 2-symmetric."""
    return {
        "rho1": ProductPureState.from_kets(KET0, KET0),
        "rho2": ProductPureState.from_kets(KETP, KETP),
        "sigma1": ProductPureState.from_kets(KET0, KET0),
        "sigma2": ProductPureState.from_kets(KET1, KET1),
    }


def verify_not_2_symmetric(states: dict[str, ProductPureState] | None = None,
                           n_automorphisms: int = 100, seed: int = 0,
                           tol: float = 1e-12) -> dict:
    """Check that no SEP automorphism maps the pair ``{rho1, rho2}`` onto ``{sigma1, sigma2}``.

    Every automorphism preserves ``Tr{XY}`` on product states, so differing
    traces rule such a map out.
    """
    st = states or asymmetric_quadruple()
    r1, r2, s1, s2 = (st[k] for k in ("rho1", "rho2", "sigma1", "sigma2"))
    tr_rho = linalg.hs_inner(r1.matrix, r2.matrix)
    tr_sigma = linalg.hs_inner(s1.matrix, s2.matrix)
    rng = np.random.default_rng(seed)
    fs = [SepAutomorphism.random(rng) for _ in range(n_automorphisms)]
    mapped = apply_sep_automorphisms_batch(fs, np.array([r1.matrix, r2.matrix]))
    inv_err = float(np.max(np.abs(np.einsum("fij,fji->f", mapped[:, 0], mapped[:, 1]).real - tr_rho)))
    dist_rho = sep_distinguishable(r1, r2)
    dist_sigma = sep_distinguishable(s1, s2)
    gap = abs(tr_rho - tr_sigma)
    ok = dist_rho and dist_sigma and inv_err <= 1e-10
    verdict = "NotTwoSymmetric" if ok and gap > tol else "Inconclusive"
    return {
        "verdict": verdict,
        "tr_rho": tr_rho,
        "tr_sigma": tr_sigma,
        "gap": gap,
        "overlap_sum_rho": local_overlap_sum(r1, r2),
        "overlap_sum_sigma": local_overlap_sum(s1, s2),
        "rho_distinguishable": dist_rho,
        "sigma_distinguishable": dist_sigma,
        "invariance_max_error": inv_err,
        "n_automorphisms": n_automorphisms,
    }


def one_symmetry_map(p: ProductPureState, q: ProductPureState) -> SepAutomorphism:
    """Local unitaries taking the pure product state ``p`` to ``q``."""
    ua = local_unitary_between(bloch_to_ket(p.bloch_a), bloch_to_ket(q.bloch_a))
    ub = local_unitary_between(bloch_to_ket(p.bloch_b), bloch_to_ket(q.bloch_b))
    return SepAutomorphism(ua, ub)


# --- the extended space ------------------------------------------------------

E1 = 0.5 * np.array([[2, 0, 0, -1], [0, 0, -1, 0], [0, -1, 0, 0], [-1, 0, 0, 2]], dtype=complex)
E2 = 0.5 * np.array([[0, 0, 0, 1], [0, 2, 1, 0], [0, 1, 2, 0], [1, 0, 0, 0]], dtype=complex)


@dataclass(frozen=True)
class OmegaBarFixture:
    rho1: np.ndarray
    rho2: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    rho_mix: np.ndarray
    decomp_q: PDPDecomposition
    decomp_p: PDPDecomposition

    def check(self, tol: float = 1e-12) -> dict[str, float]:
        """Evaluate every fixture invariant; raises ``ModelError`` on failure."""
        q = self.decomp_q.probs
        p = self.decomp_p.probs
        via_rho = q[0] * self.rho1 + q[1] * self.rho2
        via_sigma = p[0] * self.sigma1 + p[1] * self.sigma2
        r = {
            "unit_residual": float(np.max(np.abs(self.e1 + self.e2 - np.eye(4)))),
            "discrimination_residual": max(
                abs(linalg.hs_inner(e, s) - float(i == j))
                for i, e in enumerate((self.e1, self.e2))
                for j, s in enumerate((self.rho1, self.rho2))),
            "sigma_overlap": abs(linalg.hs_inner(self.sigma1, self.sigma2)),
            "mix_residual_q": float(np.max(np.abs(via_rho - self.rho_mix))),
            "mix_residual_p": float(np.max(np.abs(via_sigma - self.rho_mix))),
        }
        bad = {k: v for k, v in r.items() if v > tol}
        if bad:
            raise ModelError(f"fixture invariants failed: {bad}")
        return r

    def to_json(self) -> dict:
        def mat(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]
        return {
            "rho1": mat(self.rho1), "rho2": mat(self.rho2),
            "sigma1": mat(self.sigma1), "sigma2": mat(self.sigma2),
            "E1": mat(self.e1), "E2": mat(self.e2), "rho_mix": mat(self.rho_mix),
            "decomp_q": [float(x) for x in self.decomp_q.probs],
            "decomp_p": [float(x) for x in self.decomp_p.probs],
        }


@functools.lru_cache(maxsize=1)
def load_omega_bar() -> tuple[MatrixModel, OmegaBarFixture]:
    space = get_model("omega-bar")
    rho1 = np.kron(linalg.projector(KET0), linalg.projector(KET0))
    rho2 = np.kron(linalg.projector(KETP), linalg.projector(KETP))
    s1, s2 = omega_bar_sigmas()
    rho_mix = rho1 / 3 + 2 * rho2 / 3
    wit_q = Measurement((space.effect_from_matrix(E1), space.effect_from_matrix(E2)))
    wit_p = Measurement((space.effect_from_matrix(s1), space.effect_from_matrix(np.eye(4) - s1)))
    q = np.array([1 / 3, 2 / 3])
    p = np.array([(3 + SQRT3) / 6, (3 - SQRT3) / 6])
    decomp_q = PDPDecomposition(q, (space.state_from_matrix(rho1, check=False),
                                    space.state_from_matrix(rho2, check=False)), wit_q)
    decomp_p = PDPDecomposition(p, (space.state_from_matrix(s1, check=False),
                                    space.state_from_matrix(s2, check=False)), wit_p)
    fx = OmegaBarFixture(rho1, rho2, s1, s2, E1.copy(), E2.copy(), rho_mix, decomp_q, decomp_p)
    fx.check()
    return space, fx


def extended_measurement_validity(fx: OmegaBarFixture | None = None) -> dict:
    """Numbers behind the claim that ``{E1, E2}`` is a measurement on the extended space."""
    if fx is None:
        fx = load_omega_bar()[1]
    out = {}
    for name, e in (("E1", fx.e1), ("E2", fx.e2)):
        out[name] = {
            "min_eig": float(linalg.eig_herm(e)[0][-1]),
            "min_product": min_over_product_states(e),
            "on_sigma1": linalg.hs_inner(e, fx.sigma1),
            "on_sigma2": linalg.hs_inner(e, fx.sigma2),
        }
    out["unit_residual"] = float(np.max(np.abs(fx.e1 + fx.e2 - np.eye(4))))
    return out


def effect_is_valid_on_omega_bar(e, product_tol: float = 1e-6, sigma_tol: float = 1e-9) -> bool:
    s1, s2 = omega_bar_sigmas()
    return (min_over_product_states(e) >= -product_tol
            and linalg.hs_inner(e, s1) >= -sigma_tol
            and linalg.hs_inner(e, s2) >= -sigma_tol)


def witness_effects(space: MatrixModel, mats) -> Measurement:
    return Measurement(tuple(Effect(space.to_coords(m)) for m in mats))
