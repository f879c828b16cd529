"""Small dense Hermitian-matrix helpers and the Hermitian coordinate basis."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

HERM_TOL = 1e-10
IMAG_TOL = 1e-12


def as_herm(a, tol: float = HERM_TOL) -> np.ndarray:
    """Return ``a`` as a complex square array, raising if it is not Hermitian."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
        raise ValueError("matrix is not Hermitian")
    return m


def hs_inner(a, b) -> float:
    """Hilbert-Schmidt inner product ``Tr{AB}`` of two Hermitian matrices."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    val = np.einsum("ij,ji->", a, b)
    if abs(val.imag) > IMAG_TOL * max(1.0, abs(val.real)):
        raise ValueError(f"Tr{{AB}} has imaginary part {val.imag:.3e}")
    return float(val.real)


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def eig_herm(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching eigenvector columns.

    ``numpy.linalg.eigh`` raises ``LinAlgError`` when LAPACK fails to
    converge; the error is propagated unchanged.
    """
    m = as_herm(a)
    m = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(m)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def reconstruct(vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    return (vecs * vals) @ vecs.conj().T


def projector(ket) -> np.ndarray:
    v = np.asarray(ket, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def psd_power(a, power: float, cutoff: float = 1e-14) -> np.ndarray:
    """``A**power`` for positive semidefinite ``A``; eigenvalues below ``cutoff`` map to 0."""
    vals, vecs = eig_herm(a)
    out = np.zeros_like(vals)
    keep = vals > cutoff
    out[keep] = vals[keep] ** power
    return reconstruct(out, vecs)


@lru_cache(maxsize=None)
def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal Hermitian basis of shape ``(d*d, d, d)``.

    Element 0 is ``I/sqrt(d)``; the rest are the traceless generalized
    Gell-Mann matrices (symmetric, antisymmetric, diagonal), each scaled to
    unit Hilbert-Schmidt norm.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for k in range(1, d):
        for j in range(k):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            basis.append(m / np.sqrt(2))
    for k in range(1, d):
        for j in range(k):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            basis.append(m / np.sqrt(2))
    for ell in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[np.arange(ell), np.arange(ell)] = 1.0
        m[ell, ell] = -float(ell)
        basis.append(m / np.sqrt(ell * (ell + 1)))
    out = np.stack(basis)
    out.setflags(write=False)
    return out


def to_coords(m) -> np.ndarray:
    """Real coordinates ``x_i = Tr{B_i M}`` of a Hermitian matrix (or a stack of them)."""
    arr = np.asarray(m, dtype=complex)
    basis = hermitian_basis(arr.shape[-1])
    vec = np.einsum("...ij,kji->...k", arr, basis)
    return vec.real.copy()


def from_coords(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = int(round(np.sqrt(x.shape[-1])))
    if d * d != x.shape[-1]:
        raise ValueError(f"coordinate length {x.shape[-1]} is not a square")
    return np.einsum("...k,kij->...ij", x, hermitian_basis(d))


def partial_transpose(m, dims: tuple[int, int], sys: int) -> np.ndarray:
    """Partial transpose of a bipartite matrix on subsystem ``sys`` (0 or 1)."""
    da, db = dims
    t = np.asarray(m).reshape(da, db, da, db)
    if sys == 0:
        t = t.transpose(2, 1, 0, 3)
    elif sys == 1:
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError("sys must be 0 or 1")
    return t.reshape(da * db, da * db)


def swap_operator(da: int, db: int) -> np.ndarray:
    s = np.zeros((da * db, da * db))
    for i in range(da):
        for j in range(db):
            s[j * da + i, i * db + j] = 1.0
    return s


PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def bloch_to_state(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return 0.5 * (PAULI[0] + np.einsum("i,ijk->jk", r, PAULI[1:]))


def state_to_bloch(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(rho @ p).real for p in PAULI[1:]])
