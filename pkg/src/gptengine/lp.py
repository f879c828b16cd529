"""Dense two-phase simplex with Bland's rule.

Programs are small (at most a couple of thousand variables), so a dense
tableau is simple and returns exact vertex solutions.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
COST_TOL = 1e-12
MAX_ITER = 50_000


class LPStatus(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NO_CONVERGENCE = "no_convergence"


@dataclass(frozen=True)
class LinearProgram:
    """``min c.x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub`` and bounds.

    ``bounds`` is a ``(n, 2)`` array of lower/upper limits (``-inf``/``inf``
    allowed); the default is ``x >= 0``.
    """

    a_eq: np.ndarray
    b_eq: np.ndarray
    objective: np.ndarray | None = None
    bounds: np.ndarray | None = None
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a_eq, dtype=float))
        b = np.atleast_1d(np.asarray(self.b_eq, dtype=float))
        if a.size == 0:
            n = 0 if self.objective is None else len(self.objective)
            if self.a_ub is not None:
                n = np.atleast_2d(self.a_ub).shape[1]
            a = np.zeros((0, n))
            b = np.zeros(0)
        n = a.shape[1]
        if a.shape[0] != b.shape[0]:
            raise ValueError("A_eq and b_eq have inconsistent shapes")
        c = np.zeros(n) if self.objective is None else np.asarray(self.objective, dtype=float)
        if c.shape != (n,):
            raise ValueError("objective length does not match the number of variables")
        if self.bounds is None:
            bnd = np.column_stack([np.zeros(n), np.full(n, np.inf)])
        else:
            bnd = np.asarray(self.bounds, dtype=float).reshape(n, 2)
        if np.any(bnd[:, 0] > bnd[:, 1]):
            raise ValueError("lower bound exceeds upper bound")
        if self.a_ub is None:
            aub, bub = np.zeros((0, n)), np.zeros(0)
        else:
            aub = np.atleast_2d(np.asarray(self.a_ub, dtype=float))
            bub = np.atleast_1d(np.asarray(self.b_ub, dtype=float))
            if aub.shape != (bub.shape[0], n):
                raise ValueError("A_ub and b_ub have inconsistent shapes")
        for arr in (a, b, c, aub, bub):
            if not np.all(np.isfinite(arr)):
                raise ValueError("program entries must be finite")
        object.__setattr__(self, "a_eq", a)
        object.__setattr__(self, "b_eq", b)
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "bounds", bnd)
        object.__setattr__(self, "a_ub", aub)
        object.__setattr__(self, "b_ub", bub)

    @property
    def n_vars(self) -> int:
        return self.a_eq.shape[1]

    def standard_form(self) -> StandardForm:
        """Rewrite as ``min c.z, A z = b, z >= 0`` with a map back to ``x``."""
        n = self.n_vars
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        # x = shift + T z
        cols: list[np.ndarray] = []
        shift = np.zeros(n)
        upper_rows: list[tuple[int, float]] = []
        for i in range(n):
            e = np.zeros(n)
            if np.isfinite(lo[i]):
                shift[i] = lo[i]
                e[i] = 1.0
                cols.append(e)
                if np.isfinite(hi[i]):
                    upper_rows.append((len(cols) - 1, hi[i] - lo[i]))
            elif np.isfinite(hi[i]):
                shift[i] = hi[i]
                e[i] = -1.0
                cols.append(e)
            else:
                e[i] = 1.0
                cols.append(e)
                cols.append(-e)
        t = np.column_stack(cols) if cols else np.zeros((n, 0))
        nz = t.shape[1]
        n_ub = self.a_ub.shape[0]
        n_up = len(upper_rows)
        total = nz + n_ub + n_up
        rows_a, rows_b = [], []
        if self.a_eq.shape[0]:
            blk = np.zeros((self.a_eq.shape[0], total))
            blk[:, :nz] = self.a_eq @ t
            rows_a.append(blk)
            rows_b.append(self.b_eq - self.a_eq @ shift)
        if n_ub:
            blk = np.zeros((n_ub, total))
            blk[:, :nz] = self.a_ub @ t
            blk[:, nz:nz + n_ub] = np.eye(n_ub)
            rows_a.append(blk)
            rows_b.append(self.b_ub - self.a_ub @ shift)
        if n_up:
            blk = np.zeros((n_up, total))
            for r, (col, width) in enumerate(upper_rows):
                blk[r, col] = 1.0
                blk[r, nz + n_ub + r] = 1.0
            rows_a.append(blk)
            rows_b.append(np.array([w for _, w in upper_rows]))
        a = np.vstack(rows_a) if rows_a else np.zeros((0, total))
        b = np.concatenate(rows_b) if rows_b else np.zeros(0)
        c = np.zeros(total)
        c[:nz] = self.objective @ t
        return StandardForm(a=a, b=b, c=c, transform=t, shift=shift,
                            const=float(self.objective @ shift))

    def residuals(self, x: np.ndarray) -> float:
        """Largest violation of any constraint or bound at ``x``."""
        x = np.asarray(x, dtype=float)
        viol = [0.0]
        if self.a_eq.shape[0]:
            viol.append(np.max(np.abs(self.a_eq @ x - self.b_eq)))
        if self.a_ub.shape[0]:
            viol.append(np.max(self.a_ub @ x - self.b_ub))
        viol.append(np.max(self.bounds[:, 0] - x, initial=0.0))
        viol.append(np.max(x - self.bounds[:, 1], initial=0.0))
        return float(max(viol))


@dataclass(frozen=True)
class StandardForm:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    transform: np.ndarray
    shift: np.ndarray
    const: float

    def recover(self, z: np.ndarray) -> np.ndarray:
        return self.shift + self.transform @ z[: self.transform.shape[1]]


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    x: np.ndarray | None = None
    objective: float | None = None
    certificate: np.ndarray | None = None
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status is LPStatus.FEASIBLE


class _Tableau:
    """Row-reduced tableau ``[A | b]`` with an explicit basis list."""

    def __init__(self, a: np.ndarray, b: np.ndarray, basis: list[int]):
        self.t = np.hstack([a, b[:, None]])
        self.basis = basis

    @property
    def rhs(self) -> np.ndarray:
        return self.t[:, -1]

    def pivot(self, r: int, col: int) -> None:
        t = self.t
        t[r] /= t[r, col]
        f = t[:, col].copy()
        f[r] = 0.0
        t -= np.outer(f, t[r])
        t[np.abs(t) < 1e-15] = 0.0
        self.basis[r] = col

    def reduced_costs(self, c: np.ndarray) -> np.ndarray:
        cb = c[self.basis]
        return c - cb @ self.t[:, :-1]

    def run(self, c: np.ndarray, allowed: np.ndarray, max_iter: int) -> tuple[str, int]:
        """Bland's-rule primal simplex; returns (outcome, iterations)."""
        for it in range(max_iter):
            d = self.reduced_costs(c)
            cand = np.flatnonzero((d < -COST_TOL) & allowed)
            if cand.size == 0:
                return "optimal", it
            col = int(cand[0])
            colv = self.t[:, col]
            rows = np.flatnonzero(colv > PIVOT_TOL)
            if rows.size == 0:
                return "unbounded", it
            ratios = self.rhs[rows] / colv[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-13 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug("pivot row %d col %d\n%s", r, col, np.array2string(self.t, precision=4))
            self.pivot(r, col)
        return "cap", max_iter


def solve(p: LinearProgram, feas_tol: float = FEAS_TOL, max_iter: int = MAX_ITER) -> LPResult:
    """Two-phase simplex. ``Feasible`` iff the phase-1 optimum is ``<= feas_tol``."""
    sf = p.standard_form()
    a, b, c = sf.a.copy(), sf.b.copy(), sf.c
    m, n = a.shape
    if m == 0:
        if np.any(c < -COST_TOL):
            return LPResult(LPStatus.UNBOUNDED)
        z = np.zeros(n)
        x = sf.recover(z)
        return LPResult(LPStatus.FEASIBLE, x=x, objective=float(p.objective @ x))

    sign = np.where(b < 0, -1.0, 1.0)
    scale = np.max(np.abs(a), axis=1)
    scale[scale == 0] = 1.0
    row_mul = sign / scale
    a *= row_mul[:, None]
    b *= row_mul

    tab = _Tableau(np.hstack([a, np.eye(m)]), b, list(range(n, n + m)))
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    allowed = np.ones(n + m, dtype=bool)
    outcome, it1 = tab.run(c1, allowed, max_iter)
    if outcome == "cap":
        return LPResult(LPStatus.NO_CONVERGENCE, iterations=it1)
    phase1 = float(tab.rhs[np.array(tab.basis) >= n].sum())
    if phase1 > feas_tol:
        # phase-1 duals y satisfy A^T y <= 0 (reduced costs >= 0) and b.y = phase1 > 0
        y_scaled = 1.0 - tab.reduced_costs(c1)[n:]
        cert = y_scaled * row_mul
        return LPResult(LPStatus.INFEASIBLE, certificate=cert, iterations=it1,
                        info={"phase1": phase1})

    # drive zero-level artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if tab.basis[r] < n:
            keep.append(r)
            continue
        row = tab.t[r, :n]
        cols = np.flatnonzero(np.abs(row) > 1e-9)
        if cols.size:
            tab.pivot(r, int(cols[0]))
            keep.append(r)
    tab.t = tab.t[keep]
    tab.basis = [tab.basis[r] for r in keep]

    allowed = np.concatenate([np.ones(n, dtype=bool), np.zeros(m, dtype=bool)])
    c2 = np.concatenate([c, np.zeros(m)])
    outcome, it2 = tab.run(c2, allowed, max_iter - it1)
    if outcome == "cap":
        return LPResult(LPStatus.NO_CONVERGENCE, iterations=it1 + it2)
    if outcome == "unbounded":
        return LPResult(LPStatus.UNBOUNDED, iterations=it1 + it2)

    z = np.zeros(n + m)
    z[tab.basis] = tab.rhs
    z = _polish(sf.a, sf.b, z[:n], [j for j in tab.basis if j < n])
    x = sf.recover(z)
    return LPResult(LPStatus.FEASIBLE, x=x, objective=float(p.objective @ x),
                    iterations=it1 + it2, info={"basis": sorted(j for j in tab.basis if j < n)})


def _polish(a: np.ndarray, b: np.ndarray, z: np.ndarray, basis: list[int]) -> np.ndarray:
    """Re-solve the basic variables against the unscaled system to tighten residuals."""
    if basis:
        zb, *_ = np.linalg.lstsq(a[:, basis], b, rcond=None)
        out = np.zeros_like(z)
        out[basis] = zb
        if np.max(np.abs(a @ out - b)) <= np.max(np.abs(a @ z - b)):
            z = out
    return np.where((z < 0) & (z > -FEAS_TOL), 0.0, z)


def feasible_point(a_eq, b_eq, bounds=None, a_ub=None, b_ub=None,
                   feas_tol: float = FEAS_TOL) -> np.ndarray | None:
    """Convenience wrapper returning a feasible ``x`` or ``None``."""
    res = solve(LinearProgram(a_eq, b_eq, bounds=bounds, a_ub=a_ub, b_ub=b_ub), feas_tol=feas_tol)
    return res.x if res.feasible else None
