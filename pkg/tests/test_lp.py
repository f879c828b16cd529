from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from gptengine.lp import LinearProgram, LPStatus, feasible_point, solve

seeds = st.integers(0, 2**32 - 1)


def test_simple_feasible_minimum():
    res = solve(LinearProgram([[1, 1]], [1], objective=[1, 0]))
    assert res.status is LPStatus.FEASIBLE
    assert np.allclose(res.x, [0, 1])
    assert res.objective == pytest.approx(0.0)


def test_infeasible_program_carries_farkas_certificate():
    p = LinearProgram([[1, 1], [1, 1]], [1, 2])
    res = solve(p)
    assert res.status is LPStatus.INFEASIBLE
    sf = p.standard_form()
    y = res.certificate
    assert np.all(y @ sf.a <= 1e-9)
    assert y @ sf.b > 1e-9


def test_unbounded_is_distinct_from_infeasible():
    res = solve(LinearProgram(np.zeros((0, 2)), [], objective=[-1, 0]))
    assert res.status is LPStatus.UNBOUNDED


def test_free_and_boxed_variables():
    bounds = [[-np.inf, np.inf], [0.0, 0.25]]
    res = solve(LinearProgram([[1, 1]], [-2], objective=[0, -1], bounds=bounds))
    assert res.feasible
    assert np.allclose(res.x, [-2.25, 0.25])


def test_inequality_rows():
    x = feasible_point(np.zeros((0, 2)), [], a_ub=[[1, 1]], b_ub=[-1],
                       bounds=[[-np.inf, np.inf], [-np.inf, np.inf]])
    assert x is not None and x.sum() <= -1 + 1e-9
    assert feasible_point(np.zeros((0, 1)), [], a_ub=[[1]], b_ub=[-1]) is None


def test_malformed_programs_raise():
    with pytest.raises(ValueError):
        LinearProgram([[1, 1]], [1, 2])
    with pytest.raises(ValueError):
        LinearProgram([[1, np.nan]], [1])
    with pytest.raises(ValueError):
        LinearProgram([[1]], [1], bounds=[[2, 1]])


def _random_program(seed: int):
    g = np.random.default_rng(seed)
    m, n = int(g.integers(1, 5)), int(g.integers(2, 7))
    a = g.integers(-3, 4, size=(m, n)).astype(float)
    if g.random() < 0.5:
        b = a @ g.uniform(0, 2, size=n)  # feasible by construction
    else:
        b = g.integers(-3, 4, size=m).astype(float)
    c = g.integers(-2, 3, size=n).astype(float)
    return a, b, c


@given(seeds)
def test_agrees_with_reference_solver(seed):
    a, b, c = _random_program(seed)
    ours = solve(LinearProgram(a, b, objective=c, bounds=np.tile([0.0, 5.0], (len(c), 1))))
    ref = linprog(c, A_eq=a, b_eq=b, bounds=[(0, 5)] * len(c), method="highs")
    assert ours.feasible == (ref.status == 0)
    if ref.status == 0:
        assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
        assert LinearProgram(a, b, bounds=np.tile([0.0, 5.0], (len(c), 1))).residuals(ours.x) <= 1e-8


@given(seeds)
def test_feasibility_invariant_under_row_and_column_permutation(seed):
    a, b, c = _random_program(seed)
    g = np.random.default_rng(seed + 1)
    rows, cols = g.permutation(a.shape[0]), g.permutation(a.shape[1])
    r1 = solve(LinearProgram(a, b, objective=c, bounds=np.tile([0.0, 5.0], (len(c), 1))))
    r2 = solve(LinearProgram(a[rows][:, cols], b[rows], objective=c[cols],
                             bounds=np.tile([0.0, 5.0], (len(c), 1))))
    assert r1.status == r2.status
    if r1.feasible:
        assert r1.objective == pytest.approx(r2.objective, abs=1e-7)


@given(seeds)
def test_certificate_or_point_always_verifies(seed):
    a, b, _ = _random_program(seed)
    p = LinearProgram(a, b)
    res = solve(p)
    if res.feasible:
        assert p.residuals(res.x) <= 1e-8
    else:
        sf = p.standard_form()
        y = res.certificate
        assert np.all(y @ sf.a <= 1e-8) and y @ sf.b > 1e-9
