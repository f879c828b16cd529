"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from mpmath import log, mp, mpf

from conftest import ACCEPTANCE_LINES
from gptengine import linalg, models, suites, thermo

S3 = math.sqrt(3)


def report(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def mp_entropy(probs) -> float:
    with mp.workdps(40):
        return float(-sum(p * log(p) for p in probs))


def mp_probs_q():
    with mp.workdps(40):
        return [mpf(1) / 3, mpf(2) / 3]


def mp_probs_p():
    with mp.workdps(40):
        s = mp.sqrt(3)
        return [(3 + s) / 6, (3 - s) / 6]


@pytest.fixture(scope="module")
def first_reports():
    return {}


def test_c1_fixture_reproduction():
    t0 = time.perf_counter()
    models.load_omega_bar.cache_clear()
    _, fx = models.load_omega_bar()
    inv = fx.check(tol=1e-12)
    hq, hp = fx.decomp_q.entropy, fx.decomp_p.entropy
    ds = thermo.DecompositionSet(fx.decomp_q.target, (fx.decomp_q, fx.decomp_p))
    verdict = thermo.check_entropy_uniqueness(ds)
    elapsed = time.perf_counter() - t0
    ref_q, ref_p = mp_entropy(mp_probs_q()), mp_entropy(mp_probs_p())
    agree = max(inv["mix_residual_q"], inv["mix_residual_p"])
    ok = (agree <= 1e-12 and abs(hq - ref_q) <= 1e-6 and abs(hp - ref_p) <= 1e-6
          and abs(hq - 0.636514) <= 1e-6 and verdict.kind == "NonUnique" and elapsed < 1.0)
    report(1, "fixture reproduction", ok,
           f"combination gap {agree:.1e}, H(q)={hq:.6f} (ref {ref_q:.6f}), H(p)={hp:.6f} "
           f"(ref {ref_p:.6f}), "
           f"{verdict.kind}, {elapsed:.3f} s")


def test_c2_measurement_validity():
    t0 = time.perf_counter()
    _, fx = models.load_omega_bar()
    unit_exact = np.array_equal(fx.e1 + fx.e2, np.eye(4))
    table = np.array([[linalg.hs_inner(e, r) for r in (fx.rho1, fx.rho2)] for e in (fx.e1, fx.e2)])
    disc = float(np.max(np.abs(table - np.eye(2))))
    min_eigs = [float(linalg.eig_herm(e)[0][-1]) for e in (fx.e1, fx.e2)]
    min_prod = [models.min_over_product_states(e) for e in (fx.e1, fx.e2)]
    on_sigma = [linalg.hs_inner(e, s) for e in (fx.e1, fx.e2) for s in (fx.sigma1, fx.sigma2)]
    elapsed = time.perf_counter() - t0
    ok = (unit_exact and disc <= 1e-12 and all(v < 0 for v in min_eigs)
          and all(v >= -1e-6 for v in min_prod) and all(v >= -1e-9 for v in on_sigma) and elapsed < 30)
    report(2, "measurement validity", ok,
           f"E1+E2=I exact {unit_exact}, discrimination err {disc:.1e}, min eig {min_eigs}, "
           f"min product {min(min_prod):.2e}, min on sigma {min(on_sigma):.4f}, {elapsed:.2f} s")


def test_c3_not_two_symmetric(first_reports):
    t0 = time.perf_counter()
    st = models.asymmetric_quadruple()
    tr_r = linalg.hs_inner(st["rho1"].matrix, st["rho2"].matrix)
    tr_s = linalg.hs_inner(st["sigma1"].matrix, st["sigma2"].matrix)
    l_r = models.local_overlap_sum(st["rho1"], st["rho2"])
    l_s = models.local_overlap_sum(st["sigma1"], st["sigma2"])
    verdict = models.verify_not_2_symmetric(st)["verdict"]
    err = suites.automorphism_invariance_error(seed=0, pairs=1000, automorphisms=100)
    elapsed = time.perf_counter() - t0
    ok = (abs(tr_r - 0.25) <= 1e-12 and abs(tr_s) <= 1e-12 and abs(l_r - 1) <= 1e-12 and abs(l_s) <= 1e-12
          and verdict == "NotTwoSymmetric" and err <= 1e-10 and elapsed < 30)
    report(3, "two-symmetry failure", ok,
           f"traces ({tr_r:.12f}, {tr_s:.1e}), sums ({l_r:.12f}, {l_s:.1e}), {verdict}, "
           f"invariance err {err:.1e} over 100000 samples, {elapsed:.2f} s")
    first_reports["appendix-b"] = suites.verify_sep_asymmetry(seed=0)


def test_c4_unique_entropy_models(first_reports):
    rep = suites.verify_entropy_uniqueness(trials=1000, seed=0)
    first_reports["theorem1"] = rep
    checks = {c.name: c for c in rep.verdicts}
    counts = checks["never_nonunique"].measured
    center = checks["square_bit_center"].measured
    report(4, "entropy uniqueness", rep.passed,
           f"verdicts {counts} over {rep.params['trials']} states, square-bit center "
           f"{center['n_decompositions']} decompositions with entropies {center['entropies']}")


def test_c5_cycle_ledger():
    q = models.get_model("qubit")
    s = 1 / math.sqrt(2)
    dz = thermo.pdp_from_basis(np.eye(2) / 2, [[1, 0], [0, 1]], q)
    dx = thermo.pdp_from_basis(np.eye(2) / 2, [[s, s], [s, -s]], q)
    neutral = thermo.cycle_delta_work(dz, dx).delta_W
    _, fx = models.load_omega_bar()
    n, t = 2.0, 0.75
    dw = thermo.cycle_delta_work(fx.decomp_q, fx.decomp_p, N=n, T=t).delta_W
    ref = (mp_entropy(mp_probs_p()) - mp_entropy(mp_probs_q())) * n * t
    ok = abs(neutral) <= 1e-12 and abs(dw - ref) <= 1e-5 and dw < 0
    report(5, "cycle ledger", ok,
           f"qubit Z/X delta_W {neutral:.1e}; extended-space delta_W/(N kT) = {dw / (n * t):.6f} "
           f"(recomputed {ref / (n * t):.6f})")


def test_c6_refinement_strictness(first_reports):
    rep = suites.verify_pure_refinement(trials=200, seed=0)
    first_reports["lemma1"] = rep
    m = {c.name: c.measured for c in rep.verdicts}
    report(6, "refinement strictness", rep.passed,
           f"t majorizes s {m['refinement_majorizes']['count']}/200, s fails to majorize t "
           f"{m['strictness']['count']}/200, pure outputs {m['refined_outputs_pure']['count']}/200")


def test_c7_information_gain_monotonicity(first_reports):
    rep = suites.verify_info_gain_monotonicity(trials=1000, seed=0)
    first_reports["theorem3"] = rep
    m = {c.name: c.measured for c in rep.verdicts}
    report(7, "information gain monotonicity", rep.passed,
           f"holds {m['holds_every_trial']['holds']}/1000, min slack {m['min_slack']:.2e}, "
           f"identity-kernel gap {m['identity_kernel_equality']:.1e}")


def test_c8_concavity(first_reports):
    rep = suites.verify_concavity(trials=1000, seed=0)
    first_reports["theorem2"] = rep
    report(8, "entropy concavity", rep.passed,
           f"min slack {rep.verdicts[0].measured['min_slack']:.2e} over 1000 qubit pairs")


def test_c9_determinism(first_reports):
    first_reports.setdefault("appendix-c", suites.verify_extended_fixture(seed=0))
    runs = {
        "appendix-b": lambda: suites.verify_sep_asymmetry(seed=0),
        "appendix-c": lambda: suites.verify_extended_fixture(seed=0),
        "theorem1": lambda: suites.verify_entropy_uniqueness(trials=1000, seed=0),
        "lemma1": lambda: suites.verify_pure_refinement(trials=200, seed=0),
        "theorem3": lambda: suites.verify_info_gain_monotonicity(trials=1000, seed=0),
        "theorem2": lambda: suites.verify_concavity(trials=1000, seed=0),
    }
    same = {}
    for name, fn in runs.items():
        first = first_reports.get(name) or fn()
        same[name] = first.dumps(with_runtime=False) == fn().dumps(with_runtime=False)
    report(9, "determinism", all(same.values()), f"identical JSON on rerun: {same}")
