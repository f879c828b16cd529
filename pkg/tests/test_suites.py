from __future__ import annotations

import json

import pytest

from gptengine import cli, suites
from gptengine.core import ModelError


def test_failed_check_keeps_measurement_and_threshold():
    rep = suites.Report("verify demo", seed=1)
    rep.add("ok", True, 0.5, 1.0)
    rep.add("bad", False, -3e-9, -1e-9)
    assert not rep.passed and rep.exit_code == 1
    data = json.loads(rep.dumps())
    bad = data["verdicts"][1]
    assert bad == {"name": "bad", "passed": False, "measured": -3e-9, "tolerance": -1e-9}
    assert "runtime_ms" not in rep.to_json(with_runtime=False)
    assert "[FAIL] bad" in rep.summary()


def test_unknown_suite():
    with pytest.raises(ModelError):
        suites.run_suite("lemma9")


def test_violation_maps_to_exit_code_1(monkeypatch, capsys):
    failing = suites.Report("verify theorem2", seed=0)
    failing.add("concavity", False, {"min_slack": -1.0}, -1e-9)
    monkeypatch.setattr(suites, "run_suite", lambda *a, **k: failing)
    assert cli.main(["verify", "theorem2"]) == 1
    out, err = capsys.readouterr()
    assert json.loads(out)["passed"] is False
    assert "FAIL" in err


def test_small_suites_pass_on_other_seeds():
    for seed in (1, 2):
        assert suites.verify_pure_refinement(trials=10, seed=seed).passed
        assert suites.verify_entropy_uniqueness(trials=30, seed=seed).passed
        assert suites.verify_info_gain_monotonicity(trials=30, seed=seed).passed
