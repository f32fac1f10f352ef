import math

import numpy as np
import pytest

import fnls


def test_default_config_sections():
    cfg = fnls.default_config()
    assert cfg["problem"]["dim"] == 1
    assert cfg["constants"]["M"] == 2
    assert cfg["driver"]["j_max"] == 6


def test_zero_forcing_stops_at_once():
    report, solution = fnls.solve({"problem": {"forcing": "zero"}})
    assert report["converged"]
    assert report["advances"] == 0
    assert report["final_residual"] == 0.0
    assert solution["solutions"][0]["u"]["entries"] == []


def test_unknown_key_is_rejected():
    with pytest.raises(fnls.ConfigError, match="problem.bogus"):
        fnls.solve({"problem": {"bogus": 1}})


def test_override_type_error():
    with pytest.raises(fnls.ConfigError, match="problem.epsilon"):
        fnls.solve(None, ["problem.epsilon=abc"])


def test_bundled_run_verifies():
    report, solution = fnls.solve()
    assert report["converged"]
    assert report["final_residual"] < 1e-12
    ok, entries = fnls.verify(solution)
    assert ok
    assert entries[0]["collocation"] <= 1e-9


def test_collocation_of_zero_field():
    zero = {"dim": 1, "radius": 1, "real_valued": True, "entries": []}
    res = fnls.collocation_residual(zero, math.sqrt(2.0))
    assert res["relative"] == pytest.approx(1.0, rel=1e-12)
    cfg = fnls.default_config()
    assert fnls.residual_norm(zero, math.sqrt(2.0)) == pytest.approx(res["residual"], rel=1e-12)
    assert cfg["problem"]["forcing"] == "bundled"


def test_partition_dump_header():
    csv = fnls.partition_dump(1, 3.0, 10)
    lines = csv.strip().splitlines()
    assert lines[0] == "class_id,members,diameter,nearest_separation"
    assert sum(int(l.split(",")[1]) for l in lines[1:]) == 21


def test_coupling_synthetic_instances():
    one = fnls.synthetic_lemma1(3)
    assert isinstance(one["T"], np.ndarray)
    r1 = fnls.coupling_lemma1(one)
    assert r1["hypotheses_ok"] and r1["conclusions_checked"] and r1["conclusions_ok"]
    two = fnls.synthetic_lemma2(3)
    r2 = fnls.coupling_lemma2(two)
    assert r2["hypotheses_ok"] and r2["conclusions_ok"]


def test_green_audit_small_box():
    audit = fnls.green_audit(math.sqrt(2.0), 8)
    assert audit["rows"] == 2 * 15 * 15
    assert audit["dense"]["pass"]
