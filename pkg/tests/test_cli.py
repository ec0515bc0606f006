import json
import subprocess
import sys

import numpy as np
import pytest

from starq.cli import main
from starq.grid import load_field
from starq.harness import (
    TAGS,
    ScenarioConfig,
    UsageError,
    canonical,
    compare_golden,
    convergence_study,
    load_config,
    run_scenario,
)


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def read(tmp_path):
    return json.loads((tmp_path / "report.json").read_text())


def test_group_suite_report(tmp_path):
    assert run(tmp_path, "run", "--suite", "group", "--seed", "1") == 0
    rep = read(tmp_path)
    assert rep["passed"] and len(rep["records"]) >= 6
    for r in rep["records"]:
        assert r["tag"] in TAGS
        assert set(r) >= {"name", "tag", "inputs_digest", "value", "tolerance", "passed", "runtime_s"}
    csv_lines = (tmp_path / "report.csv").read_text().splitlines()
    assert csv_lines[0].startswith("name,tag,inputs_digest") and len(csv_lines) == len(rep["records"]) + 1


def test_covariance_suite_has_nine_records(tmp_path):
    assert run(tmp_path, "run", "--suite", "covariance", "--theta", "0.5", "--grid", "128x128") == 0
    recs = read(tmp_path)["records"]
    assert len(recs) == 9 and all(r["passed"] for r in recs)


def test_determinism_modulo_wall_clock(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(a, "run", "--suite", "orbit", "--seed", "7")
    run(b, "run", "--suite", "orbit", "--seed", "7")
    ra, rb = read(a), read(b)
    assert json.dumps(canonical(ra), sort_keys=True) == json.dumps(canonical(rb), sort_keys=True)


def test_empty_theta_is_usage_error(tmp_path, capsys):
    assert run(tmp_path, "run", "--theta", "") == 2
    assert "theta" in capsys.readouterr().err
    assert not (tmp_path / "report.json").exists()


def test_levels_below_two_rejected(tmp_path):
    assert run(tmp_path, "converge", "--levels", "1") == 2
    with pytest.raises(UsageError):
        convergence_study(ScenarioConfig(), 1)


def test_config_diagnostics():
    text = "[scenario]\nsuite = group\n\ntheta = 0.5, -1\n"
    with pytest.raises(UsageError, match=r"cfg:4: \[scenario\] theta"):
        load_config(text, "cfg")
    with pytest.raises(UsageError, match=r"cfg:3: \[scenario\] colour: unknown field"):
        load_config("[scenario]\nsuite = group\ncolour = red\n", "cfg")
    with pytest.raises(UsageError, match=r"cfg:3: \[tolerances\] group"):
        load_config("[scenario]\n[tolerances]\ngroup = tight\n", "cfg")
    with pytest.raises(UsageError, match="grid"):
        load_config("[scenario]\ngrid = 100x128\n", "cfg")
    with pytest.raises(UsageError, match="missing"):
        load_config("[other]\nx = 1\n", "cfg")


def test_config_file_and_table_profile(tmp_path):
    cfg_path = tmp_path / "s.ini"
    cfg_path.write_text(
        "[scenario]\nsuite = trace\ntheta = 0.5\nprofile = table\ngrid = 128x128\nseed = 3\n"
        "[tolerances]\ntrace = 1e-3\n"
        "[profile]\ntable = -40:1, 0:1, 40:1\n")
    cfg = load_config(cfg_path.read_text())
    assert cfg.tol("trace") == 1e-3 and cfg.seed == 3
    prof = cfg.make_profile(0.5)
    assert np.allclose(prof.P(np.array([-3.0, 0.0, 5.0])), 1.0)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0


def test_failing_check_gives_nonzero_exit(tmp_path):
    cfg_path = tmp_path / "s.ini"
    cfg_path.write_text("[scenario]\nsuite = group\n[tolerances]\ngroup = 1e-30\n")
    assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path)]) == 1
    assert not read(tmp_path)["passed"]


def test_golden_mode(tmp_path):
    gold = tmp_path / "gold"
    assert run(gold, "run", "--suite", "group") == 0
    assert run(tmp_path / "again", "run", "--suite", "group", "--golden", str(gold / "report.json")) == 0
    rep = json.loads((gold / "report.json").read_text())
    rep["records"][0]["value"] = 1.0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(rep))
    assert run(tmp_path / "x", "run", "--suite", "group", "--golden", str(bad)) == 1
    assert compare_golden(read(gold), rep)


def test_dump_field(tmp_path):
    assert run(tmp_path, "dump-field", "--field", "panel:1", "--grid", "32x32") == 0
    f = load_field(tmp_path / "field_panel.csv")
    assert f.values.shape == (32, 32)
    assert run(tmp_path, "dump-field", "--field", "star-exp:0.3,0.1,0,1", "--grid", "16x16") == 0
    g = load_field(tmp_path / "field_star-exp.csv")
    assert np.allclose(np.abs(g.values), np.sqrt(np.cosh(0.3)))
    assert run(tmp_path, "dump-field", "--field", "nope") == 2


def test_thread_cap_env(tmp_path, monkeypatch):
    monkeypatch.setenv("STARQ_THREADS", "1")
    rep = run_scenario(ScenarioConfig(suite="orbit", random_cases=20))
    assert rep.passed


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "starq", "run", "--suite", "orbit", "--out", str(tmp_path)],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and "PASS orbit" in proc.stdout
