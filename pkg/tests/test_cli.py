from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from censored_ldp.asymptotics import WalkConfig, approx_auto
from censored_ldp.cli import FORMULA_COLUMNS, MC_COLUMNS, main
from censored_ldp.distributions import make_standardized_pareto

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def split_csv(text):
    meta = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        else:
            lines.append(line)
    rows = list(csv.DictReader(io.StringIO("\n".join(lines))))
    return meta, lines[0].split(","), rows


def test_approx_interior_two(capsys):
    code, out, _ = run(capsys, "approx", "--jump", "pareto:alpha=3", "--n", "10000", "--M", "3000", "--x", "4500")
    assert code == 0
    doc = json.loads(out)
    res = doc["results"][0]
    assert res["regime"] == "Interior(2)" and len(res["terms"]) == 3
    config = WalkConfig(10**4, 3000.0, make_standardized_pareto(3.0))
    # printed reals parse back to the identical double
    assert res["value"] == approx_auto(config, 4500.0).value
    meta = doc["metadata"]
    assert meta["s_n"] == config.s_n and meta["Pi_n"] == config.Pi_n
    assert meta["eps"] == 0.4 and meta["h"] == 0.2


def test_approx_schema_matches_golden(capsys):
    _, out, _ = run(capsys, "approx", "--x", "4500")
    doc = json.loads(out)
    golden = json.loads((GOLDEN / "approx_schema.json").read_text())
    assert sorted(doc) == golden["top"]
    assert list(doc["metadata"]) == golden["metadata"]
    assert list(doc["results"][0]) == golden["result"]
    assert list(doc["results"][0]["terms"][0]) == golden["term"]


def test_sweep_schema_matches_golden(capsys):
    code, out, _ = run(
        capsys, "sweep", "--x-from", "1500", "--x-to", "7500", "--points", "3", "--with-mc", "stratified",
        "--samples", "1000", "--k-cap", "2",
    )
    assert code == 0
    schema = [line for line in out.splitlines() if not line[:1].isdigit()]
    schema = [line.split("=")[0] + "=" if line.startswith("# ") else line for line in schema]
    assert schema == (GOLDEN / "sweep_mc_schema.csv").read_text().splitlines()


@pytest.mark.parametrize("argv,message", [
    (["approx", "--x", "-5"], "x must be positive"),
    (["approx", "--alpha", "2", "--x", "10"], "alpha"),
    (["approx", "--x", "1e9"], "beyond"),
    (["approx", "--M", "5", "--x", "10"], "not soft"),
    (["approx", "--jump", "lognormal:s=1", "--x", "10"], "cannot parse"),
    (["approx", "--jump", "pareto:alpha=3", "--alpha", "4", "--x", "10"], "disagree"),
])
def test_domain_and_range_errors_exit_two(capsys, argv, message):
    code, _, err = run(capsys, *argv)
    assert code == 2 and message in err


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["approx"])
    assert info.value.code == 2


def test_sweep_rows_and_regimes(capsys):
    code, out, _ = run(capsys, "sweep", "--x-from", "1500", "--x-to", "7500", "--points", "200")
    assert code == 0
    meta, header, rows = split_csv(out)
    assert header == FORMULA_COLUMNS
    assert len(rows) == 200
    xs = [float(r["x"]) for r in rows]
    assert all(b > a for a, b in zip(xs, xs[1:]))
    assert {r["regime"] for r in rows} >= {"BelowThreshold", "NearMultiple(1)", "Interior(2)", "NearMultiple(2)"}
    flagged = [r for r in rows if r["diagnostic"]]
    assert flagged and all(r["diagnostic"].startswith("interior_k=") for r in flagged)
    # term columns are padded, never ragged
    assert all(r["term_6"] == "" for r in rows)
    assert meta["eps"] == "0.4" and meta["seed"] == ""


def test_sweep_with_mc_adds_positive_columns(capsys):
    code, out, _ = run(
        capsys, "sweep", "--n", "1000", "--M", "800", "--x-from", "400", "--x-to", "1600", "--points", "4",
        "--with-mc", "stratified", "--samples", "2000", "--seed", "5",
    )
    assert code == 0
    meta, header, rows = split_csv(out)
    assert header == FORMULA_COLUMNS + MC_COLUMNS
    assert all(float(r["mc_p"]) > 0 and float(r["mc_se"]) > 0 for r in rows)
    assert meta["seed"] == "5" and meta["samples"] == "2000"


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CENSORED_LDP_SEED", "123")
    _, out, _ = run(capsys, "simulate", "plain", "--n", "100", "--M", "50", "--x", "30", "--samples", "1000")
    assert json.loads(out)["metadata"]["seed"] == 123


def test_simulate_json_and_csv_agree(capsys, tmp_path):
    args = ["simulate", "stratified", "--n", "100", "--M", "50", "--x", "30", "60", "--samples", "2000", "--seed", "3"]
    _, out, _ = run(capsys, *args)
    doc = json.loads(out)
    target = tmp_path / "sim.csv"
    code, out2, _ = run(capsys, *args, "--format", "csv", "--output", str(target))
    assert code == 0 and out2 == ""
    _, _, rows = split_csv(target.read_text())
    for j, r in zip(doc["results"], rows):
        assert float(r["p_hat"]) == j["p_hat"] and float(r["std_err"]) == j["std_err"]
        assert j["method"] == "stratified"


def test_wk_reports_closed_form_and_oracle(capsys):
    code, out, _ = run(capsys, "wk", "--k", "2", "--z", "1.5", "--oracle", "--samples", "200000", "--seed", "1")
    assert code == 0
    res = json.loads(out)["results"][0]
    assert res["value"] == pytest.approx(6.2313925560359259, rel=1e-10)
    assert res["closed_form"] == pytest.approx(res["value"], rel=1e-10)
    assert abs(res["oracle"] - res["value"]) < 4 * res["oracle_se"]


def test_wk_domain_error(capsys):
    code, _, err = run(capsys, "wk", "--k", "2", "--z", "2.5")
    assert code == 2 and "(1, 2)" in err


def test_convergence_error_exits_three(capsys, monkeypatch):
    from censored_ldp import cli
    from censored_ldp.errors import ConvergenceError

    def boom(*args, **kwargs):
        raise ConvergenceError("tolerance not met", 1.0, 1.0)

    monkeypatch.setattr(cli, "W", boom)
    code, _, err = run(capsys, "wk", "--k", "3", "--z", "2.5")
    assert code == 3 and "tolerance" in err


def test_validate_quick(capsys):
    code, out, _ = run(capsys, "validate", "--quick")
    assert code == 0
    assert "PASS    [1] W-function exactness" in out


def test_validate_soft_censoring_injection(capsys):
    code, out, err = run(capsys, "validate", "--M", "500")
    assert code == 0
    assert "soft-censoring warning" in err
    lines = [line for line in out.splitlines() if line.split(" ")[0] in ("PASS", "FAIL", "SKIPPED")]
    assert len(lines) >= 8
    skipped = [line for line in lines if line.startswith("SKIPPED")]
    assert any("transition" in line for line in skipped)
    assert not any(line.startswith("FAIL") for line in lines)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "censored_ldp", "approx", "--x", "-5"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 2 and "x must be positive" in proc.stderr


def test_numbers_round_trip(capsys):
    _, out, _ = run(capsys, "sweep", "--x-from", "1000", "--x-to", "2000", "--points", "7", "--format", "json")
    for row in json.loads(out)["results"]:
        assert math.isfinite(row["value"])
        assert float(repr(row["value"])) == row["value"]
