import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from dirichlet_ops import TruncatedDirichletSeries
from dirichlet_ops import io
from dirichlet_ops.cli import main
from dirichlet_ops.experiments import preset_registry
from dirichlet_ops.symbols import builtin_symbol


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


@pytest.fixture
def zeta50(tmp_path):
    p = tmp_path / "zeta50.json"
    p.write_text(json.dumps(io.series_to_json(TruncatedDirichletSeries.dense(np.ones(50)))))
    return str(p)


@pytest.fixture
def shift1plus2(tmp_path):
    p = tmp_path / "shift1plus2.json"
    p.write_text(json.dumps(io.symbol_to_json(builtin_symbol("shift1_plus_2s"))))
    return str(p)


# ---------------------------------------------------------------------------
# examples
# ---------------------------------------------------------------------------

def test_eval_zeta50(capsys, zeta50, tmp_path):
    out_csv = tmp_path / "eval.csv"
    code, out = run(capsys, "eval", "--series", zeta50, "--s", "2+0i", "--out", str(out_csv))
    assert code == 0
    val = out["results"][0]["value"]
    assert val[0] == pytest.approx(1.62513, abs=1e-5) and val[1] == 0.0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["s_re", "s_im", "value_re", "value_im", "tail_bound"]
    assert float(rows[1][2]) == val[0]


def test_pullback_example(capsys, shift1plus2):
    code, out = run(capsys, "pullback", "--n", "2", "--symbol", shift1plus2, "--closure", "4096")
    assert code == 0
    coeffs = {row[0]: row[1] for row in out["series"]["coeffs"]}
    assert coeffs[4] == pytest.approx(-math.log(2) / 2, abs=1e-12)
    assert coeffs[4] == pytest.approx(-0.34657, abs=1e-5)


def test_preset_prop_algebrab(capsys):
    code, out = run(capsys, "preset", "prop-algebrab", "--delta", "1e-2")
    assert code == 0 and out["passed"]
    assert max(w["value_gap"] for w in out["observed"]["witnesses"]) >= 0.41588


def test_preset_registry_contents(capsys):
    code, out = run(capsys, "preset", "--list")
    names = {p["name"] for p in out["presets"]}
    required = {"prop-algebrab", "example1-not-ga", "example2-ga-not-uc", "pullback-closedform", "koebe-flow",
                "hprime-1plus2s", "hprime-1over-1minus2s", "compact-transition", "kronecker-23",
                "identity-convergence"}
    assert required <= names
    ct = next(p for p in out["presets"] if p["name"] == "compact-transition")
    assert ct["expected"]["t0"] == "1/c"


def test_expected_descriptors_map_one_to_one():
    crits = [p.expected["criterion"] for p in preset_registry() if p.expected is not None]
    assert sorted(crits) == list(range(1, 14))


# ---------------------------------------------------------------------------
# the other subcommands
# ---------------------------------------------------------------------------

def test_abscissae_and_norm(capsys):
    code, out = run(capsys, "abscissae", "--series", "zeta:2000")
    assert code == 0 and out["chain_holds"]
    assert abs(out["abscissae"]["sigma_a_est"] - 1) <= 0.1
    code, out = run(capsys, "norm", "--series", "algebrab", "--grid-t-window", "100", "--grid-step", "0.01")
    assert code == 0 and 0.9 < out["sup_estimate"] <= 1.0


def test_classify_probe_compact(capsys):
    args = ("--grid-sigma-max", "2", "--grid-t-window", "10", "--grid-step", "0.05")
    code, out = run(capsys, "classify", "--symbol", "G_member", *args)
    assert code == 0 and out["report"]["in_G"]
    code, out = run(capsys, "probe-ga", "--symbol", "identity", "--delta", "1e-2", *args)
    assert code == 0 and out["omega"][0][1] == pytest.approx(1e-2)
    code, out = run(capsys, "compact", "--symbol", "shift1", *args)
    assert code == 0 and out["compactness"] == "compact"


def test_compose(capsys, shift1plus2):
    code, out = run(capsys, "compose", "--series", '{"coeffs": [[1, 1, 0], [2, 1, 0]]}',
                    "--symbol", shift1plus2, "--closure", "4096")
    assert code == 0
    coeffs = {row[0]: row[1] for row in out["series"]["coeffs"]}
    assert coeffs[1] == 1.0 and coeffs[4] == pytest.approx(-math.log(2) / 2)


def test_flow_both_methods(capsys, tmp_path):
    p = tmp_path / "flow.csv"
    code, out = run(capsys, "flow", "--spirallike", "koebe", "--s", "1", "--t", "0.5", "--method", "both",
                    "--out", str(p))
    assert code == 0
    a, b = (complex(*f["phi_t_s"]) for f in out["flows"])
    assert abs(a - b) <= 1e-8
    header = next(csv.reader(p.open()))
    assert header == ["t", "s_re", "s_im", "phi_re", "phi_im", "residual", "method"]


def test_koenigs_blowup(capsys):
    code, out = run(capsys, "koenigs", "--generator", "one_minus_2s", "--blowup-level", "10")
    assert code == 0
    assert out["blowup_sigma_star"] == pytest.approx(math.log2(1 + 2 ** -10), rel=1e-8)


def test_semigroup_check(capsys):
    code, out = run(capsys, "semigroup-check", "--generator", "inv_1plus2s", "--smoke")
    assert code == 0
    assert out["semigroup_law_residual"] <= 1e-6 and out["identity_nonincreasing"]
    assert 5 <= out["recovery_ratio"] <= 20


def test_kronecker_and_witnesses(capsys, tmp_path):
    code, out = run(capsys, "kronecker", "--bases", "2,3", "--targets", "0,pi", "--eps", "1e-2",
                    "--t-max", "1e7")
    assert code == 0 and out["verified"] and abs(out["t"]) <= 1e7
    p = tmp_path / "w.csv"
    code, out = run(capsys, "witnesses", "--delta", "1e-3", "--out", str(p))
    assert code == 0 and out["witnesses"][0]["value_gap"] >= 0.41
    rows = list(csv.reader(p.open()))
    assert rows[0] == ["s1", "s2", "gap", "value_gap"]
    assert io.parse_complex(rows[1][0]).real > 0


# ---------------------------------------------------------------------------
# exit codes and determinism
# ---------------------------------------------------------------------------

def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["eval", "--series", "zeta:10", "--s", "1", "--nope"])
    assert e.value.code == 1
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["eval", "--series", "zeta:10", "--s", "2+xi"],
    ["pullback", "--n", "0", "--symbol", "shift1"],
    ["classify", "--symbol", "no_such_symbol"],
    ["kronecker", "--bases", "2", "--targets", "0", "--eps", "4"],
    ["eval", "--series", "/nonexistent/file.json", "--s", "1"],
])
def test_precondition_exit_2(capsys, argv):
    assert main(argv) == 2


def test_not_found_exit_3(capsys):
    code, out = run(capsys, "kronecker", "--bases", "2,3", "--targets", "0,pi", "--eps", "1e-6",
                    "--t-max", "10", "--no-grid")
    assert code == 3 and out["found"] is False


def test_budget_exit_3(capsys):
    assert main(["kronecker", "--bases", "2,3,5", "--targets", "0.3,1,2", "--eps", "1e-9"]) == 3


def test_deterministic_output():
    cmd = [sys.executable, "-m", "dirichlet_ops", "preset", "composition-oracle", "--smoke", "--set", "cases=5"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["passed"]
