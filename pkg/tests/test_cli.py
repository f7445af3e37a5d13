import csv
import io
import json

import pytest

from pricing_lab import cli
from pricing_lab.frontier import r_star, symmetric_point

TWO_POINT = '{"type": "discrete", "values": [1, 2], "probs": [0.5, 0.5]}'


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _csv(text):
    return list(csv.DictReader(io.StringIO(text)))


# --- formatting ---------------------------------------------------------------


@pytest.mark.parametrize("x,text", [
    (1.0, "1"), (0.5, "0.5"), (1 / 3, "0.333333333333"), (float("inf"), "inf"),
    (float("-inf"), "-inf"), (float("nan"), "nan"), (123456789.123456, "123456789.123"),
])
def test_fmt(x, text):
    assert cli.fmt(x) == text


def test_clean_nested():
    obj = {"a": [1 / 3, float("inf")], "b": True, "c": None, "d": 2}
    assert cli._clean(obj) == {"a": [0.333333333333, "inf"], "b": True, "c": None, "d": 2}


# --- frontier -----------------------------------------------------------------


def test_frontier_three_steps(capsys):
    code, out, _ = run(capsys, "frontier", "--steps", "3")
    assert code == 0
    assert out.splitlines()[0] == "C,R_star,beta_argmin,baseline_R"
    rows = _csv(out)
    assert [float(r["C"]) for r in rows] == [0.0, 0.5, 1.0]
    R = [float(r["R_star"]) for r in rows]
    assert R[0] == pytest.approx(1.0, abs=1e-9)
    assert R[1] == pytest.approx(r_star(0.5).R, abs=1e-11)
    assert R[2] == pytest.approx(0.5, abs=1e-3)
    assert [float(r["baseline_R"]) for r in rows] == [1.0, 0.5, 0.0]


def test_frontier_symmetric(capsys):
    code, out, _ = run(capsys, "frontier", "--symmetric")
    rows = _csv(out)
    assert code == 0 and len(rows) == 1
    C, R = float(rows[0]["C"]), float(rows[0]["R_star"])
    assert C == pytest.approx(R, abs=1e-7)
    assert C == pytest.approx(0.822, abs=5e-4)
    assert C == pytest.approx(symmetric_point().C, abs=1e-11)


@pytest.mark.parametrize("argv", [
    ["frontier", "--steps", "1"],
    ["frontier", "--c-min", "0.8", "--c-max", "0.2"],
    ["frontier", "--format", "xml"],
    ["nonsense"],
    [],
])
def test_frontier_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "usage" in err


def test_frontier_json_and_output_file(capsys, tmp_path):
    path = tmp_path / "f.json"
    code, out, _ = run(capsys, "frontier", "--steps", "2", "--format", "json", "--output", str(path))
    assert code == 0 and out == ""
    data = json.loads(path.read_text())
    assert [d["C"] for d in data] == [0.0, 1.0]
    assert set(data[0]) == {"C", "R_star", "beta_argmin", "baseline_R"}


def test_frontier_csv_is_well_formed(capsys):
    _, out, _ = run(capsys, "frontier", "--steps", "11")
    assert out.endswith("\n") and "\r" not in out
    lines = out.splitlines()
    assert len(lines) == 12
    assert all(line.count(",") == 3 for line in lines)


def test_frontier_deterministic(capsys):
    first = run(capsys, "frontier", "--steps", "21")[1]
    second = run(capsys, "frontier", "--steps", "21")[1]
    assert first == second


# --- rev ----------------------------------------------------------------------


def test_rev_two_point_full_consistency(capsys):
    code, out, _ = run(capsys, "rev", "--prior", TWO_POINT, "--c", "1")
    data = json.loads(out)
    assert code == 0
    assert data["rev"] == pytest.approx(1.0, abs=1e-9)
    assert data["gap"] <= 1e-6
    assert set(data) >= {"mechanism", "lottery", "dual", "gap", "opt"}


def test_rev_point_mass(capsys):
    code, out, _ = run(capsys, "rev", "--prior", "point:1", "--c", "0.5")
    assert code == 0
    assert json.loads(out)["rev"] == pytest.approx(1.0, abs=1e-9)


def test_rev_analytic_prior_is_discretised(capsys):
    code, out, _ = run(capsys, "rev", "--prior", "uniform01", "--c", "1", "--grid", "50")
    data = json.loads(out)
    assert code == 0 and len(data["mechanism"]["x"]) == 50


@pytest.mark.parametrize("argv", [
    ["rev", "--prior", '{"type": "discrete", "values": [1, 2], "probs": [0.5, 0.4]}', "--c", "0.5"],
    ["rev", "--prior", "{not json", "--c", "0.5"],
    ["rev", "--prior", TWO_POINT],
    ["rev", "--prior", TWO_POINT, "--c", "1.5"],
    ["rev", "--prior", "/no/such/file.json", "--c", "0.5"],
])
def test_rev_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_rev_prior_from_file(capsys, tmp_path):
    path = tmp_path / "prior.json"
    path.write_text(TWO_POINT)
    assert run(capsys, "rev", "--prior", str(path), "--c", "0.3")[0] == 0


# --- mech ---------------------------------------------------------------------


def test_mech_guess_discount(capsys):
    code, out, _ = run(capsys, "mech", "guess-discount", "--prior", "uniform01")
    data = json.loads(out)
    assert code == 0
    assert data["R"] == pytest.approx(5 / 6, abs=1e-11)
    assert data["C"] == 1.0


def test_mech_heavy_tail(capsys):
    code, out, _ = run(capsys, "mech", "heavy-tail", "--prior", "er:3e7", "--eps", "0.1")
    data = json.loads(out)
    assert code == 0
    assert data["C"] == pytest.approx(0.9)
    assert data["R"] == pytest.approx(0.905, abs=1e-3)
    assert abs(data["aux"]["calibration_residual"]) <= 1e-8


def test_mech_heavy_tail_infeasible(capsys):
    code, _, err = run(capsys, "mech", "heavy-tail", "--prior", "uniform01", "--eps", "0.1")
    assert code == 1
    assert "insufficient tail mass" in err


def test_mech_hidden_price(capsys):
    code, out, _ = run(capsys, "mech", "hidden-price", "--prior", "exp:1")
    data = json.loads(out)
    assert code == 0 and data["R"] == 1.0 and data["C"] == pytest.approx(1.0)


def test_mech_baseline(capsys):
    code, out, _ = run(capsys, "mech", "baseline", "--prior", "uniform01", "--lam", "0.25")
    data = json.loads(out)
    assert code == 0 and (data["C"], data["R"]) == (0.25, 0.75)


@pytest.mark.parametrize("argv", [
    ["mech", "heavy-tail", "--prior", "er:100"],
    ["mech", "heavy-tail", "--prior", "er:100", "--eps", "1.5"],
    ["mech", "baseline", "--prior", "uniform01"],
    ["mech", "baseline", "--prior", "uniform01", "--lam", "2"],
    ["mech", "hidden-price", "--prior", "point:0"],
    ["mech", "unknown", "--prior", "uniform01"],
    ["mech", "guess-discount", "--prior", "exp:-1"],
])
def test_mech_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


# --- envelope -----------------------------------------------------------------


def test_envelope_f_beta(capsys):
    code, out, _ = run(capsys, "envelope", "--beta", "1", "--c", "1")
    data = json.loads(out)
    assert code == 0
    assert data["v_L"] == 1.0 and data["v_H"] == 2.0
    assert data["objective"] == pytest.approx(0.613705638880, abs=1e-11)
    # eta = 0 leaves nothing to fold, and a single step is already reduced
    assert data["eliminate_eta"]["fallback"] is False
    assert data["step_reduce"]["objective_after"] == pytest.approx(data["objective"], abs=1e-11)


def test_envelope_params_json(capsys):
    params = '{"T": 1, "beta": [[0, 0.3], [3, 0.2], [6, 0.0]], "eta": 0}'
    code, out, _ = run(capsys, "envelope", "--params", params, "--c", "0.5")
    assert code == 0
    assert "objective" in json.loads(out)


@pytest.mark.parametrize("argv", [
    ["envelope", "--c", "0.5"],
    ["envelope", "--beta", "1"],
    ["envelope", "--beta", "-1", "--c", "0.5"],
    ["envelope", "--params", "{bad", "--c", "0.5"],
])
def test_envelope_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


# --- verify -------------------------------------------------------------------


def test_verify_small_corpus(capsys):
    code, out, _ = run(capsys, "verify", "--corpus-size", "5", "--suite", "duality")
    rows = _csv(out)
    assert code == 0
    assert {r["check"] for r in rows} == {"posted_vs_dual", "reduced_vs_posted", "achievability"}
    assert all(r["status"] == "pass" for r in rows)


def test_verify_injected_fault(capsys):
    code, out, _ = run(capsys, "verify", "--corpus-size", "5", "--suite", "lift",
                       "--inject-fault", "payment")
    rows = {r["check"]: r for r in _csv(out)}
    assert code == 1
    assert rows["star_constraints"]["status"] == "pass"
    assert rows["injected_payment_fault"]["status"] == "FAIL"
    assert float(rows["injected_payment_fault"]["max_violation"]) >= 0.1 - 1e-8


def test_verify_tightness_single_case(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "tightness", "--beta", "1", "--c", "1",
                       "--grid", "200")
    rows = _csv(out)
    assert code == 0 and len(rows) == 1
    assert rows[0]["check"] == "C=1,beta=1"
    assert "<=" in rows[0]["detail"]


def test_verify_frontier_json(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "frontier", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert {d["check"] for d in data} == {"dominance", "strict_margin", "monotone", "concave"}


@pytest.mark.parametrize("argv", [
    ["verify", "--beta", "1"],
    ["verify", "--suite", "tightness", "--beta", "0", "--c", "1"],
    ["verify", "--grid", "10"],
    ["verify", "--corpus-size", "0"],
    ["verify", "--inject-fault", "allocation"],
])
def test_verify_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_verify_deterministic_across_threads(capsys, monkeypatch):
    argv = ("verify", "--corpus-size", "4", "--suite", "duality", "--seed", "7")
    monkeypatch.setenv("PRICING_LAB_THREADS", "1")
    serial = run(capsys, *argv)[1]
    monkeypatch.setenv("PRICING_LAB_THREADS", "4")
    parallel = run(capsys, *argv)[1]
    assert serial == parallel
