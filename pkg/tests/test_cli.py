import csv
import io
import json
from pathlib import Path

import pytest

from eacomm import cli

CORPUS = Path(__file__).parent / "corpus"
SD = str(CORPUS / "superdense_m1.qcp")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_superdense_point_mass(capsys):
    code, out, _ = run(capsys, "run", SD, "--input", "10")
    rep = json.loads(out)
    assert code == 0
    assert rep["distribution"] == {"10": pytest.approx(1.0)}
    assert rep["successExact"] == pytest.approx(1.0)


def test_report_has_exact_field_names(capsys):
    _, out, _ = run(capsys, "certify", SD)
    rep = json.loads(out)
    assert tuple(rep)[: len(cli.REPORT_FIELDS)] == cli.REPORT_FIELDS
    assert rep["margin"] == pytest.approx(rep["boundRhs"] - rep["successExact"])
    assert rep["traceIdentityResidual"] >= 0 and rep["reconstructionResidual"] >= 0


def test_reports_are_stable_modulo_timestamp(capsys):
    _, a, _ = run(capsys, "certify", "--random", "--seed", "42")
    _, b, _ = run(capsys, "certify", "--random", "--seed", "42")
    da, db = json.loads(a), json.loads(b)
    da.pop("timestamp"), db.pop("timestamp")
    assert json.dumps(da) == json.dumps(db)


def test_empty_protocol_gives_uniform_output(tmp_path, capsys):
    f = tmp_path / "empty.qcp"
    f.write_text("protocol empty { n 1; epr 1; outputs [eb[0]]; }\n")
    code, out, _ = run(capsys, "run", str(f), "--input", "1")
    assert code == 0
    assert json.loads(out)["distribution"] == {"0": pytest.approx(0.5), "1": pytest.approx(0.5)}


def test_malformed_file_exit_2_with_position(tmp_path, capsys):
    f = tmp_path / "bad.qcp"
    f.write_text("protocol p {\n  n 1 epr 1;\n}\n")
    code, out, err = run(capsys, "run", str(f), "--input", "1")
    assert code == 2 and out == ""
    assert ":2:7:" in err


def test_invalid_protocol_exit_2(tmp_path, capsys):
    f = tmp_path / "bob.qcp"
    f.write_text("protocol p { n 1; epr 1; bob { if x[0] apply X on [eb[0]]; } outputs [eb[0]]; }")
    code, _, err = run(capsys, "certify", str(f))
    assert code == 2 and "input-conditioned gate by Bob" in err


def test_missing_file_and_bad_input(capsys):
    assert run(capsys, "run", "/nonexistent.qcp", "--input", "1")[0] == 2
    assert run(capsys, "run", SD, "--input", "1")[0] == 2
    assert run(capsys, "run", SD, "--input", "12")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_certify_superdense(capsys):
    code, out, _ = run(capsys, "certify", SD)
    rep = json.loads(out)
    assert code == 0 and rep["m_A"] == 1
    assert rep["traceIdentityResidual"] <= 1e-9 and rep["reconstructionResidual"] <= 1e-9


def test_certify_no_communication(tmp_path, capsys):
    f = tmp_path / "quiet.qcp"
    f.write_text("protocol quiet { n 1; epr 1; bob { apply H on [eb[0]]; } outputs [eb[0]]; }")
    code, out, _ = run(capsys, "certify", str(f))
    assert code == 0 and json.loads(out)["m_A"] == 0


def test_certify_random_seed_42(capsys):
    assert run(capsys, "certify", "--random", "--seed", "42")[0] == 0


def test_bound_superdense_margin_zero(capsys):
    code, out, _ = run(capsys, "bound", SD)
    assert code == 0 and abs(json.loads(out)["margin"]) <= 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_bound_random_sweep(capsys, seed):
    code, out, _ = run(capsys, "bound", "--random", "--seed", str(seed), "--n", "3")
    assert code == 0 and json.loads(out)["margin"] >= -1e-9


def test_bound_m_a_zero(capsys):
    code, out, _ = run(capsys, "bound", "--random", "--seed", "3", "--n", "2", "--m-A", "0")
    rep = json.loads(out)
    assert code == 0 and rep["successExact"] <= 0.25 + 1e-9


def test_bound_needs_full_outputs(capsys):
    assert run(capsys, "bound", str(CORPUS / "ip_trivial_n2.qcp"))[0] == 2


def _csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_demo_superdense_csv(capsys):
    code, out, _ = run(capsys, "demo", "superdense", "--m", "2")
    rows = _csv(out)
    assert code == 0 and rows[0]["n"] == "4"
    assert float(rows[0]["success"]) == pytest.approx(1.0, abs=1e-9)


def test_demo_ip_classical(capsys):
    code, out, _ = run(capsys, "demo", "ip-classical", "--n", "4", "--t", "1")
    row = _csv(out)[0]
    assert code == 0 and row["bits"] == "4" and float(row["success"]) == 0.75
    _, out, _ = run(capsys, "demo", "ip-classical", "--n", "4", "--t", "1", "--json")
    assert json.loads(out)["results"][0]["success"] == "3/4"


def test_demo_ip_quantum_sweeps_t(capsys):
    code, out, _ = run(capsys, "demo", "ip-quantum", "--n", "3")
    rows = _csv(out)
    assert code == 0 and [r["t"] for r in rows] == ["1", "2", "3"]
    assert all(float(r["lowerBound"]) <= int(r["qubits"]) for r in rows)


def test_demo_ip_reduction(capsys):
    code, out, _ = run(capsys, "demo", "ip-reduction", "--n", "2", "--eps", "0", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["recoveryProbability"] == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("argv", [
    ("demo", "superdense", "--m", "0"),
    ("demo", "ip-classical", "--n", "3", "--t", "5"),
    ("demo", "ip-reduction", "--eps", "0.7"),
    ("demo", "ip-quantum", "--n", "0"),
    ("demo", "nope"),
])
def test_demo_flag_ranges(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_cap_exceeded_exit_3(capsys, monkeypatch):
    assert run(capsys, "demo", "superdense", "--m", "2", "--cap-qubits", "3")[0] == 3
    monkeypatch.setenv("QCP_CAP_QUBITS", "1")
    assert run(capsys, "certify", SD)[0] == 3


def test_out_file_and_threads(tmp_path, capsys):
    dest = tmp_path / "r.json"
    code, out, _ = run(capsys, "bound", SD, "--out", str(dest), "--threads", "3")
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["successExact"] == pytest.approx(1)


def test_csv_for_single_report(capsys):
    _, out, _ = run(capsys, "bound", SD, "--csv")
    rows = _csv(out)
    assert list(rows[0]) == list(cli.REPORT_FIELDS)


def test_invariant_violation_exit_4(capsys, monkeypatch):
    monkeypatch.setattr(cli, "RESIDUAL_LIMIT", -1.0)
    assert run(capsys, "certify", SD)[0] == 4
