import subprocess
import sys

import pytest

from qubolin.cli import main
from qubolin.instances import save_canonical
from qubolin.qubo import QuboInstance


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_lp_prints_value(capsys):
    code, out, _ = run(capsys, "solve-lp", "--model", "GW", "--instance", "ex8")
    assert code == 0 and out == "1.0\n"


def test_verify_invalid_model(capsys):
    code, out, _ = run(capsys, "verify", "--model", "DW(*,b)", "--instance", "ex3", "--allow-invalid")
    assert code == 1 and "INVALID_WITNESS" in out and "model 2 vs optimum 1" in out


def test_invalid_model_needs_flag(capsys):
    code, _, err = run(capsys, "verify", "--model", "DW(*,b)", "--instance", "ex3")
    assert code == 2 and "--allow-invalid" in err


def test_unknown_model_is_usage_error(capsys):
    code, _, err = run(capsys, "build", "--model", "ZZ", "--instance", "ex3")
    assert code == 2 and "--model" in err


def test_argparse_usage_exit_code(capsys):
    with pytest.raises(SystemExit) as e:
        main(["solve-lp", "--bogus"])
    assert e.value.code == 2


def test_single_variable_export_has_no_rows(capsys, tmp_path):
    p = tmp_path / "one.txt"
    p.write_text(save_canonical(QuboInstance.from_lists([[0]], [4])))
    code, out, _ = run(capsys, "export", "--model", "PK", "--instance", str(p), "--format", "lp")
    assert code == 0
    body = out.split("Subject To")[1].split("Bounds")[0]
    assert body.strip() == ""
    code, out, _ = run(capsys, "build", "--model", "PK", "--instance", str(p))
    assert "constraints 0" in out


def test_out_flag_writes_file(capsys, tmp_path):
    target = tmp_path / "m.mps"
    code, out, _ = run(capsys, "export", "--model", "GW(a)", "--instance", "ex2", "--format", "mps",
                       "--out", str(target))
    assert code == 0 and out == "" and target.read_text().rstrip().endswith("ENDATA")


def test_forced_stop_via_cli(capsys):
    code, out, err = run(capsys, "solve-milp", "--model", "ORDW", "--instance", "ex1",
                         "--start-x", "1,1", "--stop-after", "1", "-v")
    assert code == 0
    assert "status FEASIBLE_TIMEOUT" in out and "recomputed_objective 2" in out
    assert "event=incumbent" in err


def test_generate_parse_oracle(capsys, tmp_path):
    code, out, _ = run(capsys, "generate", "--n", "5", "--seed", "2", "--density", "0.5")
    assert code == 0 and out.startswith("QUBO 5")
    f = tmp_path / "b.txt"
    f.write_text("1\n2 1\n1 2 5\n")
    code, out, _ = run(capsys, "parse", "--instance", str(f))
    assert out == "QUBO 2\nc 0 0\n1 2 5\n"
    code, out, _ = run(capsys, "oracle", "--instance", "ex3")
    assert out.startswith("optimum 1\n")


def test_weights_file(capsys, tmp_path):
    w = tmp_path / "w.json"
    w.write_text('{"mode": "custom", "alpha": {"1,2": "2", "2,1": "3"}}')
    code, out, _ = run(capsys, "solve-lp", "--model", "GW(a)", "--instance", "ex1", "--weights", str(w))
    assert code == 0 and float(out) == pytest.approx(2.0)


def test_compare_is_byte_deterministic(tmp_path):
    argv = [sys.executable, "-m", "qubolin.cli", "compare", "--instance", "ex6b", "--instance", "ex8",
            "--model", "GW", "--model", "ORPK(*,b)", "--weights", "unit,dual-safe", "--format", "jsonl"]
    a = subprocess.run(argv, capture_output=True, text=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, text=True, check=True).stdout
    assert a == b and len(a.splitlines()) == 8


def test_suite_subset(capsys):
    code, out, _ = run(capsys, "suite", "--only", "7,8")
    assert code == 0 and "criterion  7 PASS" in out
    code, out, _ = run(capsys, "suite", "--only", "2")
    assert code == 1 and "FAIL" in out
