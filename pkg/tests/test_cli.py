import csv
import io
import json
import subprocess
import sys

import pytest

from kmlab.cli import main, parse_strings

V5 = "builtin:v5 s=4 uprime=off"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def header(text):
    first = text.splitlines()[0]
    assert first.startswith("# config: ")
    return json.loads(first[len("# config: "):])


def test_parse_strings():
    assert parse_strings("0^k,k<=2") == [(), (0,), (0, 0)]
    assert parse_strings("0^k,k≤1,eps,01") == [(), (0,), (), (0, 1)]
    assert parse_strings("1^3") == [(1, 1, 1)]
    assert parse_strings("") == [()]


def test_estimate_v5(capsys):
    code, out, _ = run(capsys, "estimate", "--machine", V5, "--strings", "0^k,k<=14",
                       "--max-len", "6", "--steps", "100")
    assert code == 0
    r = rows(out)
    assert [x["Km_upper"] for x in r] == ["0"] + ["4"] * 14
    assert r[3]["M_lower"] == "3/4" and r[0]["x"] == "ε"
    assert r[1]["K_upper"] == "n/a"
    cfg = header(out)
    assert cfg["machine"] == V5 and cfg["seed"] == 0 and "backend" in cfg


def test_estimate_copy_and_refvm(capsys):
    _, out, _ = run(capsys, "estimate", "--machine", "builtin:copy", "--strings", "0",
                    "--max-len", "4", "--steps", "100")
    assert rows(out)[0]["Km_upper"] == "2"
    _, out, _ = run(capsys, "estimate", "--strings", "eps,0", "--max-len", "12",
                    "--steps", "1000", "--depth", "1", "--workers", "2")
    r = rows(out)
    assert [x["x"] for x in r] == ["ε", "0", "ε", "0", "1"]
    assert r[1]["K_upper"] == "9" and r[0]["neg_log2_M"] == "0"


def test_estimate_zero_budget_warns(capsys):
    code, out, err = run(capsys, "estimate", "--strings", "0", "--max-len", "0")
    assert code == 0 and "zero budget" in err
    assert rows(out)[0]["Km_upper"] == "inf"


def test_predict_copy(capsys):
    code, out, _ = run(capsys, "predict", "--machine", "builtin:copy", "--env", "bernoulli:1/2",
                       "--loss", "copyloss", "--horizon", "12", "--max-len", "16",
                       "--steps", "100", "--seed", "3")
    assert code == 0
    r = rows(out)
    assert len(r) == 12 and {x["ratio"] for x in r} == {"3/2"}
    assert r[0]["ratio_float"] == "1.500000" and r[0]["post_0"] == "2/3"


def test_predict_v5_zero_errors(capsys):
    _, out, _ = run(capsys, "predict", "--machine", V5, "--env", "det:zeros", "--loss", "error",
                    "--horizon", "14", "--max-len", "4", "--steps", "40")
    r = rows(out)
    assert len(r) == 14 and all(x["y_t"] == x["x_t"] for x in r)


def test_predict_horizon_zero(capsys):
    _, out, _ = run(capsys, "predict", "--horizon", "0")
    lines = out.splitlines()
    assert len(lines) == 2 and lines[1].startswith("t,x_t,post_0,post_1,y_t")


def test_predict_truncation_footer(capsys):
    _, out, _ = run(capsys, "predict", "--env", "bernoulli:1/2", "--horizon", "16",
                    "--max-len", "6", "--steps", "50")
    assert out.splitlines()[-1].startswith("# stopped: t=")


def test_verify_vii3(capsys):
    code, out, _ = run(capsys, "verify", "vii3")
    rep = json.loads(out.splitlines()[1])
    assert code == 0 and rep["verdict"] == "pass" and rep["measured"]["ratio"] == "16/15"
    assert "runtime_s" not in rep


def test_verify_thm51(capsys):
    code, _, _ = run(capsys, "verify", "--checks", "thm51", "--trials", "1000", "--seed", "7")
    assert code == 0


def test_verify_vi5_literal_fails(capsys):
    code, out, _ = run(capsys, "verify", "vi5", "--s", "4")
    rep = json.loads(out.splitlines()[1])
    assert code == 1
    assert rep["checks"][0]["lhs"] == "209/16" and rep["checks"][0]["rhs"] == 14
    assert all(c["holds"] for c in rep["checks"][2:])


def test_usage_errors(capsys):
    assert run(capsys, "verify", "nope")[0] == 2
    assert run(capsys, "verify")[0] == 2
    assert run(capsys, "estimate", "--machine", "builtin:zzz")[0] == 2
    assert run(capsys, "estimate", "--strings", "0x")[0] == 2
    assert run(capsys, "predict", "--env", "bogus")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"machine": V5, "max-len": 6, "steps": 100, "strings": "000"}))
    _, out, _ = run(capsys, "estimate", "--config", str(cfg), "--strings", "1")
    assert rows(out)[0]["x"] == "000" and header(out)["max_len"] == 6
    bad = tmp_path / "bad.json"
    bad.write_text('{"machine":\n  oops}')
    code, _, err = run(capsys, "estimate", "--config", str(bad))
    assert code == 2 and "line 2, column 3" in err


def test_out_file_byte_identical(tmp_path, capsys):
    p = tmp_path / "trace.csv"
    outs = []
    for _ in range(2):
        assert main(["predict", "--machine", "builtin:copy", "--env", "bernoulli:1/2",
                     "--loss", "copyloss", "--horizon", "10", "--max-len", "14",
                     "--seed", "9", "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    assert capsys.readouterr().out == ""


def test_verify_byte_identical_subprocess():
    cmd = [sys.executable, "-m", "kmlab.cli", "verify", "vii3", "thm51", "--trials", "200"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.startswith(b"# config: ")


@pytest.mark.parametrize("flag", ["--timing"])
def test_verify_timing(capsys, flag):
    _, out, _ = run(capsys, "verify", "vii3", flag)
    assert "runtime_s" in json.loads(out.splitlines()[1])
