import io

import pytest

from unboundlsq.cli import main, run


def call(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def data_rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return lines[0].split(","), lines[1:]


def test_condnum_example(tmp_path):
    out = tmp_path / "c.csv"
    code, _, err = call(["condnum", "--basis", "hermite-func", "--dim", "1", "--space", "td", "--qmax", "25",
                         "--rule", "linear", "--c", "6", "--L", "8", "--reps", "100", "--seed", "42",
                         "--out", str(out), "--threads", "0"])
    assert code == 0, err
    header, rows = data_rows(out.read_text())
    assert len(rows) == 26 and header[:3] == ["q", "N", "m"]
    meta = [l for l in out.read_text().splitlines() if l.startswith("#")]
    assert "# seed=42" in meta and any(l.startswith("# rng=philox") for l in meta)
    assert not any("timestamp" in l for l in meta)


def test_stability_smoke():
    code, out, _ = call(["stability", "--K", "5", "--r", "1", "--trials", "1000", "--seed", "7"])
    assert code == 0
    assert "m_min = " in out and "violation_fraction = " in out


def test_unknown_flag_is_usage_error(tmp_path):
    out = tmp_path / "bad.csv"
    code, _, err = call(["condnum", "--frobnicate", "3", "--out", str(out)])
    assert code == 1 and "unrecognized" in err
    assert not out.exists()
    assert call(["nosuch"])[0] == 1
    assert call([])[0] == 1


def test_invalid_value_is_usage_error(tmp_path):
    out = tmp_path / "bad.csv"
    assert call(["condnum", "--reps", "0", "--out", str(out)])[0] == 1
    assert call(["condnum", "--qmin", "4", "--qmax", "1", "--out", str(out)])[0] == 1
    assert not out.exists()


def test_runtime_error_exit_2(tmp_path):
    code, _, err = call(["condnum", "--out", str(tmp_path / "no" / "dir" / "x.csv"), "--qmax", "1", "--reps", "1"])
    assert code == 2 and "cannot write" in err


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nbasis = hermite-poly\nqmax = 3\nreps = 2\nseed = 5\n")
    code, out, _ = call(["condnum", "--config", str(cfg), "--reps", "4"])
    assert code == 0
    assert "# basis=hermite-poly" in out and "# reps=4" in out and "# seed=5" in out
    _, rows = data_rows(out)
    assert len(rows) == 4
    cfg.write_text("bogus = 1\n")
    assert call(["condnum", "--config", str(cfg)])[0] == 1
    cfg.write_text("no equals sign\n")
    assert call(["condnum", "--config", str(cfg)])[0] == 1


@pytest.mark.parametrize("argv", [
    ["condnum", "--qmax", "6", "--reps", "5", "--seed", "11"],
    ["converge", "--qmin", "2", "--qmax", "8", "--scaling", "quantile", "--M", "3", "--mu", "0.98", "--p", "6"],
    ["uq-ode", "--qmin", "4", "--qmax", "10"],
])
def test_determinism_across_threads(argv):
    a = call(argv + ["--threads", "1", "--deterministic"])
    b = call(argv + ["--threads", "4", "--deterministic"])
    assert a[0] == 0 and a[1] == b[1]


def test_timestamp_flag():
    _, out, _ = call(["condnum", "--qmax", "1", "--reps", "1", "--timestamp"])
    assert "# timestamp=" in out
    _, out, _ = call(["condnum", "--qmax", "1", "--reps", "1", "--timestamp", "--deterministic"])
    assert "# timestamp=" not in out


def test_selftest():
    code, out, _ = call(["selftest"])
    assert code == 0 and "FAIL" not in out and out.count("PASS") >= 5


def test_uq_elliptic_cli():
    code, out, _ = call(["uq-elliptic", "--model", "single", "--x0", "0.5", "--qmin", "2", "--qmax", "4",
                         "--n-elems", "64"])
    assert code == 0
    header, rows = data_rows(out)
    assert header[-1] == "status" and len(rows) == 3


def test_main_entry_point(capsys):
    assert main(["selftest"]) == 0
    assert main(["--version"]) == 0
    assert "unboundlsq" in capsys.readouterr().out
