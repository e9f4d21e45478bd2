import pytest

from etpa.cli import main
from etpa.config import dump_config, with_overrides
from etpa.report import parse_report


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def small_cfg_file(tmp_path, small_cfg):
    p = tmp_path / "small.cfg"
    p.write_text(dump_config(small_cfg))
    return str(p)


def test_predict_writes_machine_report(tmp_path, capsys):
    out = tmp_path / "p.txt"
    code, text, _ = run(["predict", "--out", str(out)], capsys)
    assert code == 0 and "etpa_rate" in text
    rep = parse_report(out.read_text())
    value, err, unit = rep["etpa_rate"]
    assert value == pytest.approx(2.2e-6, rel=0.01) and unit == "s^-1"


def test_predict_and_bound_rerun_identical(tmp_path, capsys):
    for cmd in ("predict", "bound"):
        a, b = tmp_path / f"{cmd}1", tmp_path / f"{cmd}2"
        run([cmd, "--out", str(a)], capsys)
        run([cmd, "--out", str(b)], capsys)
        assert a.read_bytes() == b.read_bytes()


def test_bound_threshold_flag(tmp_path, capsys):
    out = tmp_path / "b.txt"
    run(["bound", "--threshold", "0.7", "--threshold-err", "0.1", "--out", str(out)], capsys)
    value, err, _ = parse_report(out.read_text())["bound"]
    assert value == pytest.approx(3.19e5, rel=0.01)


def test_simulate_fit_klyshko_chain(tmp_path, capsys, small_cfg_file):
    csv = tmp_path / "sweep.csv"
    code, _, _ = run(["simulate", "--config", small_cfg_file, "--knob", "pump", "--start", "0.1",
                      "--stop", "1", "--points", "8", "--seed", "42", "--duration", "0.5",
                      "--out", str(csv)], capsys)
    assert code == 0
    first = csv.read_bytes()
    run(["simulate", "--config", small_cfg_file, "--knob", "pump", "--start", "0.1",
         "--stop", "1", "--points", "8", "--seed", "42", "--duration", "0.5",
         "--out", str(csv)], capsys)
    assert csv.read_bytes() == first
    assert len(first.decode().splitlines()) == 10

    plot = tmp_path / "plot.csv"
    code, text, _ = run(["fit", str(csv), "--plot-data", str(plot)], capsys)
    assert code == 0 and "linear" in text
    assert plot.read_text().startswith("# schema=1")

    code, text, _ = run(["klyshko", "--config", small_cfg_file, str(csv)], capsys)
    assert code == 0 and "pair_rate_bound" in text


def test_validation_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("# schema=1\npump_power_w,counts,duration_s,attenuation,dark_counts\n"
                   "0.1,abc,1,1,0\n")
    code, _, err = run(["fit", str(bad)], capsys)
    assert code == 2 and "line 3" in err and "counts" in err


def test_config_validation_exit_code(tmp_path, capsys):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("")
    code, _, err = run(["predict", "--config", str(cfg)], capsys)
    assert code == 2 and "pair_rate_per_watt" in err


def test_domain_exit_code(tmp_path, capsys, ref_cfg):
    cfg = tmp_path / "zero.cfg"
    cfg.write_text(dump_config(with_overrides(ref_cfg, "cell", concentration_mmol_per_l=0.0)))
    code, _, _ = run(["bound", "--config", str(cfg)], capsys)
    assert code == 3


def test_io_exit_code(capsys):
    code, _, _ = run(["fit", "/nonexistent/table.csv"], capsys)
    assert code == 4


def test_simulate_needs_range(capsys):
    code, _, _ = run(["simulate", "--knob", "pump"], capsys)
    assert code == 2


def test_simulate_zero_duration(capsys, small_cfg_file):
    code, _, _ = run(["simulate", "--config", small_cfg_file, "--values", "1", "--duration", "0"],
                     capsys)
    assert code == 2


def test_show_config_roundtrip(tmp_path, capsys, ref_cfg):
    out = tmp_path / "resolved.cfg"
    assert main(["show-config", "--out", str(out)]) == 0
    from etpa.config import load_config
    assert load_config(str(out)) == ref_cfg
