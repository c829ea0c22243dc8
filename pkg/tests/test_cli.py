import csv

import pytest

from lrsec import circuits as cc, codes
from lrsec.cli import main, read_config


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_code_builtin(capsys):
    code, out, _ = run(["code", "gross"], capsys)
    assert code == 0 and "n=144 k=12" in out


def test_code_hgp_and_save(tmp_path, capsys):
    path = tmp_path / "c"
    code, out, _ = run(["code", "hgp", "--a", "rep3", "--b", "rep3", "--save", str(path)], capsys)
    assert code == 0 and "n=13 k=1" in out
    code, out, _ = run(["code", str(path)], capsys)
    assert code == 0 and "n=13 k=1" in out


def test_code_bb_matches_gross(capsys):
    code, out, _ = run(["code", "bb", "--l", "12", "--m", "6", "--a", "3,0 0,1 0,2", "--b", "0,3 1,0 2,0"], capsys)
    assert code == 0 and "n=144 k=12" in out


def test_unknown_code_is_usage_error(capsys):
    code, _, err = run(["code", "nope"], capsys)
    assert code == 2 and "error" in err
    code, _, _ = run(["design", "--code", "nope"], capsys)
    assert code == 2


def test_argparse_errors_exit_two(capsys):
    code, _, _ = run(["simulate"], capsys)
    assert code == 2


def test_design_emit_and_distance(tmp_path, capsys):
    emit = tmp_path / "out"
    code, out, _ = run(["design", "--code", "hgp13", "--cap", "20", "--emit", str(emit)], capsys)
    assert code == 0 and "depth=6" in out
    assert out.splitlines()[0] == "# seed=0"
    for name in ("schedule.txt", "memory_X.stim", "memory_Z.stim"):
        assert (emit / name).exists()
    circ, noise = cc.parse_circuit_text((emit / "memory_Z.stim").read_text())
    assert cc.check_deterministic(circ) and noise.p == 1e-3
    dem_path = tmp_path / "dem.txt"
    code, out, _ = run(["distance", "--circuit", str(emit / "memory_Z.stim"), "--w-max", "3",
                        "--dem-out", str(dem_path)], capsys)
    assert code == 0 and out.splitlines()[-1].startswith("exact 3")
    assert dem_path.read_text().startswith("error(")
    code, out, _ = run(["distance", "--circuit", str(emit / "memory_Z.stim"), "--w-max", "2"], capsys)
    assert out.splitlines()[-1] == ">2"


def test_distance_missing_circuit(capsys):
    code, _, _ = run(["distance", "--circuit", "/nonexistent.stim"], capsys)
    assert code == 2


def test_design_report_to_file(tmp_path, capsys):
    out_path = tmp_path / "r.csv"
    code, _, _ = run(["design", "--code", "steane", "--partition", "search", "--cap", "10",
                      "--out", str(out_path)], capsys)
    assert code == 0
    rows = list(csv.reader(open(out_path)))
    assert rows[0][:3] == ["candidate_id", "delta_min", "tau_a"] and len(rows) == 11


def test_simulate_csv(tmp_path, capsys):
    out_path = tmp_path / "s.csv"
    code, _, _ = run(["simulate", "--code", "hgp13", "--p", "0,0.002", "--shots", "200", "--rounds", "2",
                      "--max-iter", "20", "--out", str(out_path)], capsys)
    assert code == 0
    rows = list(csv.DictReader(open(out_path)))
    assert len(rows) == 4
    assert rows[0]["failures"] == "0" and rows[1]["failures"] == "0"


def test_config_defaults_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# defaults\ncap = 5\ncoloring = minimal\n")
    out_path = tmp_path / "r.csv"
    code, _, _ = run(["design", "--code", "hgp13", "--config", str(cfg), "--out", str(out_path)], capsys)
    assert code == 0
    assert len(out_path.read_text().splitlines()) == 6
    code, _, _ = run(["design", "--code", "hgp13", "--config", str(cfg), "--cap", "3", "--out", str(out_path)],
                     capsys)
    assert len(out_path.read_text().splitlines()) == 4


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("bogus = 1\n")
    code, _, err = run(["design", "--code", "hgp13", "--config", str(cfg)], capsys)
    assert code == 2 and "bogus" in err


def test_read_config_rejects_bad_line(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("no equals sign\n")
    with pytest.raises(Exception):
        read_config(cfg)


def test_analyze_extended(capsys):
    code, out, _ = run(["analyze", "extended", "--code", "steane", "--schedule", "alternating"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert "pauli,residuals,d_ext,exact" in lines


def test_code_lifted_product(capsys):
    code, out, _ = run(["code", "lp"], capsys)
    assert code == 0 and "n=126 k=8" in out
