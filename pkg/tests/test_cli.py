"""Command-line behavior: exit codes, config handling, output plumbing."""

import numpy as np
import pytest

import saddlemg.cli as cli
from saddlemg.experiments import CellResult
from saddlemg.reporting import CSV_FIELDS


def _fake_cells(converged=True):
    out = []
    for t, it in zip((5, 6), (17, 16)):
        n = 2 ** t + 1
        out.append(CellResult(table=1, t=t, N=9 * n * n, cycle="tgm", pre=0,
                              post=1, omega_pre=0.8, omega_post=0.8,
                              smoother="jacobi", iterations=it,
                              final_relres=4.1e-07, seconds=0.2,
                              reference=it, tolerance=2,
                              converged=converged))
    return out


def test_no_subcommand_is_usage_error(capsys):
    assert cli.main([]) == cli.EXIT_USAGE


def test_bad_subcommand_exits_one():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == cli.EXIT_USAGE


def test_solve_argument_screening(capsys):
    assert cli.main(["solve"]) == cli.EXIT_USAGE
    assert cli.main(["solve", "--t", "1"]) == cli.EXIT_USAGE
    assert cli.main(["solve", "--t", "3", "--pre", "0", "--post", "0"]) \
        == cli.EXIT_USAGE
    assert cli.main(["solve", "--t", "3", "--tol", "0"]) == cli.EXIT_USAGE
    # outside the proven parameter ranges
    assert cli.main(["solve", "--t", "3", "--alpha", "2.0"]) \
        == cli.EXIT_USAGE
    assert cli.main(["solve", "--t", "3", "--omega-post", "0.95"]) \
        == cli.EXIT_USAGE
    capsys.readouterr()


def test_force_bypasses_range_checks(capsys):
    rc = cli.main(["solve", "--t", "3", "--omega-post", "0.95",
                   "--max-iter", "60", "--force"])
    assert rc in (cli.EXIT_OK, cli.EXIT_NOT_CONVERGED)
    capsys.readouterr()


def test_solve_prints_csv_row(capsys):
    assert cli.main(["solve", "--t", "3"]) == cli.EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert ",".join(CSV_FIELDS) in out
    row = out[out.index(",".join(CSV_FIELDS)) + 1].split(",")
    assert row[0] == "custom" and row[1] == "3"
    assert int(row[CSV_FIELDS.index("iterations")]) > 0
    assert "np.float64" not in " ".join(row)


def test_solve_nonconverged_exit(capsys):
    rc = cli.main(["solve", "--t", "3", "--max-iter", "2"])
    assert rc == cli.EXIT_NOT_CONVERGED
    assert "did not converge" in capsys.readouterr().err


def test_solve_history_and_hierarchy(capsys):
    rc = cli.main(["solve", "--t", "3", "--history", "--show-hierarchy"])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "iter,relres" in out
    assert "omega_pressure" in out
    first = out.splitlines()[out.splitlines().index("iter,relres") + 1]
    k, rel = first.split(",")
    assert k == "1" and float(rel) > 0


def test_solve_dump_matrix(tmp_path, capsys):
    target = tmp_path / "system.txt"
    rc = cli.main(["solve", "--t", "3", "--dump-matrix", str(target)])
    assert rc == cli.EXIT_OK
    lines = target.read_text().splitlines()
    assert len(lines) > 1
    i, j, v = lines[1].split()
    assert int(i) >= 1 and int(j) >= 1
    float(v)
    capsys.readouterr()


def test_solve_vanka_path(capsys):
    rc = cli.main(["solve", "--t", "4", "--smoother", "vanka", "--cycle",
                   "v", "--pre", "1", "--post", "1"])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out
    row = out.splitlines()[-1].split(",")
    assert row[CSV_FIELDS.index("smoother")] == "vanka"


def test_config_fills_and_flags_win(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample\npost = 3\nomega-post = 0.7\nmax-iter = 150\n")
    rc = cli.main(["solve", "--t", "3", "--post", "2",
                   "--config", str(cfg)])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out.splitlines()
    row = out[out.index(",".join(CSV_FIELDS)) + 1].split(",")
    assert row[CSV_FIELDS.index("post")] == "2"  # flag beats config
    assert row[CSV_FIELDS.index("omega_post")] == "0.7"


def test_config_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 1\n")
    assert cli.main(["solve", "--t", "3", "--config", str(cfg)]) \
        == cli.EXIT_USAGE
    capsys.readouterr()


def test_reproduce_requires_table(capsys):
    assert cli.main(["reproduce"]) == cli.EXIT_USAGE
    capsys.readouterr()


def test_reproduce_prints_rows_and_diffs(monkeypatch, capsys, tmp_path):
    monkeypatch.setattr(cli, "run_table", lambda table: _fake_cells())
    out_csv = tmp_path / "t1.csv"
    rc = cli.main(["reproduce", "--table", "1", "--out", str(out_csv)])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith(",".join(CSV_FIELDS))
    assert "published" in out
    assert out_csv.exists()
    assert (tmp_path / "t1.png").exists()


def test_reproduce_nonconverged_exit(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_table",
                        lambda table: _fake_cells(converged=False))
    assert cli.main(["reproduce", "--table", "1"]) \
        == cli.EXIT_NOT_CONVERGED
    capsys.readouterr()


def test_analyze_zero_report(capsys):
    assert cli.main(["analyze", "--symbol", "fA", "--grid", "32"]) \
        == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "zero at (0, 0)" in out
    assert "order 2.0" in out


def test_analyze_schur_sup(capsys):
    assert cli.main(["analyze", "--symbol", "fS", "--grid", "32"]) \
        == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "grid sup: 0.25" in out
    assert "skipped: 1" in out


def test_analyze_projector(capsys):
    assert cli.main(["analyze", "--symbol", "p4", "--grid", "16"]) \
        == cli.EXIT_OK
    assert "certified: True" in capsys.readouterr().out


def test_analyze_out_writes_report_and_symbol(tmp_path, capsys):
    out_csv = tmp_path / "fa.csv"
    rc = cli.main(["analyze", "--symbol", "fA", "--grid", "16",
                   "--out", str(out_csv)])
    assert rc == cli.EXIT_OK
    assert out_csv.exists()
    sym = tmp_path / "fa.symbol.txt"
    assert sym.exists()
    assert sym.read_text().splitlines()[0] == "2 4 4"
    capsys.readouterr()


def test_analyze_requires_symbol(capsys):
    assert cli.main(["analyze"]) == cli.EXIT_USAGE
    capsys.readouterr()
