import json

import pytest

from s5p.cli import main

from conftest import write_edge_file


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def last_json(stdout: str):
    return json.loads(stdout.strip().splitlines()[-1])


def triangle(tmp_path):
    return write_edge_file(tmp_path / "tri.txt", [(0, 1), (1, 2), (0, 2)])


def chain(tmp_path, n=30):
    return write_edge_file(tmp_path / "chain.txt",
                           [(i, i + 1) for i in range(n)] + [(0, j) for j in range(2, 12)])


def test_partition_triangle_k1(tmp_path, capsys):
    path = triangle(tmp_path)
    code, out, _ = run_cli(capsys, "partition", "--input", path, "--k", "1",
                           "--deterministic")
    assert code == 0
    payload = last_json(out)
    assert payload["rf"] == 1.0
    assert (tmp_path / "tri.txt.parts").exists()
    assert (tmp_path / "tri.txt.parts.metrics.json").exists()


def test_partition_deterministic_bytes(tmp_path, capsys):
    path = chain(tmp_path)
    outs = []
    for i in range(2):
        out_path = tmp_path / f"o{i}.parts"
        code, _, _ = run_cli(capsys, "partition", "--input", path, "--k", "3",
                             "--seed", "9", "--deterministic",
                             "--output", str(out_path))
        assert code == 0
        outs.append(out_path.read_bytes())
    assert outs[0] == outs[1]


def test_metrics_recomputation_matches(tmp_path, capsys):
    path = chain(tmp_path)
    out_path = tmp_path / "c.parts"
    code, out, _ = run_cli(capsys, "partition", "--input", path, "--k", "3",
                           "--deterministic", "--output", str(out_path))
    assert code == 0
    rf_run = last_json(out)["rf"]
    code, out, _ = run_cli(capsys, "metrics", "--edges", path,
                           "--partition", str(out_path))
    assert code == 0
    payload = json.loads(out)
    assert payload["rf"] == pytest.approx(rf_run)
    assert len(payload["loads"]) == 3


def test_metrics_black_box_k_inference(tmp_path, capsys):
    path = write_edge_file(tmp_path / "g.txt", [(0, 1), (1, 2), (2, 3)])
    parts = tmp_path / "g.parts"
    parts.write_text("0 1 0\n1 2 1\n2 3 4\n")
    code, out, _ = run_cli(capsys, "metrics", "--edges", path,
                           "--partition", str(parts))
    assert code == 0
    assert len(json.loads(out)["loads"]) == 5


def test_metrics_tampered_file_errors(tmp_path, capsys):
    path = chain(tmp_path)
    out_path = tmp_path / "c.parts"
    run_cli(capsys, "partition", "--input", path, "--k", "2",
            "--deterministic", "--output", str(out_path))
    lines = out_path.read_text().splitlines()
    out_path.write_text("\n".join(lines[:-1]) + "\n")
    code, _, err = run_cli(capsys, "metrics", "--edges", path,
                           "--partition", str(out_path))
    assert code == 2
    assert "error" in err


def test_metrics_binary_partition(tmp_path, capsys):
    path = chain(tmp_path)
    out_path = tmp_path / "c.bparts"
    code, out, _ = run_cli(capsys, "partition", "--input", path, "--k", "3",
                           "--deterministic", "--output", str(out_path),
                           "--format", "binary")
    assert code == 0
    rf_run = last_json(out)["rf"]
    code, out, _ = run_cli(capsys, "metrics", "--edges", path,
                           "--partition", str(out_path))
    assert code == 0
    assert json.loads(out)["rf"] == pytest.approx(rf_run)


def test_gen_rmat_cli(tmp_path, capsys):
    out_path = tmp_path / "r.txt"
    code, out, _ = run_cli(capsys, "gen-rmat", "--out", str(out_path),
                           "--scale", "8", "--edges", "200", "--seed", "5")
    assert code == 0
    assert json.loads(out)["edges"] == 200
    assert len(out_path.read_text().splitlines()) == 200


def test_oracle_rf_cli(tmp_path, capsys):
    path = triangle(tmp_path)
    code, out, _ = run_cli(capsys, "oracle-rf", "--input", path, "--k", "3")
    assert code == 0
    payload = json.loads(out)
    assert payload["opt_rf"] == 1.0


def test_oracle_rf_guard_exit_2(tmp_path, capsys):
    path = write_edge_file(tmp_path / "big.txt", [(i, i + 1) for i in range(20)])
    code, _, err = run_cli(capsys, "oracle-rf", "--input", path, "--k", "8")
    assert code == 2
    assert "error" in err


def test_oracle_welfare_cli(tmp_path, capsys):
    path = chain(tmp_path, n=8)
    code, out, _ = run_cli(capsys, "oracle-welfare", "--input", path,
                           "--k", "2", "--theta", "exact", "--deterministic")
    assert code == 0
    payload = json.loads(out)
    assert payload["ratio"] <= payload["poa_bound"] + 1e-9
    assert payload["converged"]


def test_compare_two_algorithms(tmp_path, capsys):
    path = chain(tmp_path)
    out_dir = tmp_path / "cmp"
    code, out, _ = run_cli(capsys, "compare", "--input", path,
                           "--algorithms", "s5p,dbh", "--k", "3",
                           "--deterministic", "--out-dir", str(out_dir),
                           "--degree-dump")
    assert code == 0
    assert "s5p" in out and "dbh" in out
    assert (out_dir / "compare.tsv").exists()
    assert (out_dir / "compare.json").exists()
    assert (out_dir / "rf.png").exists()
    assert (out_dir / "loads.png").exists()
    assert (out_dir / "degree_rf.png").exists()
    assert (out_dir / "s5p.degree_rf.tsv").exists()
    rows = json.loads((out_dir / "compare.json").read_text())
    assert [r["algorithm"] for r in rows] == ["s5p", "dbh"]
    # Row metrics round-trip through the metrics command.
    code, out, _ = run_cli(capsys, "metrics", "--edges", path,
                           "--partition", str(out_dir / "s5p.parts"))
    assert code == 0
    assert json.loads(out)["rf"] == pytest.approx(rows[0]["rf"])


def test_compare_requires_two_algorithms(tmp_path, capsys):
    path = triangle(tmp_path)
    code, _, err = run_cli(capsys, "compare", "--input", path,
                           "--algorithms", "s5p", "--out-dir", str(tmp_path / "x"))
    assert code == 2
    assert "two algorithms" in err


def test_usage_error_exit_1(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["partition"])  # missing --input
    assert exc.value.code == 1


def test_unknown_command_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_missing_input_file_exit_2(tmp_path, capsys):
    code, _, err = run_cli(capsys, "partition", "--input",
                           str(tmp_path / "nope.txt"), "--k", "2")
    assert code == 2
    assert "error" in err


def test_log_env_round_lines(tmp_path, capsys, monkeypatch, caplog):
    import logging
    path = chain(tmp_path)
    monkeypatch.setenv("S5P_LOG", "info")
    with caplog.at_level(logging.INFO, logger="s5p.game"):
        code, _, _ = run_cli(capsys, "partition", "--input", path, "--k", "3",
                             "--deterministic")
    assert code == 0
    round_lines = [r for r in caplog.records if r.name == "s5p.game"
                   and "round=" in r.getMessage()]
    assert round_lines
