import json

import pytest

from profitmax.cli import CSV_COLUMNS, main

DEMO_EDGE_TEXT = "# demo graph\n1 2 0.3\n1 4 0.4\n2 4 0.2\n3 4 0.3\n"
DEMO_WEIGHT_TEXT = "1 1.5 1\n2 2 1\n3 3 1\n4 2 5\n"


@pytest.fixture
def demo_files(tmp_path):
    edges = tmp_path / "demo.edges"
    weights = tmp_path / "demo.weights"
    edges.write_text(DEMO_EDGE_TEXT, encoding="utf-8")
    weights.write_text(DEMO_WEIGHT_TEXT, encoding="utf-8")
    return str(edges), str(weights)


def read_rows(path):
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0].startswith("# profitmax-csv v1 config=")
    assert lines[1] == ",".join(CSV_COLUMNS)
    return [dict(zip(CSV_COLUMNS, line.split(","))) for line in lines[2:]]


def rows_without_timing(path):
    rows = read_rows(path)
    for row in rows:
        row["time_select_ms"] = row["time_rr_ms"] = "0"
    return rows


class TestGenWeights:
    def test_writes_policy_weights(self, demo_files, tmp_path):
        edges, _ = demo_files
        out = tmp_path / "gen.weights"
        assert main(["gen-weights", "--graph", edges, "--r", "2",
                     "--out", str(out)]) == 0
        rows = [line.split() for line in out.read_text().strip().splitlines()]
        assert [r[0] for r in rows] == ["1", "2", "3", "4"]
        costs = [float(r[2]) for r in rows]
        assert costs == [4.0, 2.0, 2.0, 0.0]

    def test_requires_out(self, demo_files, capsys):
        edges, _ = demo_files
        assert main(["gen-weights", "--graph", edges]) == 2


class TestPrune:
    def test_exact_summary_row(self, demo_files, tmp_path, capsys):
        edges, weights = demo_files
        out = tmp_path / "lattice.json"
        code = main(["prune", "--graph", edges, "--weights", weights,
                     "--exact", "--no-norm", "--seed", "1", "--out", str(out)])
        assert code == 0
        assert capsys.readouterr().out.strip() == "4,1,3,2,50.0%"
        doc = json.loads(out.read_text())
        assert doc["must_include"] == [3]
        assert doc["may_include"] == [1, 2, 3]

    def test_sampled_mode(self, demo_files, capsys):
        edges, weights = demo_files
        code = main(["prune", "--graph", edges, "--weights", weights,
                     "--theta", "20000", "--no-norm", "--seed", "1"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "4,1,3,2,50.0%"

    def test_normalization_cannot_reduce_less(self, demo_files, capsys):
        edges, weights = demo_files
        main(["prune", "--graph", edges, "--weights", weights, "--exact",
              "--no-norm", "--seed", "1"])
        raw = float(capsys.readouterr().out.strip().split(",")[-1].rstrip("%"))
        main(["prune", "--graph", edges, "--weights", weights, "--exact",
              "--seed", "1"])
        norm = float(capsys.readouterr().out.strip().split(",")[-1].rstrip("%"))
        assert norm >= raw


class TestSelect:
    def test_exact_heuristics_find_optimum(self, demo_files, tmp_path):
        edges, weights = demo_files
        csv = tmp_path / "select.csv"
        code = main(["select", "--graph", edges, "--weights", weights,
                     "--exact", "--no-norm", "--algo", "greedy,modmod1,modmod2",
                     "--seed", "1", "--out-dir", str(tmp_path / "seeds"),
                     "--csv", str(csv)])
        assert code == 0
        rows = read_rows(csv)
        assert [r["algo"] for r in rows] == ["greedy", "modmod1", "modmod2"]
        for row in rows:
            assert row["seeds_count"] == "2"
            assert float(row["profit"]) == pytest.approx(1.68, abs=1e-9)
            assert row["guarantee"] == ""
        doc = json.loads((tmp_path / "seeds" / "seeds_greedy_theta640000.json").read_text())
        assert doc["seeds"] == [2, 3]

    def test_reproducible_modulo_timing(self, demo_files, tmp_path):
        edges, weights = demo_files
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["select", "--graph", edges, "--weights", weights, "--theta",
                "2000", "--algo", "greedy,random", "--seed", "42",
                "--out-dir", str(tmp_path / "s")]
        assert main(args + ["--csv", str(a)]) == 0
        assert main(args + ["--csv", str(b)]) == 0
        assert rows_without_timing(a) == rows_without_timing(b)

    def test_unknown_algorithm(self, demo_files):
        edges, weights = demo_files
        assert main(["select", "--graph", edges, "--weights", weights,
                     "--algo", "pagerank", "--seed", "1"]) == 2


class TestCertify:
    def test_pipeline(self, demo_files, tmp_path, capsys):
        edges, weights = demo_files
        lattice = tmp_path / "lattice.json"
        main(["prune", "--graph", edges, "--weights", weights, "--exact",
              "--no-norm", "--seed", "1", "--out", str(lattice)])
        main(["select", "--graph", edges, "--weights", weights, "--exact",
              "--no-norm", "--algo", "greedy", "--seed", "1",
              "--out-dir", str(tmp_path)])
        capsys.readouterr()
        cert_json = tmp_path / "cert.json"
        cert_csv = tmp_path / "cert.csv"
        code = main(["certify", "--graph", edges, "--weights", weights,
                     "--no-norm", "--seeds",
                     str(tmp_path / "seeds_greedy_theta640000.json"),
                     "--lattice", str(lattice), "--theta", "50000",
                     "--delta", "0.001", "--seed", "1",
                     "--out", str(cert_json), "--csv", str(cert_csv)])
        assert code == 0
        line = capsys.readouterr().out.strip().splitlines()[0]
        assert line.startswith("guarantee=")
        doc = json.loads(cert_json.read_text())
        assert doc["beta_lower"] <= doc["beta_upper"]
        assert doc["gamma_lower"] <= doc["gamma_upper"]
        assert doc["guarantee"] > 0.5
        rows = read_rows(cert_csv)
        assert rows[0]["algo"] == "greedy"
        assert rows[0]["guarantee"] != ""

    def test_missing_seeds_file_is_io_error(self, demo_files, tmp_path):
        edges, weights = demo_files
        assert main(["certify", "--graph", edges, "--weights", weights,
                     "--seeds", str(tmp_path / "absent.json"),
                     "--seed", "1"]) == 3


class TestExperiment:
    def test_full_matrix_row_count(self, demo_files, tmp_path):
        edges, weights = demo_files
        csv = tmp_path / "exp.csv"
        code = main(["experiment", "--graph", edges, "--weights", weights,
                     "--theta", "400,800", "--algo", "greedy,highdegree",
                     "--delta", "0.01", "--seed", "3", "--csv", str(csv)])
        assert code == 0
        rows = read_rows(csv)
        assert len(rows) == 16  # 2 thetas x 2 algorithms x prune x norm
        combos = {(r["theta"], r["algo"], r["prune"], r["norm"]) for r in rows}
        assert len(combos) == 16
        assert all(r["guarantee"] != "" for r in rows)

    def test_deterministic_rerun(self, demo_files, tmp_path):
        edges, weights = demo_files
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["experiment", "--graph", edges, "--weights", weights,
                "--theta", "500", "--algo", "greedy", "--delta", "0.01",
                "--seed", "9"]
        assert main(args + ["--csv", str(a)]) == 0
        assert main(args + ["--csv", str(b)]) == 0
        assert rows_without_timing(a) == rows_without_timing(b)

    def test_parallel_rows_match_sequential(self, demo_files, tmp_path):
        edges, weights = demo_files
        seq, par = tmp_path / "seq.csv", tmp_path / "par.csv"
        args = ["experiment", "--graph", edges, "--weights", weights,
                "--theta", "300", "--algo", "greedy,highdegree",
                "--delta", "0.01", "--seed", "5"]
        assert main(args + ["--csv", str(seq)]) == 0
        assert main(args + ["--jobs", "2", "--csv", str(par)]) == 0
        assert rows_without_timing(seq) == rows_without_timing(par)

    def test_row_failures_recorded_and_run_continues(self, tmp_path, capsys):
        # exact mode on a 21-edge graph exceeds the oracle cap in every row;
        # the matrix must still be written, with empty result fields
        lines = "\n".join(f"0 {i + 1} 0.5" for i in range(21))
        big = tmp_path / "big.edges"
        big.write_text(lines + "\n", encoding="utf-8")
        csv_path = tmp_path / "exp.csv"
        code = main(["experiment", "--graph", str(big), "--exact",
                     "--cost-dist", "uniform", "--algo", "greedy",
                     "--seed", "2", "--csv", str(csv_path)])
        assert code == 0
        rows = read_rows(csv_path)
        assert len(rows) == 4
        assert all(r["profit"] == "" and r["guarantee"] == "" for r in rows)
        assert "failed" in capsys.readouterr().err


class TestConfigFile:
    def test_file_values_and_flag_override(self, demo_files, tmp_path, capsys):
        edges, weights = demo_files
        config = tmp_path / "run.cfg"
        config.write_text(
            f"graph = {edges}\nweights = {weights}\n"
            "exact = true\nno-norm = true\nseed = 1\n# comment\n",
            encoding="utf-8")
        assert main(["prune", "--config", str(config)]) == 0
        assert capsys.readouterr().out.strip() == "4,1,3,2,50.0%"
        # flag overrides the file: normalization back on
        assert main(["prune", "--config", str(config), "--seed", "2"]) == 0

    def test_unknown_key_rejected(self, demo_files, tmp_path):
        edges, _ = demo_files
        config = tmp_path / "bad.cfg"
        config.write_text("nonsense = 1\n", encoding="utf-8")
        assert main(["prune", "--config", str(config), "--graph", edges]) == 2


class TestExitCodes:
    def test_missing_graph_file(self, tmp_path):
        assert main(["prune", "--graph", str(tmp_path / "absent.txt"),
                     "--seed", "1"]) == 3

    def test_bad_delta_is_config_error(self, demo_files):
        edges, weights = demo_files
        assert main(["select", "--graph", edges, "--weights", weights,
                     "--delta", "2.0", "--seed", "1"]) == 2

    def test_capacity_error(self, tmp_path):
        lines = "\n".join(f"0 {i + 1} 0.5" for i in range(21))
        big = tmp_path / "big.edges"
        big.write_text(lines + "\n", encoding="utf-8")
        assert main(["prune", "--graph", big.as_posix(), "--exact",
                     "--cost-dist", "uniform", "--seed", "1"]) == 4

    def test_malformed_graph_is_input_error(self, tmp_path):
        bad = tmp_path / "bad.edges"
        bad.write_text("0 1 haha\n", encoding="utf-8")
        assert main(["prune", "--graph", str(bad), "--seed", "1"]) == 2
