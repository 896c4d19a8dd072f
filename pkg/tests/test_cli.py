import pytest

from bnorder import Dag, Pdag
from bnorder.cli import format_graph, main, parse_graph_text

from conftest import network_path


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestGraphText:
    def test_format_directed_and_undirected(self):
        pdag = Pdag(("A", "B", "C"), [("B", "A")], [("B", "C")])
        text = format_graph(pdag)
        assert text == "nodes: A, B, C\nB -> A\nB -- C\n"

    def test_round_trip_dag(self):
        dag = Dag(("X", "Y", "Z"), {("X", "Y"), ("Y", "Z")})
        back = parse_graph_text(format_graph(dag))
        assert isinstance(back, Dag)
        assert back.edges == dag.edges

    def test_round_trip_pdag(self):
        pdag = Pdag(("A", "B", "C"), [("A", "C")], [("A", "B")])
        back = parse_graph_text(format_graph(pdag))
        assert isinstance(back, Pdag)
        assert back.directed == pdag.directed
        assert back.undirected == pdag.undirected

    def test_isolated_nodes_survive(self):
        dag = Dag(("A", "B", "C"), set())
        back = parse_graph_text(format_graph(dag))
        assert set(back.nodes) == {"A", "B", "C"}

    def test_directed_cycle_parses_as_partially_directed(self):
        text = "nodes: A, B, C\nA -> B\nB -> C\nC -> A\n"
        assert isinstance(parse_graph_text(text), Pdag)

    def test_unknown_node_rejected(self):
        with pytest.raises(ValueError):
            parse_graph_text("nodes: A, B\nA -> C\n")


class TestExitCodes:
    def test_no_subcommand_is_usage_error(self, capsys):
        code, _, _ = run_cli(capsys)
        assert code == 1

    def test_unknown_flag_is_usage_error(self, capsys):
        code, _, _ = run_cli(
            capsys, "sample", network_path("collider"), "--frobnicate"
        )
        assert code == 1

    def test_missing_input_file_is_input_error(self, capsys):
        code, _, err = run_cli(
            capsys, "sample", "/nonexistent.bif", "--n", "10"
        )
        assert code == 2
        assert err.strip()

    def test_malformed_dataset_is_input_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("A,B\n")
        code, _, _ = run_cli(capsys, "learn", str(bad))
        assert code == 2


class TestSampleLearnEval:
    def test_pipeline(self, capsys, tmp_path):
        data = tmp_path / "rows.csv"
        graph = tmp_path / "graph.txt"
        trace = tmp_path / "trace.csv"

        code, _, _ = run_cli(
            capsys,
            "sample",
            network_path("collider"),
            "--n",
            "2000",
            "--seed",
            "3",
            "--out",
            str(data),
        )
        assert code == 0
        header = data.read_text().splitlines()[0]
        assert header == "A,B,C"

        code, _, _ = run_cli(
            capsys,
            "learn",
            str(data),
            "--algo",
            "hc",
            "--out",
            str(graph),
            "--trace-out",
            str(trace),
        )
        assert code == 0
        learnt = parse_graph_text(graph.read_text())
        assert learnt.skeleton() == frozenset({("A", "C"), ("B", "C")})

        trace_lines = trace.read_text().splitlines()
        assert trace_lines[0] == (
            "iteration,kind,from,to,delta,tied_count,arbitrary"
        )
        assert len(trace_lines) >= 3
        first = trace_lines[1].split(",")
        assert first[0] == "1"
        assert first[1] == "add"
        assert first[6] == "true"

        code, out, _ = run_cli(
            capsys, "eval", str(graph), network_path("collider")
        )
        assert code == 0
        values = dict(
            line.split("=", 1) for line in out.strip().splitlines()
        )
        assert values["tp"] == "2"
        assert values["shd"] == "0"
        assert values["f1"] == "1.000000"

    def test_sample_to_stdout(self, capsys):
        code, out, _ = run_cli(
            capsys, "sample", network_path("collider"), "--n", "3"
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "A,B,C"
        assert len(lines) == 4

    def test_learn_pcstable_writes_empty_trace(self, capsys, tmp_path):
        data = tmp_path / "rows.csv"
        trace = tmp_path / "trace.csv"
        run_cli(
            capsys,
            "sample",
            network_path("collider"),
            "--n",
            "500",
            "--out",
            str(data),
        )
        code, _, _ = run_cli(
            capsys,
            "learn",
            str(data),
            "--algo",
            "pcstable",
            "--trace-out",
            str(trace),
        )
        assert code == 0
        assert trace.read_text().splitlines() == [
            "iteration,kind,from,to,delta,tied_count,arbitrary"
        ]


class TestBenchAndStats:
    @pytest.fixture()
    def results_csv(self, capsys, tmp_path):
        cfg = tmp_path / "exp.cfg"
        out = tmp_path / "results.csv"
        cfg.write_text(
            f"networks = {network_path('collider')}\n"
            "sample_sizes = 100, 1000\n"
            "seeds = 1, 2\n"
            "orderings = alphabetic, optimal, worst\n"
            f"output = {out}\n"
        )
        code, _, _ = run_cli(capsys, "bench", str(cfg))
        assert code == 0
        return out

    def test_bench_writes_expected_rows(self, results_csv):
        lines = results_csv.read_text().splitlines()
        # header + 2 sizes x 2 seeds x 3 orderings
        assert len(lines) == 13
        assert lines[0].startswith("network,algorithm,ordering_mode,")

    def test_stats_impact(self, capsys, results_csv):
        code, out, _ = run_cli(
            capsys, "stats", str(results_csv), "--impact", "worst_to_optimal"
        )
        assert code == 0
        assert out.splitlines()[0] == "factor=worst_to_optimal"
        fields = dict(
            line.split("=", 1) for line in out.strip().splitlines()
        )
        assert fields["n"] == "4"
        float(fields["mean"])

    def test_stats_rank(self, capsys, results_csv):
        code, out, _ = run_cli(capsys, "stats", str(results_csv), "--rank")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "algorithm,ordering,mean_f1_delta"
        assert any(line.startswith("HC,alphabetic,") for line in lines)

    def test_bench_timeout_rows_exit_partial(self, capsys, tmp_path):
        cfg = tmp_path / "exp.cfg"
        out = tmp_path / "results.csv"
        cfg.write_text(
            f"networks = {network_path('collider')}\n"
            "sample_sizes = 1000\n"
            "seeds = 1\n"
            "max_runtime_per_cell = 0.000001\n"
            f"output = {out}\n"
        )
        code, _, _ = run_cli(capsys, "bench", str(cfg))
        assert code == 3
        body = out.read_text()
        assert "timeout" in body

    def test_stats_unreadable_file_is_input_error(self, capsys, tmp_path):
        code, _, _ = run_cli(
            capsys, "stats", str(tmp_path / "none.csv"), "--rank"
        )
        assert code == 2
