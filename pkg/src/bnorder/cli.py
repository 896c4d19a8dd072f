"""Command line front end.

Subcommands: sample, learn, eval, bench, stats. Exit codes are part of
the contract: 0 success, 1 usage error, 2 unreadable or invalid input,
3 benchmark finished but some cells failed.
"""

import argparse
import os
import sys
import time

from .bench import (
    impact_summary,
    parse_config,
    rank_table,
    read_results_csv,
    run_matrix,
    write_results_csv,
    _FACTORS,
)
from .bif import parse_bif
from .graph import CycleError, Dag, Pdag
from .learn import LearnConfig, hill_climb, mmhc, pc_stable, tabu_search
from .metrics import compare, to_comparable
from .model import Dataset, sample
from .scores import ScoreParams

__all__ = ["main", "format_graph", "parse_graph_text"]


def format_graph(graph):
    """Render a graph as its text form: a nodes line, then one edge per line."""
    lines = ["nodes: " + ", ".join(graph.nodes)]
    if isinstance(graph, Dag):
        directed = sorted(graph.edges)
        undirected = []
    else:
        directed = sorted(graph.directed)
        undirected = sorted(graph.undirected)
    lines.extend(f"{u} -> {v}" for u, v in directed)
    lines.extend(f"{u} -- {v}" for u, v in undirected)
    return "\n".join(lines) + "\n"


def parse_graph_text(text):
    """Inverse of format_graph.

    Returns a Dag when every edge is directed and they form no cycle,
    otherwise a Pdag.
    """
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line and not line.startswith("#")]
    if not lines or not lines[0].startswith("nodes:"):
        raise ValueError("graph text must start with a 'nodes:' line")
    nodes = [n.strip() for n in lines[0][len("nodes:"):].split(",") if n.strip()]
    if not nodes:
        raise ValueError("graph text declares no nodes")
    directed = []
    undirected = []
    for line in lines[1:]:
        if " -> " in line:
            u, _, v = line.partition(" -> ")
            directed.append((u.strip(), v.strip()))
        elif " -- " in line:
            u, _, v = line.partition(" -- ")
            undirected.append((u.strip(), v.strip()))
        else:
            raise ValueError(f"unrecognised graph line: {line!r}")
    if not undirected:
        try:
            return Dag(nodes, directed)
        except CycleError:
            pass
    return Pdag(nodes, directed, undirected)


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _cmd_sample(args):
    bn = parse_bif(_read(args.network))
    data = sample(bn, args.n, args.seed)
    text = data.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


_ALGOS = {
    "hc": hill_climb,
    "tabu": tabu_search,
    "pcstable": pc_stable,
    "mmhc": mmhc,
}


def _cmd_learn(args):
    data = Dataset.from_csv(_read(args.data))
    cfg = LearnConfig(
        score=ScoreParams(kind=args.score, k_scale=args.k_scale, ess=args.ess),
        ci_kind=args.ci,
        alpha=args.alpha,
        tabu_length=args.tabu_length,
        max_worsening=args.max_worsening,
    )
    result = _ALGOS[args.algo](data, cfg)
    if args.algo == "pcstable":
        graph = result
        trace = []
    else:
        graph = result.graph
        trace = result.trace
    text = format_graph(graph)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8", newline="") as fh:
            fh.write("iteration,kind,from,to,delta,tied_count,arbitrary\n")
            for rec in trace:
                u, v = rec.change.arc
                fh.write(
                    f"{rec.iteration},{rec.change.kind},{u},{v},"
                    f"{rec.delta:.6f},{rec.tied_count},"
                    f"{'true' if rec.arbitrary else 'false'}\n"
                )
    return 0


def _cmd_eval(args):
    learnt = parse_graph_text(_read(args.learnt))
    bn = parse_bif(_read(args.network))
    truth = to_comparable(bn.structure)
    m = compare(to_comparable(learnt), truth)
    for field in ("tp", "fp", "fn", "extra", "missing", "misorientated",
                  "shd"):
        print(f"{field}={getattr(m, field)}")
    for field in ("precision", "recall", "f1"):
        print(f"{field}={getattr(m, field):.6f}")
    return 0


def _cmd_bench(args):
    cfg = parse_config(_read(args.config), base_dir=os.path.dirname(args.config) or ".")
    started = time.perf_counter()
    rows = run_matrix(cfg)
    write_results_csv(rows, cfg.output)
    elapsed = time.perf_counter() - started
    failed = sum(1 for r in rows if r.status == "timeout")
    skipped = sum(1 for r in rows if r.status == "skipped_single_valued")
    print(
        f"wrote {len(rows)} rows to {cfg.output} in {elapsed:.1f}s "
        f"({failed} timed out, {skipped} skipped)"
    )
    return 3 if failed else 0


def _cmd_stats(args):
    rows = read_results_csv(args.results)
    if args.impact:
        s = impact_summary(rows, args.impact)
        print(f"factor={s.factor}")
        for field in ("mean", "median", "q1", "q3", "min", "max"):
            print(f"{field}={getattr(s, field):.6f}")
        print(f"n={s.n}")
        print(f"unmatched={s.unmatched}")
    else:
        table = rank_table(rows, baseline=args.baseline)
        print("algorithm,ordering,mean_f1_delta")
        for algorithm, groups in table.deltas.items():
            for group, delta in groups.items():
                print(f"{algorithm},{group},{delta:.6f}")
        if table.missing:
            print(
                f"warning: {len(table.missing)} cells lacked baseline rows",
                file=sys.stderr,
            )
    return 0


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; the contract reserves 2 for bad
    # input files, so usage errors are remapped to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(
        prog="bnorder",
        description="Structure learning for discrete variables and a harness "
        "for measuring how much the learnt graph depends on column order.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[], help="draw rows from a network",
                       description="Sample a dataset from a .bif network.")
    p.add_argument("network", help=".bif file")
    p.add_argument("--n", type=int, required=True, help="number of rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("learn", help="learn a graph from a dataset",
                       description="Learn a graph from a CSV dataset.")
    p.add_argument("data", help="dataset CSV")
    p.add_argument("--algo", choices=sorted(_ALGOS), default="hc")
    p.add_argument("--score", choices=("bic", "bdeu"), default="bic")
    p.add_argument("--k-scale", type=float, default=1.0)
    p.add_argument("--ess", type=float, default=1.0)
    p.add_argument("--ci", choices=("mi", "x2"), default="mi")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--tabu-length", type=int, default=10)
    p.add_argument("--max-worsening", type=int, default=10)
    p.add_argument("--out", help="output graph file (default stdout)")
    p.add_argument("--trace-out", help="write the move trace as CSV")
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("eval", help="compare a learnt graph with a network",
                       description="Score a learnt graph against the "
                       "network that generated the data.")
    p.add_argument("learnt", help="graph text file")
    p.add_argument("network", help=".bif file")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", help="run an experiment matrix",
                       description="Run the experiment matrix described by "
                       "a config file and write a results CSV.")
    p.add_argument("config", help="key = value config file")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("stats", help="summarise a results CSV",
                       description="Aggregate a results CSV into an impact "
                       "summary or a ranking table.")
    p.add_argument("results", help="results CSV from bench")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--impact", choices=sorted(_FACTORS),
                       help="summarise F1 deltas for one factor")
    group.add_argument("--rank", action="store_true",
                       help="rank algorithms against a baseline")
    p.add_argument("--baseline", default="HC")
    p.set_defaults(func=_cmd_stats)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse insists on exiting itself; surface its code as a return
        # value so callers decide what the process does
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
