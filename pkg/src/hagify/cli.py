"""Command-line interface.

Subcommands: gen (synthetic graphs), optimize (build a HAG), verify
(equivalence check), run (forward execution, optionally comparing both
paths), sweep (cost versus capacity), oracle-compare (greedy versus the
exhaustive optimum on tiny graphs).

Exit codes: 0 success or equivalent, 1 verification failure, 2 usage
error, 3 I/O or input-validation error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import cost as cost_mod
from . import executor, generators, oracle
from .graphs import (
    GraphError,
    SEQUENTIAL_MODE,
    SET_MODE,
    check_equivalence,
    deserialize_hag,
    load_graph,
    serialize_hag,
    trivial_hag,
)
from .search import SearchConfig, default_capacity, search

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

MODEL_MODES = {executor.GCN: SET_MODE, executor.SAGE_POOL: SET_MODE, executor.SEQ: SEQUENTIAL_MODE}


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _load_input_graph(path: str, undirected: bool):
    return load_graph(_read_text(path), undirected=undirected)


def _capacity_for(args, graph) -> int:
    if args.capacity is not None:
        return args.capacity
    frac = 0.25 if args.capacity_frac is None else args.capacity_frac
    return int(frac * graph.num_nodes)


def _coefficients(args) -> cost_mod.CostCoefficients:
    return cost_mod.CostCoefficients(alpha=args.alpha, beta=args.beta)


def _add_capacity_flags(parser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--capacity", type=int, default=None, help="max number of aggregation nodes")
    group.add_argument(
        "--capacity-frac",
        type=float,
        default=None,
        metavar="F",
        help="capacity as a fraction of the node count (default 0.25)",
    )


def _add_cost_flags(parser) -> None:
    parser.add_argument("--alpha", type=float, default=1.0, help="cost of one binary aggregation")
    parser.add_argument("--beta", type=float, default=1.0, help="cost of one update")


# ---- subcommands ----------------------------------------------------------

def cmd_gen(args) -> int:
    if args.kind == "diamond":
        g = generators.diamond4()
    elif args.kind == "share":
        g = generators.share(args.m, args.n)
    else:
        if args.edges is not None:
            g = generators.random_edge_count_graph(args.n, args.edges, args.seed)
        else:
            g = generators.erdos_renyi(args.n, args.p, args.seed, shuffle_order=args.shuffle_order)
    text = generators.edge_list_text(g)
    if args.output:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_optimize(args) -> int:
    g = _load_input_graph(args.input, args.undirected)
    capacity = _capacity_for(args, g)
    coeff = _coefficients(args)
    cfg = SearchConfig(capacity=capacity, mode=args.mode)
    hag, trace = search(g, cfg, coeff)
    report = cost_mod.evaluate_cost(hag, coeff)
    baseline = cost_mod.evaluate_cost(trivial_hag(g, args.mode), coeff)
    if args.output:
        _write_text(args.output, serialize_hag(hag))
    if args.trace:
        _write_text(args.trace, trace.to_jsonl())
    row = cost_mod.report_csv_row(report, args.input, args.mode, capacity)
    print(cost_mod.CSV_HEADER)
    print(row)
    if args.report:
        _write_text(args.report, cost_mod.CSV_HEADER + "\n" + row + "\n")
    if baseline.num_aggregations and report.num_aggregations:
        factor = f"{baseline.num_aggregations / report.num_aggregations:.1f}x"
    else:
        factor = "1.0x" if baseline.num_aggregations == report.num_aggregations else "inf"
    print(
        f"aggregations {baseline.num_aggregations} -> {report.num_aggregations} ({factor}), "
        f"transfers {baseline.num_transfers} -> {report.num_transfers}, "
        f"cost {cost_mod._fmt(baseline.cost_value)} -> {cost_mod._fmt(report.cost_value)}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _load_input_graph(args.graph, args.undirected)
    hag = deserialize_hag(_read_text(args.hag))
    result = check_equivalence(g, hag)
    print(result.describe())
    return EXIT_OK if result else EXIT_VERIFY_FAILED


def _max_deviation(a: np.ndarray, b: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    if a.dtype == object:
        return float(max(abs(x - y) for x, y in zip(a.ravel(), b.ravel())))
    return float(np.max(np.abs(a - b)))


def cmd_run(args) -> int:
    g = _load_input_graph(args.input, args.undirected)
    mode = MODEL_MODES[args.model]
    model = executor.make_model(
        args.model,
        num_layers=args.layers,
        dim=args.dim,
        seed=args.seed,
        activation=args.activation,
        exact=args.integer,
    )
    if args.features:
        x = executor.features_from_csv(_read_text(args.features), exact=args.integer)
    else:
        x = executor.random_features(g.num_nodes, args.dim, args.seed, exact=args.integer)

    if args.hag:
        hag = deserialize_hag(_read_text(args.hag))
        if hag.mode != mode:
            print(f"error: model {args.model} needs a {mode} HAG, got {hag.mode}", file=sys.stderr)
            return EXIT_USAGE
    elif args.compare:
        hag, _ = search(g, SearchConfig(capacity=default_capacity(g), mode=mode))
    else:
        hag = None

    if hag is not None:
        result = executor.forward_hag(hag, model, x)
    else:
        result = executor.forward_gnn_graph(g, model, x)
    for k, counters in enumerate(result.counters, start=1):
        print(f"layer {k}: aggregations {counters.binary_aggregations}, reads {counters.activation_reads}")

    if args.compare:
        reference = executor.forward_gnn_graph(g, model, x)
        deviation = _max_deviation(result.final_outputs, reference.final_outputs)
        print(f"max deviation: {cost_mod._fmt(deviation)}")

    if args.output:
        _write_text(args.output, executor.features_to_csv(result.final_outputs))
    return EXIT_OK


def cmd_sweep(args) -> int:
    g = _load_input_graph(args.input, args.undirected)
    coeff = _coefficients(args)
    if args.capacities:
        capacities = [int(c) for c in args.capacities.split(",")]
    else:
        capacities = list(range(0, default_capacity(g) + 1))
    lines = [cost_mod.CSV_HEADER]
    for capacity in capacities:
        hag, _ = search(g, SearchConfig(capacity=capacity, mode=args.mode), coeff)
        report = cost_mod.evaluate_cost(hag, coeff)
        lines.append(cost_mod.report_csv_row(report, args.input, args.mode, capacity))
    text = "\n".join(lines) + "\n"
    if args.output:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle_compare(args) -> int:
    g = _load_input_graph(args.input, args.undirected)
    coeff = _coefficients(args)
    capacity = args.capacity
    greedy_hag, _ = search(g, SearchConfig(capacity=capacity, mode=SET_MODE), coeff)
    optimal = oracle.brute_force_optimal_set(g, capacity, coeff)
    greedy_cost = cost_mod.evaluate_cost(greedy_hag, coeff).cost_value
    trivial_cost = cost_mod.evaluate_cost(trivial_hag(g, SET_MODE), coeff).cost_value
    holds = oracle.verify_approximation(g, greedy_hag, optimal, coeff)
    if args.json:
        print(
            json.dumps(
                {
                    "capacity": capacity,
                    "cost_trivial": trivial_cost,
                    "cost_greedy": greedy_cost,
                    "cost_optimal": optimal.best_cost,
                    "bound_holds": holds,
                    "greedy_is_optimal": greedy_cost == optimal.best_cost,
                    "candidates_examined": optimal.num_candidates_examined,
                }
            )
        )
    else:
        print(f"{'metric':<20}{'value'}")
        print(f"{'cost (direct)':<20}{cost_mod._fmt(trivial_cost)}")
        print(f"{'cost (greedy)':<20}{cost_mod._fmt(greedy_cost)}")
        print(f"{'cost (optimal)':<20}{cost_mod._fmt(optimal.best_cost)}")
        print(f"{'bound holds':<20}{'PASS' if holds else 'FAIL'}")
        print(f"{'greedy == optimal':<20}{'yes' if greedy_cost == optimal.best_cost else 'no'}")
    return EXIT_OK if holds else EXIT_VERIFY_FAILED


# ---- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hagify",
        description="Rewrite GNN aggregation graphs into hierarchically shared form.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic edge-list graph")
    gen_sub = p_gen.add_subparsers(dest="kind", required=True)
    g_diamond = gen_sub.add_parser("diamond", help="the 4-node doubly shared pair graph")
    g_share = gen_sub.add_parser("share", help="m consumers sharing the same n sources")
    g_share.add_argument("m", type=int)
    g_share.add_argument("n", type=int)
    g_er = gen_sub.add_parser("er", help="directed Erdos-Renyi graph")
    g_er.add_argument("n", type=int)
    g_er.add_argument("p", type=float)
    g_er.add_argument("--seed", type=int, default=0)
    g_er.add_argument("--edges", type=int, default=None, help="exact edge count instead of p")
    g_er.add_argument("--shuffle-order", action="store_true", help="randomize neighbor order")
    for p in (g_diamond, g_share, g_er):
        p.add_argument("--output", "-o", default=None)

    p_opt = sub.add_parser("optimize", help="search for an optimized HAG")
    p_opt.add_argument("--input", required=True, help="edge-list file")
    p_opt.add_argument("--output", default=None, help="write the HAG as JSON")
    p_opt.add_argument("--report", default=None, help="write the cost report CSV")
    p_opt.add_argument("--mode", choices=[SET_MODE, SEQUENTIAL_MODE], default=SET_MODE)
    p_opt.add_argument("--trace", default=None, help="write per-iteration merge trace (JSON lines)")
    p_opt.add_argument("--undirected", action="store_true", help="emit both directions per edge")
    _add_capacity_flags(p_opt)
    _add_cost_flags(p_opt)

    p_ver = sub.add_parser("verify", help="check a HAG against its source graph")
    p_ver.add_argument("graph")
    p_ver.add_argument("hag")
    p_ver.add_argument("--undirected", action="store_true")

    p_run = sub.add_parser("run", help="execute a model forward pass")
    p_run.add_argument("--input", required=True, help="edge-list file")
    p_run.add_argument("--hag", default=None, help="run on this HAG instead of the raw graph")
    p_run.add_argument("--model", choices=list(MODEL_MODES), default=executor.GCN)
    p_run.add_argument("--layers", type=int, default=1)
    p_run.add_argument("--dim", type=int, default=4)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--activation", choices=[executor.IDENTITY, executor.RELU, executor.TANH], default=None)
    p_run.add_argument("--features", default=None, help="feature CSV, one row per node")
    p_run.add_argument("--integer", action="store_true", help="exact arithmetic (gcn only)")
    p_run.add_argument("--compare", action="store_true", help="run both paths, print max deviation")
    p_run.add_argument("--output", default=None, help="write final activations CSV")
    p_run.add_argument("--undirected", action="store_true")

    p_sweep = sub.add_parser("sweep", help="cost report across capacities")
    p_sweep.add_argument("--input", required=True)
    p_sweep.add_argument("--mode", choices=[SET_MODE, SEQUENTIAL_MODE], default=SET_MODE)
    p_sweep.add_argument("--capacities", default=None, help="comma-separated list, default 0..|V|/4")
    p_sweep.add_argument("--output", default=None)
    p_sweep.add_argument("--undirected", action="store_true")
    _add_cost_flags(p_sweep)

    p_oc = sub.add_parser("oracle-compare", help="greedy vs exhaustive optimum (tiny graphs)")
    p_oc.add_argument("--input", required=True)
    p_oc.add_argument("--capacity", type=int, required=True)
    p_oc.add_argument("--json", action="store_true")
    p_oc.add_argument("--undirected", action="store_true")
    _add_cost_flags(p_oc)

    return parser


_HANDLERS = {
    "gen": cmd_gen,
    "optimize": cmd_optimize,
    "verify": cmd_verify,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "oracle-compare": cmd_oracle_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
