"""Command-line entry point: ``treeprobe <command> ...``.

Exit status is 0 when every check of the command passes and 1 otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import adaptive, harness
from .errors import TreeProbeError
from .nonadaptive import (
    QueryGraphSpec,
    build_min_degree_query_graph,
    build_reconstruction_query_graph,
    common_neighbor_audit,
    complete_missing_distances,
    decode_exact,
    find_max_distance_pair_nonadaptive,
    lemi_witness,
)
from .session import AnsweredQueryGraph, QuerySession
from .solver import (
    TABLE_KEYS,
    Goal,
    frozen_value_table,
    optimal_strategy_extract,
    replay_strategy,
    solve_adaptive,
    solve_nonadaptive,
    strategy_depth,
)
from .trees import DEFAULT_CAP, canonical_code, diameter, load_tree, random_tree


def _common_flags():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    p.add_argument("--json", action="store_true", help="machine-readable JSON output")
    p.add_argument("--csv", action="store_true", help="CSV output for reports")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest n for exhaustive enumeration")
    return p


def _emit(args, payload: dict, report: harness.BoundsReport | None = None) -> None:
    if args.csv and report is not None:
        sys.stdout.write(report.to_csv())
    elif args.json:
        print(json.dumps(payload, indent=2, default=str))
    elif report is not None:
        print(report.to_text())
        print(f"{'PASS' if report.passed else 'FAIL'}  {len(report.rows)} rows in {report.seconds:.1f}s")
    else:
        for k, v in payload.items():
            print(f"{k}: {v}")


def _report_exit(args, report) -> int:
    _emit(args, report.to_json(), report)
    return 0 if report.passed else 1


def _parse_tree_source(text):
    """``random:n``, ``all:n`` or a JSON file path."""
    kind, _, rest = text.partition(":")
    if kind in ("random", "all") and rest.isdigit():
        return kind, int(rest)
    return "file", load_tree(Path(text))


# -- adaptive ------------------------------------------------------------------


def cmd_adaptive(args) -> int:
    kind, value = _parse_tree_source(args.tree)
    if kind == "all":
        if args.algo == "spider":
            raise TreeProbeError("exhaustive sweeps do not apply to spiders; use random:n")
        return _report_exit(args, harness.run_exhaustive([value], args.algo, cap=args.cap))
    if kind == "random":
        return _report_exit(args, harness.run_random([value], args.algo, args.trials, seed=args.seed))

    tree = value
    n = tree.n
    s = QuerySession(tree)
    if args.algo == "diameter":
        res = adaptive.find_diameter_pair(s, n)
        ok = tree.distance(*res.pair) == diameter(tree)
        payload = {"pair": list(res.pair), "distance": res.distance, "queries": res.queries_used}
        ceiling = adaptive.diameter_query_ceiling(n)
    else:
        algo = adaptive.reconstruct_tree if args.algo == "reconstruct" else adaptive.identify_spider
        res = algo(s, n)
        ok = res.tree == tree
        payload = {"edges": [list(e) for e in res.tree.edges], "queries": res.queries_used}
        ceiling = (adaptive.reconstruct_query_ceiling if args.algo == "reconstruct" else adaptive.spider_query_ceiling)(n)
    ok = ok and s.count <= ceiling
    payload.update({"ceiling": ceiling, "correct": ok})
    _emit(args, payload)
    return 0 if ok else 1


# -- adversary -----------------------------------------------------------------


def cmd_adversary(args) -> int:
    logs = [] if args.log else None
    report = harness.run_tournament(args.strategy, args.questioner, args.n, args.games, seed=args.seed, logs=logs)
    if args.log:
        with open(args.log, "w") as fh:
            for game, events in enumerate(logs):
                for event in events:
                    fh.write(json.dumps({"game": game, **event}) + "\n")
    return _report_exit(args, report)


# -- non-adaptive --------------------------------------------------------------


def _load_spec(args, default_builder):
    if args.spec:
        return QueryGraphSpec.from_json(Path(args.spec).read_text())
    if args.n is None:
        raise TreeProbeError("give --n or --spec")
    return default_builder(args.n)


def _load_answers(args, spec):
    if args.answers:
        return AnsweredQueryGraph.from_json(Path(args.answers).read_text())
    if args.tree:
        kind, value = _parse_tree_source(args.tree)
        if kind == "random":
            value = random_tree(spec.n, np.random.default_rng(args.seed))
        elif kind == "all":
            raise TreeProbeError("all:n only applies to decode-exact sweeps")
        return spec.answers_from(value), value
    raise TreeProbeError("give --answers or --tree")


def _answers_and_hidden(args, spec):
    loaded = _load_answers(args, spec)
    return loaded if isinstance(loaded, tuple) else (loaded, None)


def cmd_nonadaptive(args) -> int:
    action = args.action
    if action == "build":
        builder = build_reconstruction_query_graph if args.variant == "reconstruct" else build_min_degree_query_graph
        spec = builder(args.n)
        payload = spec.to_json()
        payload["queries"] = spec.size
        if args.out:
            Path(args.out).write_text(json.dumps(spec.to_json()) + "\n")
        _emit(args, payload)
        return 0

    if action == "decode-exact" and args.tree and args.tree.startswith("all:"):
        _, n = _parse_tree_source(args.tree)
        return _report_exit(args, harness.run_exhaustive([n], "decode-exact", cap=args.cap))

    if action == "witness":
        spec = _load_spec(args, lambda n: QueryGraphSpec(n, frozenset((0, k) for k in (1, 2, 3))))
        t, t2 = lemi_witness(spec)
        mask = spec.queried_mask()
        same = bool(np.array_equal(t.distances[mask], t2.distances[mask]))
        ok = same and diameter(t) == 4 and diameter(t2) == 3
        payload = {"T": t.to_json(), "T_prime": t2.to_json(), "answers_identical": same, "diameters": [diameter(t), diameter(t2)]}
        _emit(args, payload)
        return 0 if ok else 1

    builder = build_reconstruction_query_graph if action == "decode-exact" else build_min_degree_query_graph
    spec = _load_spec(args, builder)
    answers, hidden = _answers_and_hidden(args, spec)
    if action == "decode-exact":
        tree = decode_exact(spec, answers)
        ok = hidden is None or tree == hidden
        payload = {"edges": [list(e) for e in tree.edges], "correct": ok if hidden is not None else None}
    elif action == "decode-iso":
        cs = complete_missing_distances(spec, answers, args.max_solutions)
        ok = cs.shared_code is not None and (hidden is None or cs.shared_code == canonical_code(hidden))
        payload = {
            "completions": len(cs.completions),
            "exhaustive": cs.exhaustive,
            "code": cs.shared_code.hex() if cs.shared_code else None,
            "common_neighbor_audit": common_neighbor_audit(spec) if spec.n >= 13 else None,
            "correct": ok,
        }
    else:
        x, y, d = find_max_distance_pair_nonadaptive(spec, answers, args.max_solutions)
        ok = hidden is None or hidden.distance(x, y) == diameter(hidden)
        payload = {"pair": [x, y], "distance": d, "correct": ok}
    _emit(args, payload)
    return 0 if ok else 1


# -- solver --------------------------------------------------------------------


def cmd_solve(args) -> int:
    goal = Goal.parse(args.goal)
    if args.mode == "adaptive":
        value = solve_adaptive(args.n, goal, allow_large=args.allow_large)
    else:
        value = solve_nonadaptive(args.n, goal, allow_large=args.allow_large)
    payload = {"mode": args.mode, "goal": goal.value, "n": args.n, "value": value}
    ok = True
    frozen = frozen_value_table().get(TABLE_KEYS[(args.mode, goal)], {}).get(str(args.n))
    if frozen is not None:
        payload["frozen"] = frozen
        ok = frozen == value
    if args.emit_strategy:
        if args.mode != "adaptive":
            raise TreeProbeError("strategies are only extracted for adaptive play")
        tree = optimal_strategy_extract(args.n, goal, allow_large=args.allow_large)
        depth = strategy_depth(tree)
        replayed = replay_strategy(tree, args.n, goal)
        Path(args.emit_strategy).write_text(json.dumps(tree) + "\n")
        payload.update({"strategy_depth": depth, "replay_worst": replayed})
        ok = ok and depth == value == replayed
    payload["ok"] = ok
    _emit(args, payload)
    return 0 if ok else 1


def cmd_bounds(args) -> int:
    config = {"seed": args.seed}
    if args.quick:
        config.update({"constructor_ns": list(range(5, 20)), "solver_ns": [2, 3, 4], "exhaustive_ns": [4, 5]})
    return _report_exit(args, harness.verify_bounds_table(config))


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="treeprobe", description="Distance-query games on hidden trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("adaptive", parents=[common], help="run an adaptive questioner on truthful answers")
    p.add_argument("--algo", choices=["diameter", "reconstruct", "spider"], required=True)
    p.add_argument("--tree", required=True, help="JSON file, random:n or all:n")
    p.add_argument("--trials", type=int, default=100, help="trees for random:n")
    p.set_defaults(func=cmd_adaptive)

    p = sub.add_parser("adversary", parents=[common], help="play questioners against an adversary")
    p.add_argument("--strategy", choices=list(harness.STRATEGIES), required=True)
    p.add_argument("--questioner", choices=list(harness.QUESTIONERS), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--games", type=int, default=100)
    p.add_argument("--log", help="write game events as JSON lines to this file")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("nonadaptive", parents=[common], help="non-adaptive query graphs and decoders")
    p.add_argument("action", choices=["build", "decode-exact", "decode-iso", "max-pair", "witness"])
    p.add_argument("--n", type=int)
    p.add_argument("--variant", choices=["reconstruct", "min-degree"], default="reconstruct", help="graph for build")
    p.add_argument("--spec", help="query graph JSON {n, missing}")
    p.add_argument("--answers", help="transcript JSON {n, answers}")
    p.add_argument("--tree", help="hidden tree to generate answers: JSON file or random:n (all:n for decode-exact)")
    p.add_argument("--max-solutions", type=int, default=64)
    p.add_argument("--out", help="also write the built query graph here")
    p.set_defaults(func=cmd_nonadaptive)

    p = sub.add_parser("solve", parents=[common], help="exact game values for tiny n")
    p.add_argument("mode", choices=["adaptive", "nonadaptive"])
    p.add_argument("--goal", choices=[g.value for g in Goal], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--emit-strategy", help="write the optimal decision tree (adaptive only)")
    p.add_argument("--allow-large", action="store_true", help="lift the solver cap to n = 7")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bounds", parents=[common], help="check every closed-form bound")
    p.add_argument("--quick", action="store_true", help="smaller ranges")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TreeProbeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
