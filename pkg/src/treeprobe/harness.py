"""Experiment runner: exhaustive sweeps, random trials, adversary tournaments
and the bounds table.

Every check lands in a :class:`BoundsReport` row that carries the formula it
tests.  A report passes only if every row passes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import adaptive
from .adversary import (
    AdversarySession,
    GameOver,
    caterpillar_consistent,
    ds_caterpillar_witness,
    ds_certificate,
    ds_witness,
    layered_lower_bound,
    layered_solutions,
    legs_of,
    pairwise_coverage_audit,
    spider_determined,
    spider_lower_bound,
    spider_witness,
)
from .adversary.doublestar import DoubleStarAdversaryState, ds_answer
from .errors import CapExceeded, DomainError, InvariantViolation
from .nonadaptive import (
    build_min_degree_query_graph,
    build_reconstruction_query_graph,
    decode_exact_batch,
    min_degree_query_count,
    reconstruction_query_count,
)
from .session import QuerySession
from .trees import (
    DEFAULT_CAP,
    LabeledTree,
    is_double_star,
    is_real_caterpillar,
    random_tree,
    spider_tree,
    tree_batch,
)


@dataclass
class BoundsRow:
    n: int
    subject: str
    measured: float
    bound_expr: str
    bound: float
    direction: str  # "<=" (ceiling), ">=" (forcing) or "=="
    anchor: str
    passed: bool = field(init=False)
    note: str = ""

    def __post_init__(self):
        if self.direction == "<=":
            self.passed = self.measured <= self.bound
        elif self.direction == ">=":
            self.passed = self.measured >= self.bound
        else:
            self.passed = self.measured == self.bound


@dataclass
class BoundsReport:
    rows: list = field(default_factory=list)
    seconds: float = 0.0

    def add(self, *args, **kwargs) -> BoundsRow:
        row = BoundsRow(*args, **kwargs)
        self.rows.append(row)
        return row

    def extend(self, other: BoundsReport) -> BoundsReport:
        self.rows.extend(other.rows)
        self.seconds += other.seconds
        return self

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r.passed]

    def to_json(self) -> dict:
        return {"passed": self.passed, "seconds": round(self.seconds, 3), "rows": [asdict(r) for r in self.rows]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = ["n", "subject", "measured", "bound_expr", "bound", "direction", "anchor", "passed", "note"]
        writer = csv.DictWriter(buf, fieldnames=names)
        writer.writeheader()
        for r in self.rows:
            writer.writerow(asdict(r))
        return buf.getvalue()

    def to_text(self) -> str:
        lines = []
        for r in self.rows:
            mark = "PASS" if r.passed else "FAIL"
            extra = f"  ({r.note})" if r.note else ""
            lines.append(f"{mark}  n={r.n:<4} {r.subject:<40} {r.measured:>10g} {r.direction} {r.bound:<8g} [{r.anchor}]{extra}")
        return "\n".join(lines)


# -- truthful-answer sweeps ---------------------------------------------------

ALGORITHMS = ("diameter", "reconstruct", "decode-exact", "spider")

_ANCHORS = {
    "diameter": ("2n-4", "f_A(n) <= 2n-4"),
    "reconstruct": ("(n-1)+floor((n-1)^2/4)", "g_A(n) = n^2/4 + O(n)"),
    "spider": ("C(n-floor(n/2),2)+5n", "spider identification n^2/8 + O(n)"),
}


def _ceiling(algorithm, n):
    if algorithm == "diameter":
        return adaptive.diameter_query_ceiling(n)
    if algorithm == "reconstruct":
        return adaptive.reconstruct_query_ceiling(n)
    return adaptive.spider_query_ceiling(n)


def _run_on_dist(algorithm, n, dist):
    """Run one adaptive algorithm on a truthful session; return (ok, count)."""
    s = QuerySession(dist=dist)
    if algorithm == "diameter":
        res = adaptive.find_diameter_pair(s, n)
        a, b = res.pair
        far = int(dist.max())
        return bool(dist[a, b] == far and res.distance == far), s.count
    if algorithm == "reconstruct":
        res = adaptive.reconstruct_tree(s, n)
        return bool(np.array_equal(res.tree.distances, dist)), s.count
    res = adaptive.identify_spider(s, n)
    return bool(np.array_equal(res.tree.distances, dist)), s.count


def run_exhaustive(n_range, algorithm: str, cap: int | None = None) -> BoundsReport:
    """Run ``algorithm`` on every labeled tree for each ``n`` in ``n_range``.

    Adds a correctness row (wrong answers must be zero) and, for adaptive
    algorithms, a worst-case query count row.
    """
    if algorithm not in ALGORITHMS or algorithm == "spider":
        raise DomainError(f"exhaustive sweeps support diameter, reconstruct, decode-exact; got {algorithm!r}")
    cap = DEFAULT_CAP if cap is None else cap
    report = BoundsReport()
    t0 = time.perf_counter()
    for n in n_range:
        if n > min(cap, 8):
            raise CapExceeded(f"exhaustive sweep at n={n} exceeds the cap")
        batch = tree_batch(n)
        if algorithm == "decode-exact":
            spec = build_reconstruction_query_graph(n)
            adj, status = decode_exact_batch(spec, batch.dist.astype(np.int32))
            truth = batch.dist == 1
            wrong = int((~(adj == truth).all(axis=(1, 2)) | (status != 0)).sum())
            report.add(n, "decode-exact wrong decodings", wrong, "0", 0, "==", "g_N(n) = ceil(n(n-2)/2)", note=f"{len(batch)} trees")
            continue
        wrong = 0
        worst = 0
        for i in range(len(batch)):
            ok, count = _run_on_dist(algorithm, n, batch.dist[i])
            wrong += not ok
            worst = max(worst, count)
        expr, anchor = _ANCHORS[algorithm]
        report.add(n, f"{algorithm} wrong answers", wrong, "0", 0, "==", anchor, note=f"{len(batch)} trees")
        report.add(n, f"{algorithm} max queries", worst, expr, _ceiling(algorithm, n), "<=", anchor)
    report.seconds = time.perf_counter() - t0
    return report


def _random_spider(n, rng):
    perm = rng.permutation(n)
    m = n // 2
    return spider_tree(n, int(perm[0]), [int(x) for x in perm[1 : m + 1]], [int(x) for x in perm[m + 1 :]])


def run_random(ns, algorithm: str, trials: int, seed: int = 0) -> BoundsReport:
    """Random-tree trials (uniform over labeled trees, or over spiders)."""
    rng = np.random.default_rng(seed)
    report = BoundsReport()
    t0 = time.perf_counter()
    for n in ns:
        wrong = worst = 0
        if algorithm == "decode-exact":
            spec = build_reconstruction_query_graph(n)
            for _ in range(trials):
                t = random_tree(n, rng)
                adj, status = decode_exact_batch(spec, t.distances[None].astype(np.int32))
                wrong += bool(status[0]) or not np.array_equal(adj[0], t.distances == 1)
            report.add(n, "decode-exact wrong decodings", wrong, "0", 0, "==", "g_N(n) = ceil(n(n-2)/2)", note=f"{trials} random trees")
            continue
        for _ in range(trials):
            t = _random_spider(n, rng) if algorithm == "spider" else random_tree(n, rng)
            ok, count = _run_on_dist(algorithm, n, t.distances)
            wrong += not ok
            worst = max(worst, count)
        expr, anchor = _ANCHORS[algorithm]
        report.add(n, f"{algorithm} wrong answers", wrong, "0", 0, "==", anchor, note=f"{trials} random trees")
        report.add(n, f"{algorithm} max queries", worst, expr, _ceiling(algorithm, n), "<=", anchor)
    report.seconds = time.perf_counter() - t0
    return report


# -- adversary tournaments ----------------------------------------------------

QUESTIONERS = ("paper-diameter", "paper-reconstruct", "paper-spider", "random", "greedy")
STRATEGIES = ("doublestar", "layered", "spider", "spider-hidden")
GREEDY_MAX_N = 8


class _Relabeled:
    """Presents a session under a vertex relabeling so deterministic
    questioners see a different instance in every game."""

    def __init__(self, inner, perm):
        self.inner = inner
        self.perm = perm

    @property
    def count(self):
        return self.inner.count

    def ask(self, x, y):
        return self.inner.ask(int(self.perm[x]), int(self.perm[y]))


def _game_finished(session) -> bool:
    if session.strategy == "doublestar":
        return session.ended
    if session.strategy == "layered":
        return len(layered_solutions(session.state, limit=2)) == 1
    return spider_determined(session.state)


def _unasked(session, n):
    asked = session.transcript.answers
    return [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in asked]


def _play_random(session, n, rng):
    pairs = _unasked(session, n)
    order = rng.permutation(len(pairs))
    for k in order:
        if _game_finished(session):
            return
        a, b = pairs[k]
        if (a, b) in session.transcript.answers:
            continue
        session.ask(a, b)


def _play_greedy(session, n, rng):
    if n > GREEDY_MAX_N:
        raise DomainError(f"the greedy questioner enumerates trees and needs n <= {GREEDY_MAX_N}")
    batch = tree_batch(n)
    from .session import consistent_mask

    while not _game_finished(session):
        dist = batch.dist[consistent_mask(session.transcript, batch.dist)]
        best, choice = -1, None
        for a, b in _unasked(session, n):
            k = np.unique(dist[:, a, b]).size if dist.shape[0] else 0
            if k > best:
                best, choice = k, (a, b)
        if choice is None:
            return
        session.ask(*choice)


def _play(session, questioner, n, rng):
    """Let ``questioner`` play; returns the output tree or pair if any."""
    if questioner == "random":
        _play_random(session, n, rng)
        return None
    if questioner == "greedy":
        _play_greedy(session, n, rng)
        return None
    perm = rng.permutation(n)
    view = _Relabeled(session, perm)
    algo = {
        "paper-diameter": adaptive.find_diameter_pair,
        "paper-reconstruct": adaptive.reconstruct_tree,
        "paper-spider": adaptive.identify_spider,
    }[questioner]
    try:
        result = algo(view, n)
    except GameOver:
        return None
    if hasattr(result, "tree"):
        return result.tree.relabel(perm)
    return None


def _tree_fits(tree: LabeledTree, answers: dict) -> bool:
    d = tree.distances
    return all(int(d[a, b]) == v for (a, b), v in answers.items())


def _max_pairs(tree: LabeledTree) -> set:
    d = tree.distances
    far = d.max()
    return {(int(a), int(b)) for a, b in zip(*np.nonzero(np.triu(d == far, 1)))}


def goal_open_before_end(n: int, pairs: list) -> tuple[bool, str]:
    """Replay ``pairs`` (all but the ending query) against a fresh
    double-star adversary and exhibit two consistent trees with no common
    maximum-distance pair.  Consistency is checked directly on the metric."""
    state = DoubleStarAdversaryState(n)
    facts = {}
    for a, b in pairs:
        d, info = ds_answer(state, a, b)
        facts[(min(a, b), max(a, b))] = d
        for x, y, dd in (info or {}).get("revealed", []):
            facts[(x, y)] = dd
    if state.ended:
        return False, "replay ended early"
    star = ds_witness(state)
    cat = ds_caterpillar_witness(state)
    if cat is None:
        return False, "no caterpillar witness"
    if not (is_double_star(star) and is_real_caterpillar(cat)):
        return False, "witness has the wrong shape"
    if not (_tree_fits(star, facts) and _tree_fits(cat, facts)):
        return False, "witness contradicts an answer"
    if _max_pairs(star) & _max_pairs(cat):
        return False, "witnesses share a maximum pair"
    return True, ""


@dataclass
class GameRecord:
    end_count: int
    ok: bool
    certificate: int | None = None
    informative: int | None = None
    cross: int | None = None
    note: str = ""
    log: list = field(default_factory=list, repr=False)


def play_game(strategy: str, questioner: str, n: int, rng, order=None) -> GameRecord:
    if strategy not in STRATEGIES:
        raise DomainError(f"unknown strategy {strategy!r}")
    if questioner not in QUESTIONERS:
        raise DomainError(f"unknown questioner {questioner!r}")
    if order is None and strategy != "doublestar":
        order = rng.permutation(n)
    session = AdversarySession(strategy, n, order)
    output = _play(session, questioner, n, rng)

    if strategy == "doublestar":
        if not session.ended:
            # a questioner that stops early is topped up with random queries
            _play_random(session, n, rng)
        note = ""
        ok = session.ended
        cert = None
        try:
            cert = ds_certificate(session.state)
        except InvariantViolation as exc:
            ok, note = False, str(exc)
        if ok and caterpillar_consistent(session.state):
            ok, note = False, "ended while the structural test still passes"
        if ok:
            asked = [tuple(e["pair"]) for e in session.log if e["pair"] is not None]
            ok, note = goal_open_before_end(n, asked[:-1])
        return GameRecord(session.ended_at or session.count, ok, certificate=cert, note=note, log=session.log)

    if not _game_finished(session):
        _play_random(session, n, rng)
    state = session.state
    if strategy == "layered":
        sols = layered_solutions(state, limit=2)
        ok = len(sols) == 1
        if output is not None and ok:
            from .adversary.layered import assignment_tree

            ok = output == assignment_tree(state, sols[0])
        return GameRecord(session.count, ok, informative=state.informative, log=session.log)

    ok = spider_determined(state)
    if output is not None and ok:
        ok = output == spider_witness(state)
    ok = ok and pairwise_coverage_audit(session.transcript, legs_of(state))
    return GameRecord(session.count, ok, cross=state.cross_queries, log=session.log)


def run_tournament(strategy: str, questioner: str, n: int, games: int, seed: int = 0, logs: list | None = None) -> BoundsReport:
    """Play ``games`` games and check the forcing bound for ``strategy``.

    If ``logs`` is a list, each game's event log is appended to it.
    """
    if games < 1:
        raise DomainError("play at least one game")
    rng = np.random.default_rng(seed)
    report = BoundsReport()
    t0 = time.perf_counter()
    records = [play_game(strategy, questioner, n, rng) for _ in range(games)]
    if logs is not None:
        logs.extend(r.log for r in records)
    bad = sum(not r.ok for r in records)
    tag = f"{strategy} vs {questioner}"
    counts = [r.end_count for r in records]
    note = f"{games} games, end count min {min(counts)} mean {np.mean(counts):.1f} max {max(counts)}"
    if strategy == "doublestar":
        first_bad = next((r.note for r in records if not r.ok), "")
        report.add(n, f"{tag}: invalid games", bad, "0", 0, "==", "f_A(n) >= 2n-9", note=first_bad)
        report.add(n, f"{tag}: min end count", min(counts), "2n-9", 2 * n - 9, ">=", "f_A(n) >= 2n-9", note=note)
        certs = [r.certificate for r in records if r.certificate is not None]
        report.add(n, f"{tag}: min certificate edges", min(certs) if certs else -1, "2n-7", 2 * n - 7, ">=", "answer graph has >= 2n-7 edges at the end")
    elif strategy == "layered":
        report.add(n, f"{tag}: undetermined games", bad, "0", 0, "==", "g_A(n) = n^2/4 + O(n)", note=note)
        report.add(
            n,
            f"{tag}: min informative queries",
            min(r.informative for r in records),
            "(floor(n/2)-1)(n-floor(n/2)-1)",
            layered_lower_bound(n),
            ">=",
            "g_A(n) = n^2/4 + O(n)",
        )
    else:
        report.add(n, f"{tag}: undetermined or uncovered games", bad, "0", 0, "==", "spider identification needs pairwise-covered legs", note=note)
        if strategy == "spider" or n % 2:
            report.add(n, f"{tag}: min cross-pair queries", min(r.cross for r in records), "C(k,2)", spider_lower_bound(n), ">=", "spider identification n^2/8 + O(n)")
    report.seconds = time.perf_counter() - t0
    return report


# -- bounds table -------------------------------------------------------------

DEFAULT_CONFIG = {
    "constructor_ns": list(range(5, 41)),
    "solver_ns": [2, 3, 4, 5],
    "exhaustive_ns": [4, 5, 6],
    "seed": 0,
}


def verify_bounds_table(config: dict | None = None) -> BoundsReport:
    """Closed-form bounds against constructor sizes, measured counts and exact
    solver values."""
    from .solver import Goal, solve_adaptive, solve_nonadaptive

    cfg = dict(DEFAULT_CONFIG)
    cfg.update(config or {})
    report = BoundsReport()
    t0 = time.perf_counter()
    for n in cfg["constructor_ns"]:
        if n >= 5:
            size = build_reconstruction_query_graph(n).size
            report.add(n, "matching-complement |Q|", size, "ceil(n(n-2)/2)", reconstruction_query_count(n), "==", "g_N(n) = ceil(n(n-2)/2), n >= 5")
        if n >= 13:
            size = build_min_degree_query_graph(n).size
            report.add(n, "cycle-complement |Q| (max pair)", size, "n(n-3)/2", min_degree_query_count(n), "==", "f_N(n) = n(n-3)/2, n >= 13")
            report.add(n, "cycle-complement |Q| (isomorphism)", size, "n(n-3)/2", min_degree_query_count(n), "==", "h_N(n) = n(n-3)/2, n >= 13")

    measured = {}
    for n in cfg["exhaustive_ns"]:
        for algo in ("diameter", "reconstruct"):
            sub = run_exhaustive([n], algo)
            report.extend(sub)
            measured[(algo, n)] = next(r.measured for r in sub.rows if r.subject.endswith("max queries"))

    for n in cfg["solver_ns"]:
        f_a = solve_adaptive(n, Goal.MaxDistPair)
        g_a = solve_adaptive(n, Goal.ExactTree)
        h_a = solve_adaptive(n, Goal.IsoClass)
        g_n = solve_nonadaptive(n, Goal.ExactTree)
        h_n = solve_nonadaptive(n, Goal.IsoClass)
        report.add(n, "solver f_A vs lower bound", f_a, "max(0,2n-9)", max(0, 2 * n - 9), ">=", "f_A(n) >= 2n-9")
        if n >= 4:
            report.add(n, "solver f_A vs diameter ceiling", f_a, "2n-4", 2 * n - 4, "<=", "f_A(n) <= 2n-4")
        if ("diameter", n) in measured:
            report.add(n, "solver f_A vs measured diameter count", f_a, "measured", measured[("diameter", n)], "<=", "f_A(n) <= 2n-4")
        if ("reconstruct", n) in measured:
            report.add(n, "solver g_A vs measured reconstruction count", g_a, "measured", measured[("reconstruct", n)], "<=", "g_A(n) = n^2/4 + O(n)")
        report.add(n, "solver g_A vs h_A", g_a, "h_A", h_a, ">=", "exact tree determines the isomorphism class")
        report.add(n, "solver g_N vs h_N", g_n, "h_N", h_n, ">=", "exact tree determines the isomorphism class")
        if n >= 5:
            report.add(n, "solver g_N", g_n, "ceil(n(n-2)/2)", math.ceil(n * (n - 2) / 2), "==", "g_N(n) = ceil(n(n-2)/2), n >= 5")
    report.seconds = time.perf_counter() - t0
    return report


def report_json(report: BoundsReport) -> str:
    return json.dumps(report.to_json(), indent=2)
