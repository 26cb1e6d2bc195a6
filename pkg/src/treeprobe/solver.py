"""Exact game values for tiny ``n`` by exhaustive search.

Adaptive play is solved as a minimax game over sets of consistent labeled
trees.  A state is the set of trees still consistent with the answers; two
states related by a vertex relabeling have the same value, so the memo is
keyed by a relabeling-canonical form of the set.  Non-adaptive values come
from enumerating query graphs by size, one per isomorphism class, and
checking whether the induced answer partition meets the goal.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from itertools import combinations, permutations

import numpy as np

from .errors import CapExceeded, DomainError
from .session import AnsweredQueryGraph
from .trees import LabeledTree, canonical_code, enumerate_trees, pair_list, tree_batch

SOLVER_CAP = 6
SOLVER_HARD_CAP = 7
# canonicalizing a state costs n! relabelings; beyond this the raw set is the key
CANONICAL_MAX_N = 6


class Goal(enum.Enum):
    MaxDistPair = "maxdist"
    ExactTree = "exact"
    IsoClass = "iso"

    @classmethod
    def parse(cls, value) -> Goal:
        if isinstance(value, Goal):
            return value
        for g in cls:
            if value in (g.value, g.name):
                return g
        raise DomainError(f"unknown goal {value!r}")


def goal_reached(trees, goal) -> bool:
    """Goal predicate over a nonempty collection of labeled trees."""
    trees = list(trees)
    if not trees:
        raise DomainError("goal predicate needs a nonempty set of trees")
    goal = Goal.parse(goal)
    if goal is Goal.ExactTree:
        return len(set(trees)) == 1
    if goal is Goal.IsoClass:
        return len({canonical_code(t) for t in trees}) == 1
    common = None
    for t in trees:
        d = t.distances
        far = int(d.max())
        pairs = {(int(a), int(b)) for a, b in zip(*np.nonzero(np.triu(d == far, 1)))}
        common = pairs if common is None else common & pairs
        if not common:
            return False
    return True


def _check_solver_cap(n, allow_large):
    if n < 2:
        raise DomainError("the game needs n >= 2")
    cap = SOLVER_HARD_CAP if allow_large else SOLVER_CAP
    if n > cap:
        raise CapExceeded(f"n={n} exceeds the solver cap of {cap}")


class GameTables:
    """Per-``n`` lookup tables shared by every solver call."""

    def __init__(self, n: int):
        self.n = n
        batch = tree_batch(n, cap=SOLVER_HARD_CAP)
        self.batch = batch
        self.pairs = pair_list(n)
        self.pd = batch.pair_distances().astype(np.int64)  # (N, P)
        far = self.pd.max(axis=1, keepdims=True)
        weights = np.int64(1) << np.arange(len(self.pairs), dtype=np.int64)
        self.maxbits = ((self.pd == far) * weights).sum(axis=1)
        codes = {}
        self.iso = np.array(
            [codes.setdefault(canonical_code(batch.tree(i)), len(codes)) for i in range(len(batch))],
            dtype=np.int64,
        )

    @property
    def size(self) -> int:
        return self.pd.shape[0]

    @cached_property
    def pair_perms(self) -> np.ndarray:
        """``(n!, P)``: image pair index of each pair under each relabeling."""
        index = {p: i for i, p in enumerate(self.pairs)}
        rows = []
        for perm in permutations(range(self.n)):
            rows.append([index[tuple(sorted((perm[a], perm[b])))] for a, b in self.pairs])
        return np.array(rows, dtype=np.int64)

    @cached_property
    def tree_perms(self) -> np.ndarray:
        """``(n!, N)``: index of the relabeled copy of each tree."""
        n, pp = self.n, self.pair_perms
        edges = self.pd == 1
        weights = np.int64(1) << np.arange(pp.shape[1], dtype=np.int64)
        base = (edges * weights).sum(axis=1)
        order = np.argsort(base)
        sorted_codes = base[order]
        out = np.empty((pp.shape[0], edges.shape[0]), dtype=np.int32)
        for k in range(pp.shape[0]):
            image = (edges * weights[pp[k]]).sum(axis=1)
            out[k] = order[np.searchsorted(sorted_codes, image)]
        return out

    def state_key(self, members: np.ndarray) -> bytes:
        if self.n > CANONICAL_MAX_N:
            return members.astype(np.int32).tobytes()
        img = self.tree_perms[:, members]
        marks = np.zeros((img.shape[0], self.size), dtype=bool)
        np.put_along_axis(marks, img.astype(np.int64), True, axis=1)
        packed = np.packbits(marks, axis=1)
        return min(row.tobytes() for row in packed)

    def goal(self, members: np.ndarray, goal: Goal) -> bool:
        if goal is Goal.ExactTree:
            return members.size == 1
        if goal is Goal.IsoClass:
            iso = self.iso[members]
            return bool((iso == iso[0]).all())
        return bool(np.bitwise_and.reduce(self.maxbits[members]) != 0)

    def splits(self, members: np.ndarray):
        """Informative queries: ``[(pair index, {answer: child members})]``,
        most balanced first."""
        rows = self.pd[members]
        out = []
        for p in range(rows.shape[1]):
            col = rows[:, p]
            values = np.unique(col)
            if values.size < 2:
                continue
            children = {int(v): members[col == v] for v in values}
            out.append((max(c.size for c in children.values()), p, children))
        out.sort(key=lambda item: (item[0], item[1]))
        return [(p, children) for _, p, children in out]


_TABLES: dict[int, GameTables] = {}


def game_tables(n: int) -> GameTables:
    if n not in _TABLES:
        _TABLES[n] = GameTables(n)
    return _TABLES[n]


@dataclass
class KnowledgeState:
    """Answers so far and the trees they leave open."""

    answered: AnsweredQueryGraph
    _members: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.answered.n

    @property
    def members(self) -> np.ndarray:
        if self._members is None:
            tables = game_tables(self.n)
            keep = np.ones(tables.size, dtype=bool)
            index = {p: i for i, p in enumerate(tables.pairs)}
            for pair, d in self.answered.answers.items():
                keep &= tables.pd[:, index[pair]] == d
            self._members = np.nonzero(keep)[0]
        return self._members

    @property
    def consistent(self) -> list[LabeledTree]:
        batch = game_tables(self.n).batch
        return [batch.tree(int(i)) for i in self.members]

    @property
    def memo_key(self) -> bytes:
        return game_tables(self.n).state_key(self.members)


class AdaptiveSolver:
    """Iterative-deepening minimax with per-state value bounds.

    ``bounds[key] = [lo, hi]`` brackets the value of a state; ``within(S, k)``
    decides whether the goal can be forced from ``S`` in at most ``k``
    queries and tightens the bracket either way.
    """

    def __init__(self, n: int, goal, memo: bool = True):
        self.n = n
        self.goal = Goal.parse(goal)
        self.tables = game_tables(n)
        self.memo = memo
        self.bounds: dict[bytes, list] = {}
        self.nodes = 0

    def _key(self, members):
        return self.tables.state_key(members) if self.memo else None

    def within(self, members: np.ndarray, k: int) -> bool:
        self.nodes += 1
        key = self._key(members)
        if key is not None:
            lo, hi = self.bounds.setdefault(key, [0, None])
            if hi is not None and hi <= k:
                return True
            if lo > k:
                return False
        if self.tables.goal(members, self.goal):
            ok = True
            if key is not None:
                self.bounds[key] = [0, 0]
            return ok
        ok = False
        if k > 0:
            for _, children in self.tables.splits(members):
                if all(self.within(c, k - 1) for c in children.values()):
                    ok = True
                    break
        if key is not None:
            b = self.bounds[key]
            if ok:
                b[1] = k if b[1] is None else min(b[1], k)
            else:
                b[0] = max(b[0], k + 1)
        return ok

    def value(self, members: np.ndarray | None = None) -> int:
        if members is None:
            members = np.arange(self.tables.size)
        k = 0
        if self.memo:
            k = self.bounds.get(self._key(members), [0, None])[0]
        while not self.within(members, k):
            k += 1
        return k

    def strategy(self, members: np.ndarray | None = None):
        """Decision tree realizing the optimal value from ``members``."""
        if members is None:
            members = np.arange(self.tables.size)
        k = self.value(members)
        return self._build(members, k)

    def _build(self, members, k):
        if self.tables.goal(members, self.goal):
            return {"trees": int(members.size)}
        for p, children in self.tables.splits(members):
            if all(self.within(c, k - 1) for c in children.values()):
                return {
                    "query": list(self.tables.pairs[p]),
                    "answers": {str(d): self._build(c, k - 1) for d, c in children.items()},
                }
        raise AssertionError("no query achieves the claimed value")


def solve_adaptive(n: int, goal, memo: bool = True, allow_large: bool = False) -> int:
    """Optimal worst-case number of adaptive queries for ``goal`` on ``n`` vertices."""
    _check_solver_cap(n, allow_large)
    return AdaptiveSolver(n, goal, memo=memo).value()


def optimal_strategy_extract(n: int, goal, allow_large: bool = False) -> dict:
    _check_solver_cap(n, allow_large)
    return AdaptiveSolver(n, goal).strategy()


def strategy_depth(node: dict) -> int:
    if "query" not in node:
        return 0
    return 1 + max(strategy_depth(c) for c in node["answers"].values())


def replay_strategy(node: dict, n: int, goal) -> int:
    """Play the decision tree against every labeled tree; return the worst depth.

    The consistent set at each leaf is recomputed from the transcript and
    checked with :func:`goal_reached`; any failure raises ``AssertionError``.
    """
    goal = Goal.parse(goal)
    trees = list(enumerate_trees(n, cap=SOLVER_HARD_CAP))
    worst = 0
    for hidden in trees:
        answers = AnsweredQueryGraph(n)
        cur = node
        while "query" in cur:
            a, b = cur["query"]
            d = hidden.distance(a, b)
            answers.add(a, b, d)
            cur = cur["answers"][str(d)]
        consistent = [t for t in trees if answers.matches(t)]
        if not goal_reached(consistent, goal):
            raise AssertionError(f"strategy stops short of the goal on {hidden.edges}")
        worst = max(worst, len(answers))
    return worst


# -- non-adaptive -------------------------------------------------------------


def _partition_meets_goal(tables: GameTables, cols, goal: Goal) -> bool:
    n = tables.n
    if len(cols) == 0:
        codes = np.zeros(tables.size, dtype=np.int64)
    else:
        codes = tables.pd[:, cols] @ (np.int64(n) ** np.arange(len(cols), dtype=np.int64))
    uniq, inv = np.unique(codes, return_inverse=True)
    if goal is Goal.ExactTree:
        return uniq.size == tables.size
    if goal is Goal.IsoClass:
        combined = inv.astype(np.int64) * (int(tables.iso.max()) + 1) + tables.iso
        return np.unique(combined).size == uniq.size
    order = np.argsort(inv, kind="stable")
    starts = np.searchsorted(inv[order], np.arange(uniq.size))
    common = np.bitwise_and.reduceat(tables.maxbits[order], starts)
    return bool((common != 0).all())


def query_graph_classes(n: int, size: int) -> np.ndarray:
    """One representative pair-index set per isomorphism class of query
    graphs with ``size`` edges, as rows of an ``(m, size)`` array."""
    tables = game_tables(n)
    npairs = len(tables.pairs)
    if size == 0:
        return np.zeros((1, 0), dtype=np.int64)
    combos = np.array(list(combinations(range(npairs), size)), dtype=np.int64)
    if n > CANONICAL_MAX_N:
        return combos
    pp = tables.pair_perms
    weights = np.int64(1) << np.arange(npairs, dtype=np.int64)
    canon = np.full(combos.shape[0], np.iinfo(np.int64).max, dtype=np.int64)
    for row in pp:
        canon = np.minimum(canon, weights[row[combos]].sum(axis=1))
    _, first = np.unique(canon, return_index=True)
    return combos[np.sort(first)]


def solve_nonadaptive(n: int, goal, allow_large: bool = False, return_graph: bool = False):
    """Smallest query graph whose answers always meet ``goal``."""
    _check_solver_cap(n, allow_large)
    goal = Goal.parse(goal)
    tables = game_tables(n)
    for size in range(len(tables.pairs) + 1):
        for cols in query_graph_classes(n, size):
            if _partition_meets_goal(tables, cols, goal):
                if return_graph:
                    return size, [tables.pairs[c] for c in cols]
                return size
    raise AssertionError("the complete query graph always determines the tree")


# -- regression table ---------------------------------------------------------

TABLE_KEYS = {
    ("adaptive", Goal.MaxDistPair): "f_A",
    ("adaptive", Goal.ExactTree): "g_A",
    ("adaptive", Goal.IsoClass): "h_A",
    ("nonadaptive", Goal.MaxDistPair): "f_N",
    ("nonadaptive", Goal.ExactTree): "g_N",
    ("nonadaptive", Goal.IsoClass): "h_N",
}


def compute_value_table(ns=range(2, 6)) -> dict:
    table = {}
    for (mode, goal), name in TABLE_KEYS.items():
        solve = solve_adaptive if mode == "adaptive" else solve_nonadaptive
        table[name] = {str(n): solve(n, goal) for n in ns}
    return table


def frozen_value_table() -> dict:
    """Solver values computed once and stored with the package."""
    text = resources.files("treeprobe").joinpath("data/solver_values.json").read_text()
    return json.loads(text)["values"]
