"""Distance-query oracle, transcripts and consistency checking."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import BudgetExhausted, DomainError
from .trees import DEFAULT_CAP, LabeledTree, _check_cap, prufer_sequences, tree_batch
from . import kernels


def _key(x: int, y: int) -> tuple[int, int]:
    return (x, y) if x < y else (y, x)


class AnsweredQueryGraph:
    """Queried pairs of an ``n``-vertex tree together with their distances."""

    def __init__(self, n: int, answers=None):
        self.n = n
        self.answers: dict[tuple[int, int], int] = {}
        for pair, d in (answers or {}).items():
            self.add(pair[0], pair[1], d)

    def add(self, x: int, y: int, d: int) -> None:
        if x == y:
            raise DomainError("a query needs two distinct vertices")
        if not (0 <= x < self.n and 0 <= y < self.n):
            raise DomainError(f"pair ({x}, {y}) out of range for n={self.n}")
        key = _key(x, y)
        old = self.answers.get(key)
        if old is not None and old != d:
            raise DomainError(f"pair {key} already answered {old}, not {d}")
        self.answers[key] = int(d)

    def get(self, x: int, y: int):
        return self.answers.get(_key(x, y))

    def __contains__(self, pair) -> bool:
        return _key(*pair) in self.answers

    def __len__(self) -> int:
        return len(self.answers)

    def __iter__(self):
        return iter(self.answers.items())

    def copy(self) -> AnsweredQueryGraph:
        return AnsweredQueryGraph(self.n, dict(self.answers))

    def matches(self, t: LabeledTree) -> bool:
        """True when ``t`` reproduces every answer."""
        d = t.distances
        return all(int(d[a, b]) == v for (a, b), v in self.answers.items())

    def to_json(self) -> dict:
        return {"n": self.n, "answers": [[a, b, d] for (a, b), d in sorted(self.answers.items())]}

    @classmethod
    def from_json(cls, obj) -> AnsweredQueryGraph:
        if not isinstance(obj, dict):
            text = str(obj)
            obj = json.loads(Path(text).read_text() if not text.lstrip().startswith("{") else text)
        aqg = cls(int(obj["n"]))
        for a, b, d in obj["answers"]:
            aqg.add(int(a), int(b), int(d))
        return aqg


class QuerySession:
    """Answers distance queries about a hidden tree and records them.

    Repeated pairs are answered from the transcript and not counted again.
    ``dist`` may be supplied to skip recomputing the hidden metric.
    """

    def __init__(self, hidden: LabeledTree | None = None, budget: int | None = None, *, dist=None):
        if hidden is None and dist is None:
            raise DomainError("a session needs a hidden tree or its distance matrix")
        self._hidden = hidden
        self._dist = hidden.distances if dist is None else dist
        self.n = int(self._dist.shape[0])
        self.budget = budget
        self.transcript = AnsweredQueryGraph(self.n)
        self.count = 0

    @property
    def hidden(self) -> LabeledTree:
        if self._hidden is None:
            iu, ju = np.nonzero(np.triu(self._dist == 1, 1))
            self._hidden = LabeledTree(self.n, tuple(zip(iu.tolist(), ju.tolist())))
        return self._hidden

    def ask(self, x: int, y: int) -> int:
        if x == y:
            raise DomainError("a query needs two distinct vertices")
        if not (0 <= x < self.n and 0 <= y < self.n):
            raise DomainError(f"pair ({x}, {y}) out of range for n={self.n}")
        key = _key(x, y)
        cached = self.transcript.answers.get(key)
        if cached is not None:
            return cached
        if self.budget is not None and self.count >= self.budget:
            raise BudgetExhausted(f"budget of {self.budget} queries used up")
        d = int(self._dist[x, y])
        self.transcript.answers[key] = d
        self.count += 1
        return d


def session_new(hidden: LabeledTree, budget: int | None = None) -> QuerySession:
    return QuerySession(hidden, budget)


def _answer_arrays(aqg: AnsweredQueryGraph):
    if not aqg.answers:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    arr = np.array([[a, b, d] for (a, b), d in aqg.answers.items()], dtype=np.int64)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def consistent_mask(aqg: AnsweredQueryGraph, dist: np.ndarray) -> np.ndarray:
    """Boolean mask over a stack of distance matrices matching every answer."""
    a, b, d = _answer_arrays(aqg)
    mask = np.ones(dist.shape[0], dtype=bool)
    for i in range(a.size):
        mask &= dist[:, a[i], b[i]] == d[i]
    return mask


_CHUNK = 1 << 18


def check_consistency(aqg: AnsweredQueryGraph, cap: int | None = None, witness: bool = True):
    """Decide whether some labeled tree realises all answers.

    Returns ``(ok, tree)``; ``tree`` is a witness when ``ok`` and witness mode
    is on.  Exhaustive over all labeled trees, so ``n`` must respect ``cap``.
    """
    n = aqg.n
    if any(d < 1 or d > n - 1 for d in aqg.answers.values()):
        return False, None
    if n <= 2:
        t = LabeledTree(n, ((0, 1),) if n == 2 else ())
        return (aqg.matches(t) if n == 2 else True), t
    if not aqg.answers and not witness:
        return True, None
    _check_cap(n, cap if cap is not None else DEFAULT_CAP)
    if n <= 8:
        batch = tree_batch(n)
        hits = np.flatnonzero(consistent_mask(aqg, batch.dist))
        if hits.size == 0:
            return False, None
        return True, (batch.tree(int(hits[0])) if witness else None)
    seqs = prufer_sequences(n)
    for start in range(0, seqs.shape[0], _CHUNK):
        chunk = seqs[start : start + _CHUNK]
        child, parent = kernels.prufer_decode_batch(chunk, n)
        dist = np.zeros((chunk.shape[0], n, n), dtype=np.int8)
        kernels.distances_from_order(child, parent, dist)
        hits = np.flatnonzero(consistent_mask(aqg, dist))
        if hits.size:
            i = int(hits[0])
            tree = LabeledTree(n, tuple(zip(child[i].tolist(), parent[i].tolist())))
            return True, (tree if witness else None)
    return False, None
