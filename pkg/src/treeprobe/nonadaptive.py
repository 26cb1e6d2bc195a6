"""Non-adaptive query graphs, their decoders, and lower-bound witnesses.

A query graph is described by the pairs it leaves out.  Two constructions
are provided: the complete graph minus a perfect (or near-perfect)
matching, which pins down the tree exactly, and the complete graph minus a
Hamiltonian cycle, which pins it down up to isomorphism and reveals a pair
at maximum distance once ``n >= 13``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DecodeError, DomainError, InvariantViolation
from .session import AnsweredQueryGraph
from .trees import LabeledTree, all_pairs_distance, canonical_code


def _key(a, b):
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class QueryGraphSpec:
    """Query graph on ``n`` vertices given by its missing (unqueried) pairs."""

    n: int
    missing: frozenset

    def __post_init__(self):
        norm = frozenset(_key(int(a), int(b)) for a, b in self.missing)
        for a, b in norm:
            if a == b or not (0 <= a < self.n and 0 <= b < self.n):
                raise DomainError(f"bad missing pair ({a}, {b})")
        object.__setattr__(self, "missing", norm)

    @property
    def size(self) -> int:
        return self.n * (self.n - 1) // 2 - len(self.missing)

    def queried_mask(self) -> np.ndarray:
        mask = ~np.eye(self.n, dtype=bool)
        for a, b in self.missing:
            mask[a, b] = mask[b, a] = False
        return mask

    def queried_pairs(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(self.n) for b in range(a + 1, self.n) if (a, b) not in self.missing]

    def degrees(self) -> list[int]:
        return self.queried_mask().sum(axis=1).tolist()

    def answers_from(self, t: LabeledTree) -> AnsweredQueryGraph:
        d = t.distances
        return AnsweredQueryGraph(self.n, {p: int(d[p]) for p in self.queried_pairs()})

    def to_json(self) -> dict:
        return {"n": self.n, "missing": [list(p) for p in sorted(self.missing)]}

    @classmethod
    def from_json(cls, obj) -> QueryGraphSpec:
        if not isinstance(obj, dict):
            text = str(obj)
            obj = json.loads(Path(text).read_text() if not text.lstrip().startswith("{") else text)
        return cls(int(obj["n"]), frozenset(tuple(p) for p in obj["missing"]))


def build_reconstruction_query_graph(n: int) -> QueryGraphSpec:
    """All pairs except the matching ``(0,1), (2,3), ...``."""
    if n < 5:
        raise DomainError("the matching construction needs n >= 5")
    return QueryGraphSpec(n, frozenset((2 * i, 2 * i + 1) for i in range(n // 2)))


def build_min_degree_query_graph(n: int) -> QueryGraphSpec:
    """All pairs except the Hamiltonian cycle ``0-1-...-(n-1)-0``."""
    if n < 13:
        raise DomainError("the cycle-complement construction needs n >= 13")
    return QueryGraphSpec(n, frozenset(_key(i, (i + 1) % n) for i in range(n)))


def _answer_matrix(spec: QueryGraphSpec, answers: AnsweredQueryGraph) -> np.ndarray:
    if answers.n != spec.n:
        raise DomainError("answers and query graph disagree on n")
    expected = set(spec.queried_pairs())
    got = set(answers.answers)
    if got != expected:
        raise DecodeError("coverage", f"{len(expected - got)} queried pairs unanswered, {len(got - expected)} extra")
    d = np.zeros((spec.n, spec.n), dtype=np.int64)
    for (a, b), v in answers.answers.items():
        if not 1 <= v <= spec.n - 1:
            raise DecodeError("range", f"answer {v} for {(a, b)}")
        d[a, b] = d[b, a] = v
    return d


def _tree_from_adjacency(n, adj) -> LabeledTree:
    iu, ju = np.nonzero(np.triu(adj, 1))
    if iu.size != n - 1:
        raise DecodeError("spanning-tree", f"{iu.size} edges recovered, a tree needs {n - 1}")
    try:
        return LabeledTree(n, tuple(zip(iu.tolist(), ju.tolist())))
    except ValueError as exc:
        raise DecodeError("spanning-tree", str(exc)) from None


def decode_exact(spec: QueryGraphSpec, answers: AnsweredQueryGraph) -> LabeledTree:
    """Recover the hidden tree from the matching-complement query graph."""
    if spec.n < 5:
        raise DomainError("exact decoding needs n >= 5")
    if any(v > 1 for v in np.bincount(np.array([x for p in spec.missing for x in p], dtype=np.int64), minlength=spec.n)):
        raise DomainError("missing pairs must form a matching")
    d = _answer_matrix(spec, answers)
    missing = np.array(sorted(spec.missing), dtype=np.int64).reshape(-1, 2)
    adj, status = kernels.decode_matching_batch(d[None].astype(np.int32), spec.queried_mask(), missing)
    if status[0]:
        raise DecodeError("probe-pair", "the neighbour pair needed to settle a missing pair was not queried")
    tree = _tree_from_adjacency(spec.n, adj[0])
    full = tree.distances
    mask = spec.queried_mask()
    if not np.array_equal(full[mask], d[mask]):
        raise DecodeError("metric", "recovered tree does not reproduce the answers")
    return tree


def decode_exact_batch(spec: QueryGraphSpec, dist: np.ndarray):
    """Run the exact decoder on a stack of true distance matrices.

    Only the queried entries are read.  Returns ``(adjacency, status)``.
    """
    missing = np.array(sorted(spec.missing), dtype=np.int64).reshape(-1, 2)
    return kernels.decode_matching_batch(dist, spec.queried_mask(), missing)


# -- completion search --------------------------------------------------------


@dataclass
class CompletionSet:
    completions: list
    shared_code: bytes | None
    exhaustive: bool = True
    distances: list = field(default_factory=list, repr=False)


def _candidate_values(n, d, known, u, v):
    common = [w for w in range(n) if w not in (u, v) and known[u, w] and known[v, w]]
    if not common:
        return list(range(1, n))
    parities = {(d[u, w] + d[v, w]) % 2 for w in common}
    if len(parities) > 1:
        raise DecodeError("parity", f"common neighbours disagree on the parity of d{(u, v)}")
    lo = max(1, max(abs(d[u, w] - d[v, w]) for w in common))
    hi = min(d[u, w] + d[v, w] for w in common)
    par = parities.pop()
    vals = [x for x in range(lo, hi + 1) if x % 2 == par]
    if not vals:
        raise DecodeError("bound-window", f"no admissible value for d{(u, v)} in [{lo}, {hi}]")
    return vals


def _locally_ok(n, d, known, u, v):
    duv = d[u, v]
    others = [a for a in range(n) if a not in (u, v) and known[u, a] and known[v, a]]
    for a in others:
        # triangle inequality is the degenerate four-point case
        if duv > d[u, a] + d[v, a] or abs(d[u, a] - d[v, a]) > duv:
            return False
    for i, a in enumerate(others):
        for b in others[i + 1 :]:
            if not known[a, b]:
                continue
            s1 = duv + d[a, b]
            s2 = d[u, a] + d[v, b]
            s3 = d[u, b] + d[v, a]
            top = sorted((s1, s2, s3))
            if top[1] != top[2]:
                return False
    return True


def complete_missing_distances(spec: QueryGraphSpec, answers: AnsweredQueryGraph, max_solutions: int | None = 64) -> CompletionSet:
    """Every tree metric extending the answers (up to ``max_solutions``).

    Backtracks over the missing pairs.  Each candidate value respects the
    parity and window forced by common queried neighbours, and every
    assignment is pruned by the four-point condition on fully known
    quadruples.  A full assignment is kept when its distance-1 graph is a
    spanning tree whose metric is the assigned matrix.
    """
    n = spec.n
    d = _answer_matrix(spec, answers)
    known = spec.queried_mask()
    np.fill_diagonal(known, True)
    missing = sorted(spec.missing)
    cands = {p: _candidate_values(n, d, known, *p) for p in missing}
    order = sorted(missing, key=lambda p: (len(cands[p]), p))

    found: list[LabeledTree] = []
    mats: list[np.ndarray] = []
    pruned = {"four-point": 0, "spanning-tree": 0}
    limit = max_solutions if max_solutions is not None else float("inf")
    capped = False

    def search(i):
        nonlocal capped
        if len(found) >= limit:
            capped = True
            return
        if i == len(order):
            adj = d == 1
            iu, ju = np.nonzero(np.triu(adj, 1))
            if iu.size != n - 1:
                pruned["spanning-tree"] += 1
                return
            try:
                t = LabeledTree(n, tuple(zip(iu.tolist(), ju.tolist())))
            except ValueError:
                pruned["spanning-tree"] += 1
                return
            if np.array_equal(t.distances, d):
                found.append(t)
                mats.append(d.copy())
            else:
                pruned["spanning-tree"] += 1
            return
        u, v = order[i]
        for val in cands[(u, v)]:
            d[u, v] = d[v, u] = val
            known[u, v] = known[v, u] = True
            if _locally_ok(n, d, known, u, v):
                search(i + 1)
            else:
                pruned["four-point"] += 1
            known[u, v] = known[v, u] = False
            d[u, v] = d[v, u] = 0
            if len(found) >= limit:
                capped = True
                return

    search(0)
    if not found:
        rule = "four-point" if pruned["four-point"] and not pruned["spanning-tree"] else "spanning-tree"
        raise DecodeError(rule, "no tree is consistent with the answers")
    codes = {canonical_code(t) for t in found}
    shared = codes.pop() if len(codes) == 1 else None
    return CompletionSet(found, shared, exhaustive=not capped, distances=mats)


def decode_isomorphism(spec: QueryGraphSpec, answers: AnsweredQueryGraph, max_solutions: int | None = 64) -> bytes:
    """Canonical code shared by every completion."""
    cs = complete_missing_distances(spec, answers, max_solutions)
    if cs.shared_code is None:
        raise InvariantViolation("two non-isomorphic trees fit the same answers")
    return cs.shared_code


def find_max_distance_pair_nonadaptive(spec: QueryGraphSpec, answers: AnsweredQueryGraph, max_solutions: int | None = 64):
    """A pair at maximum distance in every completion, with that distance."""
    cs = complete_missing_distances(spec, answers, max_solutions)
    mats = np.stack(cs.distances)
    diams = mats.max(axis=(1, 2))
    at_max = (mats == diams[:, None, None]).all(axis=0)
    hits = np.argwhere(np.triu(at_max, 1))
    if hits.size == 0:
        raise InvariantViolation("no pair attains the diameter in every completion")
    x, y = (int(c) for c in hits[0])
    dist = int(mats[0, x, y])
    if len(set(diams.tolist())) != 1:
        raise InvariantViolation("completions disagree on the diameter")
    if dist <= 3 and dist != max(answers.answers.values()):
        raise InvariantViolation("small diameter differs from the largest answer")
    return x, y, dist


# -- lower-bound witness and audits -------------------------------------------


def lemi_witness(spec: QueryGraphSpec, v: int | None = None):
    """Two trees agreeing on every query of ``spec`` but with diameters 4 and 3.

    Needs a vertex ``v`` with at least three unqueried partners
    ``u1, u2, u4``.  ``T`` is the path ``u1 u2 u3 u4 v`` with every other
    vertex pendant on ``u3``; ``T'`` moves ``v`` from ``u4`` to ``u2``.
    """
    n = spec.n
    if n < 13:
        raise DomainError("the witness is stated for n >= 13")
    partners = {x: sorted(b if a == x else a for a, b in spec.missing if x in (a, b)) for x in range(n)}
    if v is None:
        v = next((x for x in range(n) if len(partners[x]) >= 3), None)
        if v is None:
            raise DomainError("every vertex has Q-degree at least n - 3")
    elif len(partners[v]) < 3:
        raise DomainError(f"vertex {v} has fewer than three unqueried partners")
    u1, u2, u4 = partners[v][:3]
    rest = [x for x in range(n) if x not in (u1, u2, u4, v)]
    u3 = rest[0]
    base = [(u1, u2), (u2, u3), (u3, u4)] + [(u3, x) for x in rest[1:]]
    t = LabeledTree(n, tuple(base + [(u4, v)]))
    t2 = LabeledTree(n, tuple(base + [(u2, v)]))
    return t, t2


def common_neighbor_audit(spec: QueryGraphSpec) -> bool:
    """True iff every four vertices share a queried neighbour outside them."""
    n = spec.n
    mask = spec.queried_mask()
    bits = [sum(1 << j for j in range(n) if mask[i, j]) for i in range(n)]
    for quad in combinations(range(n), 4):
        common = bits[quad[0]] & bits[quad[1]] & bits[quad[2]] & bits[quad[3]]
        if common == 0:
            return False
    return True


def reconstruction_query_count(n: int) -> int:
    return -(-n * (n - 2) // 2)


def min_degree_query_count(n: int) -> int:
    return n * (n - 3) // 2
