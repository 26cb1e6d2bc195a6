"""Labeled trees: Prüfer coding, enumeration, metrics, shapes, canonical codes."""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import kernels
from .errors import CapExceeded, DomainError

DEFAULT_CAP = 9


@dataclass(frozen=True)
class LabeledTree:
    """A tree on vertices ``0..n-1``.

    Edges are normalised to sorted ``(a, b)`` tuples with ``a < b`` and
    stored as a sorted tuple, so equal trees compare and hash equal.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a tree needs at least one vertex")
        norm = []
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop at {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) out of range for n={self.n}")
            norm.append((a, b) if a < b else (b, a))
        norm.sort()
        if len(set(norm)) != len(norm):
            raise ValueError("repeated edge")
        if len(norm) != self.n - 1:
            raise ValueError(f"a tree on {self.n} vertices has {self.n - 1} edges, got {len(norm)}")
        object.__setattr__(self, "edges", tuple(norm))
        if len(self._bfs_order) != self.n:
            raise ValueError("edges do not form a connected graph")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable) -> LabeledTree:
        return cls(n, tuple(tuple(e) for e in edges))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        return tuple(tuple(sorted(x)) for x in nbrs)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(x) for x in self.adjacency)

    @cached_property
    def _bfs_order(self) -> tuple[tuple[int, int], ...]:
        # (vertex, parent) pairs in BFS order from 0; parent of 0 is -1
        adj = self.adjacency
        seen = [False] * self.n
        seen[0] = True
        order = [(0, -1)]
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    order.append((y, x))
                    queue.append(y)
        return tuple(order)

    @cached_property
    def distances(self) -> np.ndarray:
        """Read-only ``(n, n)`` hop-distance matrix."""
        d = all_pairs_distance(self)
        d.setflags(write=False)
        return d

    def distance(self, x: int, y: int) -> int:
        return int(self.distances[x, y])

    def relabel(self, perm) -> LabeledTree:
        """Image of the tree under the vertex map ``i -> perm[i]``."""
        return LabeledTree(self.n, tuple((perm[a], perm[b]) for a, b in self.edges))

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}


# -- construction helpers ---------------------------------------------------


def path_tree(n: int) -> LabeledTree:
    return LabeledTree(n, tuple((i, i + 1) for i in range(n - 1)))


def star_tree(n: int, center: int = 0) -> LabeledTree:
    return LabeledTree(n, tuple((center, i) for i in range(n) if i != center))


def double_star(n: int, u: int, v: int, u_side: Iterable[int]) -> LabeledTree:
    """Double star with centres ``u, v``; ``u_side`` lists the leaves on ``u``."""
    u_side = set(u_side)
    edges = [(u, v)]
    for x in range(n):
        if x in (u, v):
            continue
        edges.append((u, x) if x in u_side else (v, x))
    return LabeledTree(n, tuple(edges))


def spider_tree(n: int, center: int = 0, middles=None, leaves=None) -> LabeledTree:
    """Spider with ``n // 2`` middles; middle ``i`` carries ``leaves[i]`` if present.

    Defaults: centre 0, middles ``1..n//2``, leaves the remaining vertices.
    """
    m = n // 2
    k = n - m - 1
    if middles is None or leaves is None:
        rest = [x for x in range(n) if x != center]
        middles = rest[:m]
        leaves = rest[m:]
    if len(middles) != m or len(leaves) != k:
        raise ValueError(f"spider on {n} vertices needs {m} middles and {k} leaves")
    edges = [(center, v) for v in middles]
    edges += [(middles[i], leaves[i]) for i in range(k)]
    return LabeledTree(n, tuple(edges))


def random_tree(n: int, rng: np.random.Generator) -> LabeledTree:
    """Uniformly random labeled tree via a uniform Prüfer sequence."""
    if n == 1:
        return LabeledTree(1, ())
    return prufer_decode(rng.integers(0, n, size=n - 2).tolist(), n)


def load_tree(source) -> LabeledTree:
    """Read a tree from a JSON file path, JSON text, or an already-parsed dict.

    Accepts ``{"n": .., "edges": [[a, b], ..]}`` or ``{"n": .., "prufer": [..]}``.
    """
    if isinstance(source, dict):
        obj = source
    else:
        text = str(source)
        obj = json.loads(Path(text).read_text() if not text.lstrip().startswith("{") else text)
    n = int(obj["n"])
    if "edges" in obj:
        return LabeledTree.from_edges(n, obj["edges"])
    if "prufer" in obj:
        return prufer_decode(obj["prufer"], n)
    raise ValueError("tree JSON needs an 'edges' or a 'prufer' field")


# -- Prüfer coding and enumeration -----------------------------------------


def prufer_decode(seq, n: int) -> LabeledTree:
    if n < 2:
        raise ValueError("Prüfer decoding needs n >= 2")
    seq = [int(s) for s in seq]
    if len(seq) != n - 2:
        raise ValueError(f"sequence for n={n} must have length {n - 2}, got {len(seq)}")
    if any(not 0 <= s < n for s in seq):
        raise DomainError(f"Prüfer entries must lie in [0, {n})")
    child, parent = kernels.prufer_decode_batch(np.asarray([seq], dtype=np.int64).reshape(1, n - 2), n)
    return LabeledTree(n, tuple(zip(child[0].tolist(), parent[0].tolist())))


def prufer_encode(t: LabeledTree) -> list[int]:
    n = t.n
    if n < 2:
        raise ValueError("Prüfer encoding needs n >= 2")
    degree = list(t.degrees)
    adj = [set(x) for x in t.adjacency]
    seq = []
    ptr = 0
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for _ in range(n - 2):
        (nxt,) = adj[leaf]
        seq.append(nxt)
        adj[nxt].discard(leaf)
        degree[leaf] = 0
        degree[nxt] -= 1
        if degree[nxt] == 1 and nxt < ptr:
            leaf = nxt
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    return seq


def _check_cap(n: int, cap: int | None) -> None:
    cap = DEFAULT_CAP if cap is None else cap
    if n > cap:
        raise CapExceeded(f"n={n} exceeds the enumeration cap {cap}")


def prufer_sequences(n: int) -> np.ndarray:
    """All ``n**(n-2)`` Prüfer sequences in lexicographic order."""
    if n <= 2:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((n,) * (n - 2)).reshape(n - 2, -1).T
    return np.ascontiguousarray(grids, dtype=np.int64)


def enumerate_trees(n: int, cap: int | None = None) -> Iterator[LabeledTree]:
    """Yield every labeled tree on ``n`` vertices once, in Prüfer order."""
    if n < 2:
        raise ValueError("enumeration needs n >= 2")
    _check_cap(n, cap)
    for seq in product(range(n), repeat=n - 2):
        yield prufer_decode(seq, n)


@dataclass
class TreeBatch:
    """Every labeled tree on ``n`` vertices as stacked arrays.

    ``child[t], parent[t]`` list the edges of tree ``t`` in Prüfer
    leaf-removal order; ``dist[t]`` is its distance matrix.
    """

    n: int
    seqs: np.ndarray
    child: np.ndarray
    parent: np.ndarray
    dist: np.ndarray

    def __len__(self):
        return self.seqs.shape[0]

    def tree(self, index: int) -> LabeledTree:
        return LabeledTree(self.n, tuple(zip(self.child[index].tolist(), self.parent[index].tolist())))

    def pair_distances(self) -> np.ndarray:
        """``(N, n*(n-1)/2)`` distances over pairs in ``pair_list(n)`` order."""
        iu = np.triu_indices(self.n, 1)
        return self.dist[:, iu[0], iu[1]]


_BATCH_CACHE: dict[int, TreeBatch] = {}


def tree_batch(n: int, cap: int | None = None, cache: bool = True) -> TreeBatch:
    """Decode and measure all labeled trees on ``n`` vertices at once."""
    if n < 2:
        raise ValueError("enumeration needs n >= 2")
    _check_cap(n, cap)
    if cache and n in _BATCH_CACHE:
        return _BATCH_CACHE[n]
    seqs = prufer_sequences(n)
    child, parent = kernels.prufer_decode_batch(seqs, n)
    dist = np.zeros((seqs.shape[0], n, n), dtype=np.int8)
    kernels.distances_from_order(child, parent, dist)
    batch = TreeBatch(n, seqs, child, parent, dist)
    if cache and n <= 8:
        _BATCH_CACHE[n] = batch
    return batch


def pair_list(n: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


# -- metrics ----------------------------------------------------------------


def all_pairs_distance(t: LabeledTree) -> np.ndarray:
    """Hop-distance matrix of ``t`` as a fresh ``(n, n)`` int32 array."""
    n = t.n
    out = np.zeros((1, n, n), dtype=np.int32)
    if n == 1:
        return out[0]
    order = t._bfs_order
    # reversed BFS order is a valid leaf-removal order
    child = np.array([[v for v, _ in reversed(order[2:])] + [order[1][0]]], dtype=np.int64)
    parent = np.array([[p for _, p in reversed(order[2:])] + [order[1][1]]], dtype=np.int64)
    kernels.distances_from_order(child, parent, out)
    return out[0]


def four_point_ok(dist: np.ndarray) -> bool:
    d = np.asarray(dist)
    return int(kernels.four_point_violations(d.reshape(1, *d.shape))[0]) == 0


def diameter_pair(t: LabeledTree) -> tuple[int, int, int]:
    """Lexicographically smallest pair attaining the diameter."""
    if t.n < 2:
        raise DomainError("a single vertex has no pair")
    d = t.distances
    best = int(d.max())
    a, b = np.argwhere(np.triu(d == best, 1))[0]
    return int(a), int(b), best


def diameter(t: LabeledTree) -> int:
    return int(t.distances.max())


# -- shapes -----------------------------------------------------------------


class TreeShape(enum.Enum):
    STAR = "Star"
    DOUBLE_STAR = "DoubleStar"
    REAL_CATERPILLAR = "RealCaterpillar"
    SPIDER = "Spider"
    PATH = "Path"
    OTHER = "Other"


def is_double_star(t: LabeledTree) -> bool:
    return sum(1 for x in t.degrees if x >= 2) == 2


def is_real_caterpillar(t: LabeledTree) -> bool:
    return sum(1 for x in t.degrees if x >= 2) == 3


def spider_center(t: LabeledTree) -> int | None:
    """Centre of ``t`` if it is a spider with ``n // 2`` legs, else None."""
    n = t.n
    m = n // 2
    deg = t.degrees
    for c in range(n):
        if deg[c] != m:
            continue
        mids = t.adjacency[c]
        if all(deg[v] <= 2 for v in mids) and sum(deg[v] - 1 for v in mids) == n - 1 - m:
            return c
    return None


def classify_shape(t: LabeledTree) -> TreeShape:
    """Shape tag; checks run Path, Star, DoubleStar, RealCaterpillar, Spider."""
    if t.n < 2:
        raise ValueError("shape needs n >= 2")
    deg = t.degrees
    if max(deg) <= 2:
        return TreeShape.PATH
    inner = sum(1 for x in deg if x >= 2)
    if inner == 1:
        return TreeShape.STAR
    if inner == 2:
        return TreeShape.DOUBLE_STAR
    if inner == 3:
        return TreeShape.REAL_CATERPILLAR
    if spider_center(t) is not None:
        return TreeShape.SPIDER
    return TreeShape.OTHER


# -- canonical codes ---------------------------------------------------------


def tree_centers(t: LabeledTree) -> list[int]:
    n = t.n
    if n <= 2:
        return list(range(n))
    deg = list(t.degrees)
    layer = [x for x in range(n) if deg[x] == 1]
    left = n
    while left > 2:
        left -= len(layer)
        nxt = []
        for x in layer:
            for y in t.adjacency[x]:
                deg[y] -= 1
                if deg[y] == 1:
                    nxt.append(y)
        layer = nxt
    return sorted(layer)


def _rooted_code(t: LabeledTree, root: int) -> bytes:
    parent = {root: -1}
    order = [root]
    for x in order:
        for y in t.adjacency[x]:
            if y != parent[x]:
                parent[y] = x
                order.append(y)
    codes: dict[int, bytes] = {}
    for x in reversed(order):
        kids = sorted(codes.pop(y) for y in t.adjacency[x] if y != parent[x])
        codes[x] = b"(" + b"".join(kids) + b")"
    return codes[root]


def canonical_code(t: LabeledTree) -> bytes:
    """AHU string rooted at the centre; minimum over both centres if bicentral."""
    return min(_rooted_code(t, c) for c in tree_centers(t))


def brute_force_isomorphic(t1: LabeledTree, t2: LabeledTree) -> bool:
    """Isomorphism test by trying every vertex bijection (test oracle)."""
    from itertools import permutations

    if t1.n != t2.n:
        return False
    target = set(t2.edges)
    return any(set(t1.relabel(p).edges) == target for p in permutations(range(t1.n)))
