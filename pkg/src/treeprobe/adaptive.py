"""Adaptive questioners: diameter pair, full reconstruction, spider identification.

Every algorithm drives any object with an ``ask(x, y)`` method and a
``count`` attribute, so the same code plays against a truthful
:class:`~treeprobe.session.QuerySession` or an adversary session.
Arbitrary choices always resolve to the smallest index.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError
from .trees import LabeledTree


@dataclass(frozen=True)
class DiameterResult:
    pair: tuple[int, int]
    distance: int
    queries_used: int
    # (u0, inferred d(v, u0)) for n >= 4, kept so callers can audit the inference
    inferred: tuple[int, int] | None = None


@dataclass(frozen=True)
class ReconstructionResult:
    tree: LabeledTree
    queries_used: int


def find_diameter_pair(s, n: int) -> DiameterResult:
    """Two vertices at maximum distance using at most ``2n - 4`` queries (n >= 4).

    Query vertex 0 against everything, take the farthest vertex ``v`` and
    query it against everything except 0 and one neighbour ``u0`` of 0.
    The distance ``d(v, u0)`` follows because exactly one neighbour of 0
    lies on the 0-``v`` path.
    """
    start = s.count
    if n < 2:
        raise DomainError("need at least two vertices")
    if n == 2:
        return DiameterResult((0, 1), s.ask(0, 1), s.count - start)
    if n == 3:
        if s.ask(0, 1) == 2:
            return DiameterResult((0, 1), 2, s.count - start)
        if s.ask(0, 2) == 2:
            return DiameterResult((0, 2), 2, s.count - start)
        return DiameterResult((1, 2), 2, s.count - start)

    u = 0
    du = [0] * n
    for x in range(1, n):
        du[x] = s.ask(u, x)
    far = max(du)
    v = du.index(far)
    nbrs = [x for x in range(1, n) if du[x] == 1]
    u0 = next(x for x in nbrs if x != v)

    dv = [0] * n
    dv[u] = far
    for x in range(1, n):
        if x != v and x != u0:
            dv[x] = s.ask(v, x)
    # the neighbour of u on the u-v path sits at far - 1, all others at far + 1
    on_path_elsewhere = any(dv[x] == far - 1 for x in nbrs if x != u0)
    dv[u0] = far + 1 if on_path_elsewhere else far - 1

    best = max(dv)
    w = dv.index(best)
    pair = (v, w) if v < w else (w, v)
    return DiameterResult(pair, best, s.count - start, (u0, dv[u0]))


def reconstruct_tree(s, n: int) -> ReconstructionResult:
    """Recover the hidden tree exactly.

    Levels by distance from vertex 0, then every pair between consecutive
    levels (skipping level 0 to level 1, whose edges are already known).
    """
    start = s.count
    if n < 2:
        raise DomainError("need at least two vertices")
    levels: dict[int, list[int]] = {}
    for x in range(1, n):
        levels.setdefault(s.ask(0, x), []).append(x)
    edges = [(0, x) for x in levels.get(1, [])]
    depth = 1
    while depth + 1 in levels:
        for a in levels[depth]:
            for b in levels[depth + 1]:
                if s.ask(a, b) == 1:
                    edges.append((a, b))
        depth += 1
    return ReconstructionResult(LabeledTree(n, tuple(edges)), s.count - start)


def _probe_center(s, n: int, dx: list[int], x: int) -> int:
    m = n // 2
    near = [y for y in range(n) if y != x and dx[y] == 1]
    second = [y for y in range(n) if y != x and dx[y] == 2]
    if len(near) == m:
        return x
    if len(near) == 2:
        # x is a middle with a leaf; the neighbour at distance <= 2 from a
        # non-neighbour of x is the centre
        y = near[0]
        z = next(z for z in range(n) if z != x and dx[z] >= 2)
        return y if s.ask(y, z) <= 2 else near[1]
    if len(near) == 1 and len(second) == 1:
        return second[0]
    if len(near) == 1:
        return near[0]
    raise DomainError("probe answers do not match a spider")


def identify_spider(s, n: int) -> ReconstructionResult:
    """Recover a hidden spider with ``n // 2`` legs (n >= 7).

    The probe vertex 0's distance profile reveals the centre; its distances
    also split the rest into middles and leaves.  Each middle is then
    matched to its leaf by querying the still unmatched leaves.
    """
    if n < 7:
        raise DomainError("spider identification needs n >= 7")
    start = s.count
    x = 0
    dx = [0] * n
    for y in range(1, n):
        dx[y] = s.ask(x, y)
    center = _probe_center(s, n, dx, x)

    if center == x:
        middles = [y for y in range(n) if dx[y] == 1]
    else:
        d_center = dx[center]
        # a vertex is a middle iff its distance from x has the parity of
        # d(x, center) + 1
        middles = [y for y in range(n) if y != center and (dx[y] + d_center) % 2 == 1]
        if dx[center] == 1:
            # x itself is a middle
            middles = sorted(set(middles) | {x})
    mids = set(middles)
    leaves = [y for y in range(n) if y != center and y not in mids]
    if len(middles) != n // 2 or len(leaves) != n - n // 2 - 1:
        raise DomainError("vertex split does not match a spider")

    edges = [(center, v) for v in middles]
    unmatched = list(leaves)
    leafless_left = len(middles) - len(leaves)
    for v in middles:
        found = None
        for i, w in enumerate(unmatched):
            if i == len(unmatched) - 1 and leafless_left == 0:
                # every remaining middle carries a leaf, so the last one is v's
                found = w
                break
            if s.ask(v, w) == 1:
                found = w
                break
        if found is None:
            leafless_left -= 1
            continue
        unmatched.remove(found)
        edges.append((v, found))
    return ReconstructionResult(LabeledTree(n, tuple(edges)), s.count - start)


def diameter_query_ceiling(n: int) -> int:
    return 2 * n - 4 if n >= 4 else {2: 1, 3: 2}.get(n, 0)


def reconstruct_query_ceiling(n: int) -> int:
    return (n - 1) + (n - 1) ** 2 // 4


def spider_query_ceiling(n: int) -> int:
    k = n - n // 2
    return k * (k - 1) // 2 + 5 * n
