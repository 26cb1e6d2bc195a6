"""Adversary that keeps both a double star and a real caterpillar alive.

After the first query ``uv`` (answered 1) every distance answer is the one
a double star with centres ``u, v`` would give, so the game reduces to
side queries: *same* or *opposite* side.  The adversary answers *opposite*
whenever the bipartite graph of opposite answers allows it.  The first time
that graph has three components, two extra opposite edges are revealed for
free so that it becomes connected with a well-placed spanning-tree leaf.
The game ends once no real caterpillar fits the answers any more.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..errors import DomainError, InvariantViolation, ProtocolError
from ..trees import LabeledTree, double_star


def _key(x, y):
    return (x, y) if x < y else (y, x)


class _ParityDSU:
    """Union-find that tracks the bipartition parity of each vertex."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.parity = [0] * n
        self.size = [1] * n
        self.components = n

    def find(self, x):
        path = []
        while self.parent[x] != x:
            path.append(x)
            x = self.parent[x]
        root = x
        acc = 0
        for y in reversed(path):
            acc ^= self.parity[y]
            self.parity[y] = acc
            self.parent[y] = root
        return root

    def side(self, x):
        self.find(x)
        return self.parity[x] if self.parent[x] != x else 0

    def union_opposite(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        px, py = self.side(x), self.side(y)
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.parity[ry] = px ^ py ^ 1
        self.size[rx] += self.size[ry]
        self.components -= 1
        return True


class _SideTracker:
    """Incremental end-of-game test once the sides are fixed.

    For each side ``S`` with centre ``c`` it keeps the components of the
    *same* graph inside ``S`` together with the set of non-centre vertices of
    the other side joined to them by an opposite edge.  A component that
    avoids ``c``, is a proper part of ``S - c`` and misses some candidate
    vertex certifies a consistent real caterpillar.
    """

    def __init__(self, n, side, centers, g1_edges, g2_edges):
        self.side = side
        self.centers = centers
        self.members = [[x for x in range(n) if side[x] == s] for s in (0, 1)]
        self.parent = list(range(n))
        self.size = [1] * n
        self.adj = [set() for _ in range(n)]
        self.deficient = [set(), set()]
        for x, y in g2_edges:
            self._union(x, y)
        for x, y in g1_edges:
            self._link(x, y)
        for s in (0, 1):
            for x in self.members[s]:
                self._refresh(self._find(x))

    def _find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def _union(self, x, y):
        rx, ry = self._find(x), self._find(y)
        if rx == ry:
            return rx
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        big, small = self.adj[rx], self.adj[ry]
        if len(big) < len(small):
            big, small = small, big
        big |= small
        self.adj[rx] = big
        self.adj[ry] = set()
        s = self.side[rx]
        self.deficient[s].discard(ry)
        return rx

    def _link(self, x, y):
        # x and y lie on opposite sides
        if y != self.centers[self.side[y]]:
            self.adj[self._find(x)].add(y)
        if x != self.centers[self.side[x]]:
            self.adj[self._find(y)].add(x)

    def _refresh(self, root):
        s = self.side[root]
        c = self.centers[s]
        other = len(self.members[1 - s]) - 1
        bad = (
            self._find(c) != root
            and self.size[root] < len(self.members[s]) - 1
            and len(self.adj[root]) < other
        )
        if bad:
            self.deficient[s].add(root)
        else:
            self.deficient[s].discard(root)

    def add_same(self, x, y):
        self._refresh(self._union(x, y))

    def add_opposite(self, x, y):
        self._link(x, y)
        self._refresh(self._find(x))
        self._refresh(self._find(y))

    def caterpillar_alive(self):
        return bool(self.deficient[0] or self.deficient[1])


@dataclass
class DoubleStarAdversaryState:
    n: int
    u: int | None = None
    v: int | None = None
    g1: set = field(default_factory=set)
    g2: set = field(default_factory=set)
    revealed_edges: list = field(default_factory=list)
    special_moment_passed: bool = False
    ended: bool = False
    answers: dict = field(default_factory=dict)
    special_case: str | None = None

    def __post_init__(self):
        if self.n < 5:
            raise DomainError("the double-star adversary needs n >= 5")
        self._dsu = _ParityDSU(self.n)
        self._tracker = None

    def sides(self):
        """Side (0 for ``u``'s, 1 for ``v``'s) of every vertex, or None before the
        opposite graph is connected."""
        if self._dsu.components != 1:
            return None
        su = self._dsu.side(self.u)
        return [self._dsu.side(x) ^ su for x in range(self.n)]

    def components(self):
        groups = {}
        for x in range(self.n):
            groups.setdefault(self._dsu.find(x), []).append(x)
        return list(groups.values())


def side_distance(state: DoubleStarAdversaryState, x: int, y: int, same: bool) -> int:
    """Distance in any double star with centres ``u, v`` given the side relation."""
    centers = (state.u, state.v)
    hits = (x in centers) + (y in centers)
    if same:
        return 1 if hits else 2
    return 3 - hits


def _same_forced(state, x, y):
    dsu = state._dsu
    return dsu.find(x) == dsu.find(y) and dsu.side(x) == dsu.side(y)


def ds_answer(state: DoubleStarAdversaryState, x: int, y: int):
    """Answer the distance query ``(x, y)``.

    Returns ``(distance, free_info)`` where ``free_info`` is None or a dict
    with information handed to the questioner without a query.
    """
    if state.ended:
        raise ProtocolError("the game is over")
    if x == y:
        raise DomainError("a query needs two distinct vertices")
    key = _key(x, y)
    if key in state.answers:
        return state.answers[key], None
    if state.u is None:
        state.u, state.v = x, y
        state.g1.add(key)
        state._dsu.union_opposite(x, y)
        state.answers[key] = 1
        info = {"declared": "double star with centres u, v or a real caterpillar", "u": x, "v": y}
        _after_merge(state, info)
        return 1, info

    same = _same_forced(state, x, y)
    d = side_distance(state, x, y, same)
    state.answers[key] = d
    info = None
    if same:
        state.g2.add(key)
        if state._tracker is not None:
            state._tracker.add_same(x, y)
    else:
        state.g1.add(key)
        merged = state._dsu.union_opposite(x, y)
        if state._tracker is not None:
            state._tracker.add_opposite(x, y)
        if merged:
            info = _after_merge(state, None)
    if state._tracker is not None and not state._tracker.caterpillar_alive():
        state.ended = True
    return d, info


def _after_merge(state, info):
    if state.special_moment_passed or state._dsu.components != 3:
        return info
    details = augment_details(state.n, state.g1, state.u)
    state.special_case = details["case"]
    info = dict(info or {})
    revealed = []
    for a, b in (details["e"], details["f"]):
        key = _key(a, b)
        state.g1.add(key)
        state._dsu.union_opposite(a, b)
        state.revealed_edges.append(key)
        revealed.append([key[0], key[1], side_distance(state, a, b, False)])
    state.special_moment_passed = True
    info["revealed"] = revealed
    side = state.sides()
    state._tracker = _SideTracker(state.n, side, (state.u, state.v), state.g1, state.g2)
    if not state._tracker.caterpillar_alive():
        state.ended = True
    return info


# -- the two-edge augmentation ------------------------------------------------


def _bipartite_components(n, edges):
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    color = [-1] * n
    comps = []
    trees = []
    for s in range(n):
        if color[s] != -1:
            continue
        color[s] = 0
        comp = [s]
        tree_edges = []
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in sorted(adj[x]):
                if color[y] == -1:
                    color[y] = color[x] ^ 1
                    comp.append(y)
                    tree_edges.append((x, y))
                    queue.append(y)
                elif color[y] == color[x]:
                    raise DomainError("graph is not bipartite")
        comps.append(sorted(comp))
        trees.append(tree_edges)
    return comps, trees, color


def _parts(comp, color):
    a = [x for x in comp if color[x] == 0]
    b = [x for x in comp if color[x] == 1]
    # smaller part first; on ties the part holding the smallest vertex first
    if len(a) > len(b) or (len(a) == len(b) and b and a[0] > b[0]):
        a, b = b, a
    return a, b


def _tree_leaves(comp, tree_edges):
    if len(comp) == 1:
        return []
    deg = {x: 0 for x in comp}
    for a, b in tree_edges:
        deg[a] += 1
        deg[b] += 1
    return sorted(x for x in comp if deg[x] == 1)


def augment_details(n, edges, anchor):
    """Two edges joining a three-component bipartite graph, with bookkeeping.

    Returns a dict with the edges ``e`` and ``f``, the spanning-tree leaf
    ``leaf`` placed in the not-larger part, and the ``case`` that fired.
    """
    comps, trees, color = _bipartite_components(n, edges)
    if len(comps) != 3:
        raise DomainError(f"expected exactly 3 components, found {len(comps)}")
    idx = next(i for i, c in enumerate(comps) if anchor in c)
    if len(comps[idx]) < 2:
        raise DomainError("the anchored component needs at least two vertices")
    c1, c2 = _parts(comps[idx], color)
    others = [i for i in range(3) if i != idx]

    # Case 1: a spanning-tree leaf in the smaller part (either part on ties)
    for j in others:
        small, large = _parts(comps[j], color)
        for w in _tree_leaves(comps[j], trees[j]):
            if w in small or len(small) == len(large):
                if w not in small:
                    small, large = large, small
                k = others[0] if j == others[1] else others[1]
                _, large_k = _parts(comps[k], color)
                x = c1[0]
                return {"e": (x, large[0]), "f": (x, large_k[0]), "leaf": w, "case": "1"}

    # Case 2: no such leaf; both other components are unbalanced
    pa, pb = others
    sa, la = _parts(comps[pa], color)
    sb, lb = _parts(comps[pb], color)
    if len(la) - len(sa) < len(lb) - len(sb):
        pa, pb = pb, pa
        sa, la, sb, lb = sb, lb, sa, la
    y, z, t = c2[0], la[0], c1[0]
    if len(lb) >= 2:
        x = _tree_leaves(comps[pb], trees[pb])[0]
        x2 = next(a for a in lb if a != x)
        return {"e": (x2, y), "f": (z, t), "leaf": x, "case": "2.1"}
    (x,) = lb
    return {"e": (x, y), "f": (z, t), "leaf": x, "case": "2.2"}


def three_components_augment(n, edges, anchor):
    """Two edges making the bipartite graph connected with a good leaf.

    ``edges`` must form a bipartite graph on ``0..n-1`` with exactly three
    components; ``anchor`` picks the component (of size >= 2) the other two
    are attached around.
    """
    details = augment_details(n, edges, anchor)
    return details["e"], details["f"]


def augmentation_ok(n, edges, e, f, leaf, anchor) -> bool:
    """Independent check of the augmentation's guarantee."""
    comps, _, _ = _bipartite_components(n, edges)
    anchored = next(c for c in comps if anchor in c)
    if leaf in anchored:
        return False
    try:
        full, _, color = _bipartite_components(n, list(edges) + [e, f])
    except DomainError:
        return False
    if len(full) != 1:
        return False
    # a spanning tree with `leaf` as a leaf exists iff removing it keeps
    # the graph connected
    rest = [(a, b) for a, b in list(edges) + [e, f] if leaf not in (a, b)]
    adj = {x: [] for x in range(n) if x != leaf}
    for a, b in rest:
        adj[a].append(b)
        adj[b].append(a)
    start = next(iter(adj))
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    if len(seen) != n - 1:
        return False
    mine = sum(1 for x in range(n) if color[x] == color[leaf])
    return mine <= n - mine


# -- end-of-game test and certificate ----------------------------------------


def caterpillar_consistent(state: DoubleStarAdversaryState) -> bool:
    """Structural test that some real caterpillar still fits the game.

    Recomputed from scratch; the adversary itself uses an incremental
    version of the same test.
    """
    if state.u is None:
        return True
    if state._dsu.components >= 3:
        return True
    side = state.sides()
    if side is None:
        raise InvariantViolation("opposite graph has two components")
    n = state.n
    centers = (state.u, state.v)
    members = [[x for x in range(n) if side[x] == s] for s in (0, 1)]
    g1_adj = [set() for _ in range(n)]
    g2_adj = [[] for _ in range(n)]
    for a, b in state.g1:
        g1_adj[a].add(b)
        g1_adj[b].add(a)
    for a, b in state.g2:
        g2_adj[a].append(b)
        g2_adj[b].append(a)
    for s in (0, 1):
        c, other_c = centers[s], centers[1 - s]
        seen = set()
        for start in members[s]:
            if start in seen:
                continue
            comp = {start}
            queue = deque([start])
            while queue:
                x = queue.popleft()
                for y in g2_adj[x]:
                    if y not in comp:
                        comp.add(y)
                        queue.append(y)
            seen |= comp
            if c in comp or len(comp) >= len(members[s]) - 1:
                continue
            for xp in members[1 - s]:
                if xp != other_c and not any(y in comp for y in g1_adj[xp]):
                    return True
    return False


def ds_witness(state: DoubleStarAdversaryState) -> LabeledTree:
    """A double star consistent with every answer and revealed edge so far."""
    if state.u is None:
        raise ProtocolError("no query answered yet")
    n = state.n
    su = state._dsu.side(state.u)
    ru = state._dsu.find(state.u)
    rel = {}
    for x in range(n):
        if x in (state.u, state.v):
            continue
        # components without the centres are placed by their own parity
        rel[x] = state._dsu.side(x) ^ (su if state._dsu.find(x) == ru else 0)
    if len(set(rel.values())) < 2:
        # flip one free component so that both centres keep a leaf
        free = next((x for x in rel if state._dsu.find(x) != ru), None)
        if free is not None:
            root = state._dsu.find(free)
            rel = {x: r ^ (state._dsu.find(x) == root) for x, r in rel.items()}
    return double_star(n, state.u, state.v, [x for x, r in rel.items() if r == 0])


def ds_certificate(state: DoubleStarAdversaryState) -> int:
    """Edge count of the combined answer graph at the end of the game.

    Raises :class:`InvariantViolation` if it is below ``2n - 7``.
    """
    if not state.ended:
        raise ProtocolError("the certificate is only defined once the game has ended")
    edges = len(state.g1 | state.g2)
    if edges < 2 * state.n - 7:
        raise InvariantViolation(f"{edges} edges < 2n - 7 = {2 * state.n - 7}")
    return edges


def _caterpillar_from_sides(n, centers, side, comp, x):
    """Move the leaves in ``comp`` from their centre to ``x`` (other side)."""
    s = side[next(iter(comp))]
    edges = [tuple(centers)]
    for y in range(n):
        if y in centers:
            continue
        if y in comp:
            edges.append((x, y))
        else:
            edges.append((centers[side[y]], y))
    return LabeledTree(n, tuple(edges)) if side[x] != s else None


def _same_components(members, g2_adj):
    seen, out = set(), []
    for start in members:
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            a = queue.popleft()
            for b in g2_adj[a]:
                if b not in comp:
                    comp.add(b)
                    queue.append(b)
        seen |= comp
        out.append(comp)
    return out


def ds_caterpillar_witness(state: DoubleStarAdversaryState):
    """A real caterpillar consistent with the game so far, or None.

    Builds a consistent double star (choosing the orientation of each
    opposite-answer component) in which some same-answer component ``C``
    sits on one side without its centre and without all other leaves, and a
    non-centre vertex ``x`` on the other side has no answered pair into
    ``C``.  Re-hanging ``C`` from ``x`` gives the caterpillar.
    """
    if state.u is None:
        raise ProtocolError("no query answered yet")
    n = state.n
    centers = (state.u, state.v)
    dsu = state._dsu
    g1_adj = [set() for _ in range(n)]
    g2_adj = [[] for _ in range(n)]
    for a, b in state.g1:
        g1_adj[a].add(b)
        g1_adj[b].add(a)
    for a, b in state.g2:
        g2_adj[a].append(b)
        g2_adj[b].append(a)

    def attempt(side):
        for s in (0, 1):
            members = [y for y in range(n) if side[y] == s]
            for comp in _same_components(members, g2_adj):
                if centers[s] in comp or len(comp) >= len(members) - 1:
                    continue
                for x in range(n):
                    if side[x] == s or x in centers or any(y in comp for y in g1_adj[x]):
                        continue
                    return _caterpillar_from_sides(n, centers, side, comp, x)
        return None

    if dsu.components == 1:
        return attempt(state.sides())

    groups = {}
    for y in range(n):
        groups.setdefault(dsu.find(y), []).append(y)
    center_root = dsu.find(state.u)
    base = {r: (dsu.side(state.u) if r == center_root else 0) for r in groups}
    others = [r for r in groups if r != center_root]
    for r1 in others:
        for r2 in others:
            if r1 == r2:
                continue
            flips = dict(base)
            # put the largest part of every other component on r1's side
            for r in others:
                if r not in (r1, r2):
                    ones = sum(dsu.side(y) for y in groups[r])
                    flips[r] = int(ones > len(groups[r]) - ones)
            for f2 in (0, 1):
                flips[r2] = f2
                side = [dsu.side(y) ^ flips[dsu.find(y)] for y in range(n)]
                tree = attempt(side)
                if tree is not None:
                    return tree
    return None
