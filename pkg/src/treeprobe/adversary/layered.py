"""Adversary over depth-two trees: centre, ``n // 2`` middles, remaining leaves.

The roles are announced for free.  A middle-leaf query is answered 3 and a
leaf-leaf query 4 whenever some leaf-to-middle assignment still fits all
answers; otherwise the forced smaller value is given.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DomainError
from ..trees import LabeledTree

CENTER, MIDDLE, LEAF = "center", "middle", "leaf"


@dataclass
class LayeredAdversaryState:
    n: int
    center: int
    middles: list
    leaves: list
    forbidden: set = field(default_factory=set)  # (middle, leaf) pairs answered 3
    attached: dict = field(default_factory=dict)  # leaf -> middle, answered 1
    same: set = field(default_factory=set)  # leaf pairs answered 2
    different: set = field(default_factory=set)  # leaf pairs answered 4
    answers: dict = field(default_factory=dict)
    informative: int = 0

    def role(self, x):
        if x == self.center:
            return CENTER
        return MIDDLE if x in self._middle_set else LEAF

    def __post_init__(self):
        self._middle_set = set(self.middles)
        self._memo = {}


def layered_state(n: int, order=None) -> LayeredAdversaryState:
    """Fresh state.  ``order`` is a permutation of ``range(n)`` listing the
    centre, then the ``n // 2`` middles, then the leaves (identity by default)."""
    if n < 4:
        raise DomainError("the layered adversary needs n >= 4")
    m = n // 2
    order = list(range(n)) if order is None else [int(x) for x in order]
    if sorted(order) != list(range(n)):
        raise DomainError("order must be a permutation of range(n)")
    return LayeredAdversaryState(n, order[0], order[1 : m + 1], order[m + 1 :])


def _signature(state, extra):
    return (
        frozenset(state.forbidden),
        frozenset(state.attached.items()),
        frozenset(state.same),
        frozenset(state.different),
        extra,
    )


def _assignments(state, extra=None, limit=1):
    """Leaf-to-middle assignments satisfying all constraints (plus ``extra``).

    ``extra`` is ``("forbid", v, w)`` or ``("different", w1, w2)``.
    """
    leaves = state.leaves
    forbidden = set(state.forbidden)
    different = set(state.different)
    if extra is not None:
        if extra[0] == "forbid":
            forbidden.add((extra[1], extra[2]))
        else:
            different.add(_pair(extra[1], extra[2]))

    parent = {w: w for w in leaves}

    def find(w):
        while parent[w] != w:
            parent[w] = parent[parent[w]]
            w = parent[w]
        return w

    for a, b in state.same:
        parent[find(a)] = find(b)
    groups = {}
    for w in leaves:
        groups.setdefault(find(w), []).append(w)
    allowed = {}
    for root, members in groups.items():
        opts = set(state.middles)
        for w in members:
            if w in state.attached:
                opts &= {state.attached[w]}
            opts -= {v for v in state.middles if (v, w) in forbidden}
        allowed[root] = opts
    apart = {root: set() for root in groups}
    for a, b in different:
        ra, rb = find(a), find(b)
        if ra == rb:
            return []
        apart[ra].add(rb)
        apart[rb].add(ra)

    roots = sorted(groups, key=lambda r: (len(allowed[r]), r))
    chosen = {}
    found = []

    def search(i):
        if len(found) >= limit:
            return
        if i == len(roots):
            found.append({w: chosen[find(w)] for w in leaves})
            return
        r = roots[i]
        for v in sorted(allowed[r]):
            if any(chosen.get(o) == v for o in apart[r]):
                continue
            chosen[r] = v
            search(i + 1)
            del chosen[r]
            if len(found) >= limit:
                return

    search(0)
    return found


def _pair(a, b):
    return (a, b) if a < b else (b, a)


def layered_feasible(state, extra=None) -> bool:
    key = _signature(state, extra)
    hit = state._memo.get(key)
    if hit is None:
        hit = bool(_assignments(state, extra, limit=1))
        state._memo[key] = hit
    return hit


def layered_answer(state: LayeredAdversaryState, x: int, y: int) -> int:
    if x == y:
        raise DomainError("a query needs two distinct vertices")
    key = _pair(x, y)
    if key in state.answers:
        return state.answers[key]
    rx, ry = state.role(x), state.role(y)
    if rx == LEAF and ry == MIDDLE:
        x, y, rx, ry = y, x, ry, rx
    if {rx, ry} == {CENTER, MIDDLE}:
        d = 1
    elif {rx, ry} == {CENTER, LEAF}:
        d = 2
    elif rx == ry == MIDDLE:
        d = 2
    elif rx == MIDDLE:
        state.informative += 1
        if layered_feasible(state, ("forbid", x, y)):
            state.forbidden.add((x, y))
            d = 3
        else:
            state.attached[y] = x
            d = 1
    else:
        state.informative += 1
        if layered_feasible(state, ("different", x, y)):
            state.different.add(key)
            d = 4
        else:
            state.same.add(key)
            d = 2
    state.answers[key] = d
    return d


def layered_solutions(state, limit=2):
    return _assignments(state, None, limit=limit)


def assignment_tree(state, assignment) -> LabeledTree:
    edges = [(state.center, v) for v in state.middles]
    edges += [(v, w) for w, v in assignment.items()]
    return LabeledTree(state.n, tuple(edges))


def layered_witness(state) -> LabeledTree:
    sols = layered_solutions(state, limit=1)
    if not sols:
        raise DomainError("no consistent assignment")
    return assignment_tree(state, sols[0])


def layered_lower_bound(n: int) -> int:
    m = n // 2
    return (m - 1) * (n - m - 1)
