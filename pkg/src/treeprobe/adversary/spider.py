"""Spider adversaries.

The hidden tree is a spider whose leaf-to-middle matching is kept open.  A
middle-leaf query is answered 3 unless that edge lies in every remaining
leaf-saturating matching.  With ``reveal_roles`` the vertex roles are handed
to the questioner at the start; without it they stay secret and the same
answers must also prove that the tree is a spider at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DomainError
from ..trees import LabeledTree

CENTER, MIDDLE, LEAF = "center", "middle", "leaf"


@dataclass
class SpiderAdversaryState:
    n: int
    center: int
    middles: list
    leaves: list
    reveal_roles: bool = True
    forbidden: set = field(default_factory=set)  # (middle, leaf) answered 3
    forced: dict = field(default_factory=dict)  # leaf -> middle answered 1
    answers: dict = field(default_factory=dict)
    cross_queries: int = 0

    def __post_init__(self):
        self._middle_set = set(self.middles)

    def role(self, x):
        if x == self.center:
            return CENTER
        return MIDDLE if x in self._middle_set else LEAF


def spider_state(n: int, order=None, reveal_roles: bool = True) -> SpiderAdversaryState:
    """Fresh state; ``order`` lists centre, then middles, then leaves."""
    if n < 5:
        raise DomainError("the spider adversary needs n >= 5")
    m = n // 2
    order = list(range(n)) if order is None else [int(x) for x in order]
    if sorted(order) != list(range(n)):
        raise DomainError("order must be a permutation of range(n)")
    return SpiderAdversaryState(n, order[0], order[1 : m + 1], order[m + 1 :], reveal_roles)


def _options(state, forbidden):
    used = set(state.forced.values())
    opts = {}
    for w in state.leaves:
        if w in state.forced:
            opts[w] = [state.forced[w]]
        else:
            opts[w] = [v for v in state.middles if v not in used and (v, w) not in forbidden]
    return opts


def leaf_matching(state, forbidden=None):
    """A matching of every leaf to a distinct allowed middle, or None."""
    forbidden = state.forbidden if forbidden is None else forbidden
    opts = _options(state, forbidden)
    owner: dict = {}

    def augment(w, seen):
        for v in opts[w]:
            if v in seen:
                continue
            seen.add(v)
            if v not in owner or augment(owner[v], seen):
                owner[v] = w
                return True
        return False

    for w in sorted(state.leaves, key=lambda x: len(opts[x])):
        if not augment(w, set()):
            return None
    return {w: v for v, w in owner.items()}


def edge_forced(state, v, w) -> bool:
    """True when edge ``vw`` lies in every leaf-saturating matching."""
    if state.forced.get(w) == v:
        return True
    return leaf_matching(state, state.forbidden | {(v, w)}) is None


def spider_answer(state: SpiderAdversaryState, x: int, y: int, reveal_roles: bool | None = None) -> int:
    """Distance answer for ``(x, y)``; ``reveal_roles`` only affects the free
    information announced at the start, never the answers."""
    if reveal_roles is not None and reveal_roles != state.reveal_roles:
        raise DomainError("reveal_roles must match the state's variant")
    if x == y:
        raise DomainError("a query needs two distinct vertices")
    key = (x, y) if x < y else (y, x)
    if key in state.answers:
        return state.answers[key]
    rx, ry = state.role(x), state.role(y)
    if rx == LEAF and ry == MIDDLE:
        x, y, rx, ry = y, x, ry, rx
    roles = {rx, ry}
    if roles == {CENTER, MIDDLE}:
        d = 1
    elif roles == {CENTER, LEAF}:
        d = 2
    elif rx == ry == MIDDLE:
        d = 2
    elif rx == ry == LEAF:
        d = 4
    else:
        state.cross_queries += 1
        if edge_forced(state, x, y):
            state.forced[y] = x
            d = 1
        else:
            state.forbidden.add((x, y))
            d = 3
    state.answers[key] = d
    return d


def spider_witness(state) -> LabeledTree:
    match = leaf_matching(state)
    if match is None:
        raise DomainError("no leaf-saturating matching remains")
    edges = [(state.center, v) for v in state.middles] + [(v, w) for w, v in match.items()]
    return LabeledTree(state.n, tuple(edges))


def spider_determined(state) -> bool:
    """True when exactly one matching (hence one spider) remains."""
    match = leaf_matching(state)
    if match is None:
        return False
    return all(edge_forced(state, v, w) for w, v in match.items())


def legs_of(state, match=None):
    """Matched legs ``(middle, leaf)`` of the current witness."""
    match = leaf_matching(state) if match is None else match
    return sorted((v, w) for w, v in match.items())


def pairwise_coverage_audit(transcript, legs) -> bool:
    """True iff every two legs are joined by at least one asked query.

    ``transcript`` is an answered query graph (or any iterable of pairs);
    ``legs`` lists ``(middle, leaf)`` pairs.
    """
    if hasattr(transcript, "answers"):
        asked = set(transcript.answers)
    else:
        asked = {tuple(sorted(p[:2])) for p in transcript}
    legs = list(legs)
    for i in range(len(legs)):
        for j in range(i + 1, len(legs)):
            if not any(
                ((a, b) if a < b else (b, a)) in asked for a in legs[i] for b in legs[j]
            ):
                return False
    return True


def spider_lower_bound(n: int) -> int:
    """Cross-pair queries forced by the revealed-roles adversary."""
    k = (n - 1) // 2 if n % 2 else (n - 2) // 2
    return k * (k - 1) // 2
