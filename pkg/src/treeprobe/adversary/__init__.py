"""Adversary strategies and a session wrapper that lets questioners play them."""

from __future__ import annotations

import json

from ..errors import ProtocolError
from ..session import AnsweredQueryGraph
from .doublestar import (
    DoubleStarAdversaryState,
    augment_details,
    augmentation_ok,
    caterpillar_consistent,
    ds_answer,
    ds_caterpillar_witness,
    ds_certificate,
    ds_witness,
    side_distance,
    three_components_augment,
)
from .layered import (
    LayeredAdversaryState,
    layered_answer,
    layered_lower_bound,
    layered_solutions,
    layered_state,
    layered_witness,
)
from .spider import (
    SpiderAdversaryState,
    edge_forced,
    leaf_matching,
    legs_of,
    pairwise_coverage_audit,
    spider_answer,
    spider_determined,
    spider_lower_bound,
    spider_state,
    spider_witness,
)


class GameOver(ProtocolError):
    """The adversary has conceded; no further queries are accepted."""


class AdversarySession:
    """Query session whose answers come from an adversary strategy.

    ``strategy`` is one of ``"doublestar"``, ``"layered"``, ``"spider"`` or
    ``"spider-hidden"``.  Free information never increments ``count``; it is
    appended to ``free_info`` and to the event ``log``.
    """

    def __init__(self, strategy: str, n: int, order=None):
        self.strategy = strategy
        self.n = n
        self.count = 0
        self.transcript = AnsweredQueryGraph(n)
        self.log: list[dict] = []
        self.free_info: list[dict] = []
        self.ended_at: int | None = None
        if strategy == "doublestar":
            self.state = DoubleStarAdversaryState(n)
        elif strategy == "layered":
            self.state = layered_state(n, order)
            self._announce_roles()
        elif strategy in ("spider", "spider-hidden"):
            self.state = spider_state(n, order, reveal_roles=strategy == "spider")
            if self.state.reveal_roles:
                self._announce_roles()
        else:
            raise ValueError(f"unknown strategy {strategy!r}")

    def _announce_roles(self):
        s = self.state
        info = {"roles": {"center": s.center, "middles": list(s.middles), "leaves": list(s.leaves)}}
        self.free_info.append(info)
        self.log.append({"pair": None, "answer": None, "free_info": info, "count": 0})

    @property
    def ended(self) -> bool:
        return bool(getattr(self.state, "ended", False))

    def ask(self, x: int, y: int) -> int:
        if self.ended:
            raise GameOver("the adversary has ended the game")
        cached = self.transcript.get(x, y)
        if cached is not None:
            return cached
        info = None
        if self.strategy == "doublestar":
            d, info = ds_answer(self.state, x, y)
        elif self.strategy == "layered":
            d = layered_answer(self.state, x, y)
        else:
            d = spider_answer(self.state, x, y)
        self.transcript.add(x, y, d)
        self.count += 1
        event = {"pair": [min(x, y), max(x, y)], "answer": d, "count": self.count}
        if info:
            event["free_info"] = info
            self.free_info.append(info)
        self.log.append(event)
        if self.ended and self.ended_at is None:
            self.ended_at = self.count
        return d

    def log_lines(self) -> str:
        return "\n".join(json.dumps(e) for e in self.log)


__all__ = [
    "AdversarySession",
    "DoubleStarAdversaryState",
    "GameOver",
    "LayeredAdversaryState",
    "SpiderAdversaryState",
    "augment_details",
    "augmentation_ok",
    "caterpillar_consistent",
    "ds_answer",
    "ds_caterpillar_witness",
    "ds_certificate",
    "ds_witness",
    "edge_forced",
    "layered_answer",
    "layered_lower_bound",
    "layered_solutions",
    "layered_state",
    "layered_witness",
    "leaf_matching",
    "legs_of",
    "pairwise_coverage_audit",
    "side_distance",
    "spider_answer",
    "spider_determined",
    "spider_lower_bound",
    "spider_state",
    "spider_witness",
    "three_components_augment",
]
