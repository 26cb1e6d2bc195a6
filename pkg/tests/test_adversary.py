from functools import lru_cache
from itertools import combinations

import numpy as np
import pytest

from treeprobe.adversary import (
    AdversarySession,
    DoubleStarAdversaryState,
    GameOver,
    augment_details,
    augmentation_ok,
    caterpillar_consistent,
    ds_answer,
    ds_caterpillar_witness,
    ds_certificate,
    ds_witness,
    edge_forced,
    layered_answer,
    layered_lower_bound,
    layered_solutions,
    layered_state,
    layered_witness,
    legs_of,
    pairwise_coverage_audit,
    side_distance,
    spider_answer,
    spider_determined,
    spider_lower_bound,
    spider_state,
    spider_witness,
    three_components_augment,
)
from treeprobe.errors import DomainError, InvariantViolation, ProtocolError
from treeprobe.harness import goal_open_before_end, play_game
from treeprobe.session import AnsweredQueryGraph, consistent_mask
from treeprobe.solver import Goal, goal_reached
from treeprobe.trees import LabeledTree, is_double_star, is_real_caterpillar, random_tree, tree_batch


def _facts(state):
    """Answered distances plus free revealed edges of a double-star game."""
    aqg = AnsweredQueryGraph(state.n)
    for (a, b), d in state.answers.items():
        aqg.add(a, b, d)
    for a, b in state.revealed_edges:
        if (a, b) not in aqg:
            aqg.add(a, b, side_distance(state, a, b, False))
    return aqg


@lru_cache(maxsize=None)
def _caterpillar_mask(n):
    b = tree_batch(n)
    return np.array([is_real_caterpillar(b.tree(i)) for i in range(len(b))])


def _random_ds_game(n, rng):
    """Play random queries until the adversary ends; yield the state after each answer."""
    state = DoubleStarAdversaryState(n)
    pairs = [tuple(int(v) for v in p) for p in combinations(range(n), 2)]
    for k in rng.permutation(len(pairs)):
        a, b = pairs[k]
        ds_answer(state, a, b)
        yield state
        if state.ended:
            return


class TestDoubleStar:
    def test_first_query_answers_one(self):
        s = AdversarySession("doublestar", 8)
        assert s.ask(2, 5) == 1
        assert (s.state.u, s.state.v) == (2, 5)
        assert s.free_info and s.free_info[0]["u"] == 2

    def test_repeat_is_cached(self):
        s = AdversarySession("doublestar", 8)
        s.ask(0, 1)
        d = s.ask(2, 3)
        assert s.ask(3, 2) == d and s.count == 2

    def test_small_n_rejected(self):
        with pytest.raises(DomainError):
            DoubleStarAdversaryState(4)

    def test_answers_after_end_rejected(self, rng):
        s = AdversarySession("doublestar", 7)
        for a, b in combinations(range(7), 2):
            s.ask(a, b)
            if s.ended:
                break
        assert s.ended
        with pytest.raises(GameOver):
            s.ask(0, 1)
        with pytest.raises(ProtocolError):
            ds_answer(s.state, 0, 1)

    def test_side_distances(self):
        st = DoubleStarAdversaryState(6)
        ds_answer(st, 0, 1)
        assert side_distance(st, 0, 2, True) == 1
        assert side_distance(st, 2, 3, True) == 2
        assert side_distance(st, 2, 3, False) == 3
        assert side_distance(st, 0, 3, False) == 2

    def test_certificate_requires_end(self):
        st = DoubleStarAdversaryState(6)
        ds_answer(st, 0, 1)
        with pytest.raises(ProtocolError):
            ds_certificate(st)

    @pytest.mark.parametrize("n", [6, 7])
    def test_structural_test_implies_caterpillar_exists(self, n, rng):
        dist = tree_batch(n).dist
        cat = _caterpillar_mask(n)
        for _ in range(15):
            for state in _random_ds_game(n, rng):
                fits = consistent_mask(_facts(state), dist)
                assert fits.any()
                if caterpillar_consistent(state):
                    assert (fits & cat).any()
                if state.ended:
                    # no caterpillar is left once the adversary concedes
                    assert not (fits & cat).any()

    @pytest.mark.parametrize("n", [6, 7])
    def test_goal_open_until_end(self, n, rng):
        b = tree_batch(n)
        for _ in range(10):
            for state in _random_ds_game(n, rng):
                if state.ended:
                    break
                idx = np.flatnonzero(consistent_mask(_facts(state), b.dist))
                assert not goal_reached([b.tree(int(i)) for i in idx], Goal.MaxDistPair)

    def test_witnesses_fit_before_end(self, rng):
        n = 9
        for _ in range(20):
            for state in _random_ds_game(n, rng):
                if state.ended:
                    break
                facts = _facts(state)
                star = ds_witness(state)
                assert is_double_star(star) and facts.matches(star)
                cat = ds_caterpillar_witness(state)
                if cat is not None:
                    assert is_real_caterpillar(cat) and facts.matches(cat)

    @pytest.mark.parametrize("n", [6, 9, 14])
    def test_certificate_and_replay(self, n, rng):
        for _ in range(10):
            pairs = []
            for state in _random_ds_game(n, rng):
                pairs.append(next(reversed(state.answers)))
            assert state.ended
            assert ds_certificate(state) >= 2 * n - 7
            assert len(pairs) >= 2 * n - 9
            assert not caterpillar_consistent(state)
            ok, note = goal_open_before_end(n, pairs[:-1])
            assert ok, note

    def test_certificate_violation_raises(self):
        st = DoubleStarAdversaryState(9)
        ds_answer(st, 0, 1)
        st.ended = True
        with pytest.raises(InvariantViolation):
            ds_certificate(st)

    def test_diameter_questioner_game(self, rng):
        rec = play_game("doublestar", "paper-diameter", 20, rng)
        assert rec.ok, rec.note
        assert rec.end_count >= 2 * 20 - 9


def _three_component_graph(rng):
    """Random bipartite graph on 5..14 vertices with exactly three components."""
    n = int(rng.integers(5, 15))
    perm = rng.permutation(n)
    cuts = sorted(rng.choice(np.arange(1, n), size=2, replace=False))
    groups = [perm[: cuts[0]], perm[cuts[0] : cuts[1]], perm[cuts[1] :]]
    edges = []
    for g in groups:
        k = len(g)
        if k == 1:
            continue
        t = random_tree(k, rng)
        local = [(int(g[a]), int(g[b])) for a, b in t.edges]
        edges += local
        depth = t.distances[0]
        # extra edges between the two colour classes
        for a, b in combinations(range(k), 2):
            if (depth[a] + depth[b]) % 2 == 1 and t.distance(a, b) > 1 and rng.random() < 0.3:
                edges.append((int(g[a]), int(g[b])))
    sizes = [len(g) for g in groups]
    anchor = int(groups[int(np.argmax(sizes))][0])
    return n, edges, anchor


class TestAugmentation:
    def test_random_graphs(self, rng):
        cases = set()
        for _ in range(10_000):
            n, edges, anchor = _three_component_graph(rng)
            det = augment_details(n, edges, anchor)
            cases.add(det["case"])
            assert augmentation_ok(n, edges, det["e"], det["f"], det["leaf"], anchor)
        assert cases == {"1", "2.1", "2.2"}

    def test_wrapper_returns_edges(self):
        # anchor edge 0-1, a 3-vertex star centred at 2, isolated vertex 5
        edges = [(0, 1), (2, 3), (2, 4)]
        e, f = three_components_augment(6, edges, 0)
        det = augment_details(6, edges, 0)
        assert (e, f) == (det["e"], det["f"])

    def test_isolated_components_case(self):
        # two isolated vertices: no spanning-tree leaf exists
        det = augment_details(5, [(0, 1), (1, 2)], 0)
        assert det["case"] == "2.2"
        assert augmentation_ok(5, [(0, 1), (1, 2)], det["e"], det["f"], det["leaf"], 0)

    def test_wrong_component_count(self):
        with pytest.raises(DomainError):
            augment_details(6, [(0, 1), (2, 3)], 0)
        with pytest.raises(DomainError):
            augment_details(5, [(1, 2), (3, 4)], 0)

    def test_checker_rejects_bad_edges(self):
        edges = [(0, 1), (2, 3), (2, 4)]
        assert not augmentation_ok(6, edges, (0, 2), (0, 1), 3, 0)
        # odd cycle
        assert not augmentation_ok(6, edges, (0, 2), (1, 2), 5, 0)


class TestLayered:
    def test_fixed_answers(self):
        st = layered_state(7)
        assert (st.center, st.middles, st.leaves) == (0, [1, 2, 3], [4, 5, 6])
        assert layered_answer(st, 0, 2) == 1
        assert layered_answer(st, 0, 5) == 2
        assert layered_answer(st, 1, 3) == 2
        assert st.informative == 0

    def test_first_middle_leaf_query_answers_three(self):
        st = layered_state(7)
        assert layered_answer(st, 1, 4) == 3
        assert layered_answer(st, 5, 6) == 4

    def test_forced_attachment(self):
        st = layered_state(7)
        assert layered_answer(st, 1, 4) == 3
        assert layered_answer(st, 2, 4) == 3
        assert layered_answer(st, 3, 4) == 1

    def test_every_answer_stays_feasible(self, rng):
        for n in (7, 10, 12):
            st = layered_state(n, rng.permutation(n))
            aqg = AnsweredQueryGraph(n)
            for a, b in combinations(range(n), 2):
                aqg.add(a, b, layered_answer(st, a, b))
                w = layered_witness(st)
                assert aqg.matches(w)
            assert len(layered_solutions(st, limit=2)) == 1
            assert st.informative >= layered_lower_bound(n)

    def test_lower_bound_formula(self):
        assert layered_lower_bound(7) == 2 * 3
        assert layered_lower_bound(12) == 5 * 5

    def test_bad_order(self):
        with pytest.raises(DomainError):
            layered_state(6, [0, 1, 2, 3, 4, 4])


class TestSpider:
    def test_forced_edge(self):
        st = spider_state(7)
        assert spider_answer(st, 1, 4) == 3
        assert spider_answer(st, 1, 5) == 3
        assert edge_forced(st, 1, 6)
        assert spider_answer(st, 1, 6) == 1
        assert spider_answer(st, 4, 5) == 4
        assert st.cross_queries == 3

    def test_even_n_has_centre_leaf(self):
        st = spider_state(8)
        assert len(st.middles) == 4 and len(st.leaves) == 3
        assert spider_witness(st).n == 8

    def test_audit_empty_transcript(self):
        st = spider_state(9)
        assert not pairwise_coverage_audit(AnsweredQueryGraph(9), legs_of(st))

    def test_reveal_flag_mismatch(self):
        st = spider_state(7, reveal_roles=False)
        with pytest.raises(DomainError):
            spider_answer(st, 1, 4, reveal_roles=True)

    def test_swap_keeps_uncovered_legs_ambiguous(self, rng):
        for n in (9, 11, 13):
            st = spider_state(n, rng.permutation(n))
            aqg = AnsweredQueryGraph(n)
            pairs = list(combinations(range(n), 2))
            for k in rng.permutation(len(pairs))[: len(pairs) // 3]:
                a, b = pairs[k]
                aqg.add(a, b, spider_answer(st, a, b))
            legs = legs_of(st)
            for (v1, w1), (v2, w2) in combinations(legs, 2):
                touched = any(
                    (min(a, b), max(a, b)) in aqg for a in (v1, w1) for b in (v2, w2)
                )
                if touched:
                    continue
                edges = [(st.center, v) for v in st.middles]
                for v, w in legs:
                    partner = {w1: v2, w2: v1}.get(w, v)
                    edges.append((partner, w))
                swapped = LabeledTree(n, tuple(edges))
                assert aqg.matches(swapped) and swapped != spider_witness(st)
                assert not spider_determined(st)

    def test_full_game_determines_spider(self):
        n = 11
        st = spider_state(n)
        aqg = AnsweredQueryGraph(n)
        for a, b in combinations(range(n), 2):
            aqg.add(a, b, spider_answer(st, a, b))
        assert spider_determined(st)
        assert aqg.matches(spider_witness(st))
        assert pairwise_coverage_audit(aqg, legs_of(st))
        assert st.cross_queries >= spider_lower_bound(n)

    def test_lower_bound_formula(self):
        assert spider_lower_bound(9) == 6
        assert spider_lower_bound(10) == 6
