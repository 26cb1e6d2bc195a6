import numpy as np
import pytest

from treeprobe.adaptive import (
    diameter_query_ceiling,
    find_diameter_pair,
    identify_spider,
    reconstruct_query_ceiling,
    reconstruct_tree,
    spider_query_ceiling,
)
from treeprobe.errors import BudgetExhausted
from treeprobe.session import QuerySession, session_new
from treeprobe.trees import enumerate_trees, path_tree, random_tree, spider_tree, star_tree, tree_batch


class TestDiameter:
    def test_two_vertices(self):
        s = session_new(path_tree(2))
        res = find_diameter_pair(s, 2)
        assert res.pair == (0, 1) and res.queries_used == 1

    def test_path_trace(self):
        s = session_new(path_tree(5))
        res = find_diameter_pair(s, 5)
        assert res.distance == 4 and set(res.pair) == {0, 4}
        assert res.queries_used == 6

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
    def test_exhaustive(self, n):
        for t in enumerate_trees(n):
            s = session_new(t)
            res = find_diameter_pair(s, n)
            assert t.distance(*res.pair) == res.distance == t.distances.max()
            assert res.queries_used <= diameter_query_ceiling(n)

    @pytest.mark.parametrize("n", [4, 6, 8])
    def test_inferred_distance_matches_shadow_query(self, n):
        b = tree_batch(n)
        for i in range(0, len(b), 7):
            res = find_diameter_pair(QuerySession(dist=b.dist[i]), n)
            u0, inferred = res.inferred
            v = int(np.argmax(b.dist[i][0]))
            assert b.dist[i][v, u0] == inferred

    def test_large_random(self, rng):
        for n in (50, 120):
            for _ in range(50):
                t = random_tree(n, rng)
                res = find_diameter_pair(session_new(t), n)
                assert res.distance == t.distances.max() and res.queries_used == 2 * n - 4

    def test_budget_propagates(self):
        with pytest.raises(BudgetExhausted):
            find_diameter_pair(session_new(path_tree(8), budget=5), 8)


class TestReconstruct:
    def test_star(self):
        s = session_new(star_tree(7))
        res = reconstruct_tree(s, 7)
        assert res.tree == star_tree(7) and res.queries_used == 6

    def test_path_counts(self):
        res = reconstruct_tree(session_new(path_tree(9)), 9)
        assert res.tree == path_tree(9) and res.queries_used == 8 + 7

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
    def test_exhaustive(self, n):
        for t in enumerate_trees(n):
            res = reconstruct_tree(session_new(t), n)
            assert res.tree == t and res.queries_used <= reconstruct_query_ceiling(n)

    def test_random(self, rng):
        for n in (15, 40, 100):
            for _ in range(20):
                t = random_tree(n, rng)
                res = reconstruct_tree(session_new(t), n)
                assert res.tree == t and res.queries_used <= reconstruct_query_ceiling(n)


class TestSpider:
    def test_probe_is_centre(self):
        t = spider_tree(7, center=0)
        res = identify_spider(session_new(t), 7)
        assert res.tree == t

    def test_even_n_with_leafless_middle(self):
        # n = 8: four middles, three leaves; the probe 0 is the leafless middle
        t = spider_tree(8, center=5, middles=[0, 1, 2, 3], leaves=[4, 6, 7])
        res = identify_spider(session_new(t), 8)
        assert res.tree == t

    @pytest.mark.parametrize("n", [7, 8, 9, 12, 17, 30])
    def test_random_spiders(self, n, rng):
        for _ in range(40):
            perm = rng.permutation(n).tolist()
            m = n // 2
            t = spider_tree(n, perm[0], perm[1 : m + 1], perm[m + 1 :])
            s = session_new(t)
            res = identify_spider(s, n)
            assert res.tree == t and res.queries_used <= spider_query_ceiling(n)
