import json
from itertools import combinations

import networkx as nx
import numpy as np
import pytest
from _oracles import forbidden_path_orders, long_distances_rigid, neighbor_audit_oracle, parity_rigid
from hypothesis import given
from hypothesis import strategies as st

from treeprobe.errors import DecodeError, DomainError
from treeprobe.nonadaptive import (
    QueryGraphSpec,
    build_min_degree_query_graph,
    build_reconstruction_query_graph,
    common_neighbor_audit,
    complete_missing_distances,
    decode_exact,
    decode_exact_batch,
    decode_isomorphism,
    find_max_distance_pair_nonadaptive,
    lemi_witness,
    min_degree_query_count,
    reconstruction_query_count,
)
from treeprobe.session import AnsweredQueryGraph
from treeprobe.trees import (
    LabeledTree,
    TreeShape,
    canonical_code,
    classify_shape,
    diameter,
    double_star,
    path_tree,
    prufer_decode,
    random_tree,
    spider_tree,
    star_tree,
    tree_batch,
)


class TestConstructors:
    @pytest.mark.parametrize("n,size", [(5, 8), (6, 12), (7, 18), (8, 24)])
    def test_reconstruction_sizes(self, n, size):
        spec = build_reconstruction_query_graph(n)
        assert spec.size == size == reconstruction_query_count(n)
        assert spec.size == -(-n * (n - 2) // 2)

    @pytest.mark.parametrize("n,size", [(13, 65), (14, 77), (20, 170)])
    def test_min_degree_sizes(self, n, size):
        spec = build_min_degree_query_graph(n)
        assert spec.size == size == min_degree_query_count(n)
        assert set(spec.degrees()) == {n - 3}

    def test_complement_is_hamiltonian_cycle(self):
        spec = build_min_degree_query_graph(15)
        g = nx.Graph(list(spec.missing))
        assert nx.is_connected(g) and all(d == 2 for _, d in g.degree) and g.number_of_nodes() == 15

    def test_domains(self):
        with pytest.raises(DomainError):
            build_reconstruction_query_graph(4)
        with pytest.raises(DomainError):
            build_min_degree_query_graph(12)
        with pytest.raises(DomainError):
            QueryGraphSpec(4, frozenset({(1, 1)}))
        with pytest.raises(DomainError):
            QueryGraphSpec(4, frozenset({(0, 4)}))

    def test_json_round_trip(self, tmp_path):
        spec = build_min_degree_query_graph(13)
        p = tmp_path / "q.json"
        p.write_text(json.dumps(spec.to_json()))
        assert QueryGraphSpec.from_json(str(p)) == spec
        assert QueryGraphSpec.from_json(json.dumps(spec.to_json())) == spec
        assert QueryGraphSpec.from_json(spec.to_json()) == spec


class TestDecodeExact:
    def test_star_missing_leaf_pair_is_non_edge(self):
        spec = build_reconstruction_query_graph(6)
        t = star_tree(6, center=5)
        assert decode_exact(spec, spec.answers_from(t)) == t

    def test_path_with_leaf_pair_missing(self):
        spec = QueryGraphSpec(5, frozenset({(0, 1)}))
        t = path_tree(5)
        assert decode_exact(spec, spec.answers_from(t)) == t

    def test_probe_pair_itself_missing(self):
        # (0,1) is settled through the neighbour pair (2,3), also unqueried
        t = LabeledTree(5, ((0, 2), (2, 3), (3, 1), (1, 4)))
        spec = build_reconstruction_query_graph(5)
        assert decode_exact(spec, spec.answers_from(t)) == t

    @pytest.mark.parametrize("n", [5, 6, 7])
    def test_exhaustive(self, n):
        spec = build_reconstruction_query_graph(n)
        b = tree_batch(n)
        adj, status = decode_exact_batch(spec, b.dist)
        assert not status.any()
        truth = b.dist == 1
        assert np.array_equal(adj, truth)

    @given(st.integers(9, 14), st.randoms(use_true_random=False))
    def test_random_trees(self, n, rnd):
        seq = [rnd.randrange(n) for _ in range(n - 2)]
        t = prufer_decode(seq, n)
        spec = build_reconstruction_query_graph(n)
        assert decode_exact(spec, spec.answers_from(t)) == t

    def test_any_matching_accepted(self, rng):
        n = 10
        for _ in range(20):
            perm = rng.permutation(n)
            k = int(rng.integers(1, n // 2 + 1))
            spec = QueryGraphSpec(n, frozenset((int(perm[2 * i]), int(perm[2 * i + 1])) for i in range(k)))
            t = random_tree(n, rng)
            assert decode_exact(spec, spec.answers_from(t)) == t

    def test_non_matching_rejected(self):
        spec = QueryGraphSpec(6, frozenset({(0, 1), (1, 2)}))
        with pytest.raises(DomainError):
            decode_exact(spec, spec.answers_from(path_tree(6)))

    def test_coverage_error(self):
        spec = build_reconstruction_query_graph(6)
        ans = spec.answers_from(path_tree(6))
        short = AnsweredQueryGraph(6, {p: d for p, d in ans.answers.items() if p != (0, 2)})
        with pytest.raises(DecodeError) as exc:
            decode_exact(spec, short)
        assert exc.value.rule == "coverage"

    def test_range_error(self):
        spec = build_reconstruction_query_graph(6)
        ans = dict(spec.answers_from(path_tree(6)).answers)
        ans[(0, 2)] = 9
        with pytest.raises(DecodeError) as exc:
            decode_exact(spec, AnsweredQueryGraph(6, ans))
        assert exc.value.rule == "range"

    def test_inconsistent_answers_name_a_rule(self, rng):
        spec = build_reconstruction_query_graph(8)
        rules = set()
        for _ in range(40):
            t = random_tree(8, rng)
            ans = dict(spec.answers_from(t).answers)
            p = list(ans)[int(rng.integers(len(ans)))]
            ans[p] = 1 if ans[p] > 1 else 2
            try:
                got = decode_exact(spec, AnsweredQueryGraph(8, ans))
            except DecodeError as exc:
                rules.add(exc.rule)
            else:
                pytest.fail(f"inconsistent answers decoded to {got}")
        assert rules <= {"spanning-tree", "metric", "probe-pair"}


def _completions(spec, t, cap=None):
    return complete_missing_distances(spec, spec.answers_from(t), max_solutions=cap)


class TestCompletion:
    def test_path_completions_are_paths(self):
        spec = build_min_degree_query_graph(13)
        cs = _completions(spec, path_tree(13))
        assert cs.exhaustive
        assert all(classify_shape(t) is TreeShape.PATH for t in cs.completions)

    def test_star_is_unique(self):
        spec = build_min_degree_query_graph(13)
        cs = _completions(spec, star_tree(13, center=4))
        assert cs.completions == [star_tree(13, center=4)]

    @pytest.mark.parametrize("n", [13, 14])
    def test_named_shapes_decode_to_their_class(self, n):
        spec = build_min_degree_query_graph(n)
        for t in (spider_tree(n), double_star(n, 3, 8, [0, 1, 2, 5])):
            assert decode_isomorphism(spec, spec.answers_from(t)) == canonical_code(t)

    def test_relabeled_copies_share_code(self, rng):
        spec = build_min_degree_query_graph(13)
        t = random_tree(13, rng)
        codes = {decode_isomorphism(spec, spec.answers_from(t.relabel(rng.permutation(13).tolist()))) for _ in range(5)}
        assert codes == {canonical_code(t)}

    def test_invariants_on_random_trees(self, rng):
        seen_multi = 0
        for n in (13, 14):
            spec = build_min_degree_query_graph(n)
            missing = sorted(spec.missing)
            for _ in range(60):
                t = random_tree(n, rng)
                cs = _completions(spec, t)
                assert t in cs.completions
                assert cs.shared_code == canonical_code(t)
                assert parity_rigid(cs.distances, missing)
                assert long_distances_rigid(cs.distances)
                assert forbidden_path_orders(cs.distances) == 0
                seen_multi += len(cs.completions) > 1
        assert seen_multi > 0

    def test_cap_marks_search_incomplete(self):
        spec = build_min_degree_query_graph(13)
        t = path_tree(13)
        full = _completions(spec, t)
        if len(full.completions) > 1:
            capped = _completions(spec, t, cap=1)
            assert not capped.exhaustive and len(capped.completions) == 1

    def test_inconsistent_input(self):
        spec = build_min_degree_query_graph(13)
        ans = dict(spec.answers_from(path_tree(13)).answers)
        # vertices 0 and 2 share common neighbours with both parities now
        ans[(0, 3)] = 2
        with pytest.raises(DecodeError) as exc:
            complete_missing_distances(spec, AnsweredQueryGraph(13, ans))
        assert exc.value.rule in {"parity", "bound-window", "four-point", "spanning-tree"}


class TestMaxPair:
    def test_path_endpoints(self):
        spec = build_min_degree_query_graph(13)
        x, y, d = find_max_distance_pair_nonadaptive(spec, spec.answers_from(path_tree(13)))
        assert {x, y} == {0, 12} and d == 12

    def test_star_two_leaves(self):
        spec = build_min_degree_query_graph(13)
        t = star_tree(13)
        x, y, d = find_max_distance_pair_nonadaptive(spec, spec.answers_from(t))
        assert d == 2 and 0 not in (x, y)

    def test_diameter_four_trees(self, rng):
        spec = build_min_degree_query_graph(13)
        hits = 0
        while hits < 10:
            t = random_tree(13, rng)
            if diameter(t) != 4:
                continue
            hits += 1
            x, y, d = find_max_distance_pair_nonadaptive(spec, spec.answers_from(t), max_solutions=None)
            cs = _completions(spec, t)
            assert d == 4 and all(c.distance(x, y) == diameter(c) for c in cs.completions)


def _claw_spec(n, v, partners):
    return QueryGraphSpec(n, frozenset((min(v, u), max(v, u)) for u in partners))


class TestWitness:
    def test_claw_at_vertex(self):
        spec = _claw_spec(13, 0, (1, 2, 3))
        t, t2 = lemi_witness(spec)
        mask = spec.queried_mask()
        assert np.array_equal(t.distances[mask], t2.distances[mask])
        assert (diameter(t), diameter(t2)) == (4, 3)
        assert t.distance(1, 0) == 4 and t2.distance(1, 0) == 2

    def test_explicit_vertex(self):
        spec = _claw_spec(14, 9, (2, 5, 11))
        t, t2 = lemi_witness(spec, v=9)
        assert t.distance(2, 9) == 4 and t2.distance(2, 9) == 2

    def test_preconditions(self):
        with pytest.raises(DomainError):
            lemi_witness(_claw_spec(12, 0, (1, 2, 3)))
        with pytest.raises(DomainError):
            lemi_witness(build_min_degree_query_graph(13))
        with pytest.raises(DomainError):
            lemi_witness(_claw_spec(13, 0, (1, 2, 3)), v=5)


class TestNeighborAudit:
    @pytest.mark.parametrize("n", [13, 14])
    def test_min_degree_passes(self, n):
        spec = build_min_degree_query_graph(n)
        assert common_neighbor_audit(spec) is True

    def test_complete_minus_five_cycle(self):
        spec = QueryGraphSpec(13, frozenset((i, (i + 1) % 5) if i < 4 else (0, 4) for i in range(5)))
        assert common_neighbor_audit(spec) is True
        assert neighbor_audit_oracle(spec.queried_mask())

    def test_low_degree_vertex_agrees_with_oracle(self, rng):
        for _ in range(5):
            partners = rng.choice(np.arange(1, 13), size=8, replace=False)
            spec = _claw_spec(13, 0, partners.tolist())
            assert spec.degrees()[0] == 13 - 9
            assert common_neighbor_audit(spec) == neighbor_audit_oracle(spec.queried_mask())

    def test_sparse_graph_fails(self):
        # a star query graph: four leaves share only the centre, but the centre with
        # three leaves has no common neighbour
        spec = QueryGraphSpec(13, frozenset((a, b) for a, b in combinations(range(1, 13), 2)))
        assert common_neighbor_audit(spec) is False
        assert not neighbor_audit_oracle(spec.queried_mask())
