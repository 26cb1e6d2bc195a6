import json

import pytest

from treeprobe.errors import BudgetExhausted, DomainError
from treeprobe.session import AnsweredQueryGraph, QuerySession, check_consistency, session_new
from treeprobe.trees import enumerate_trees, path_tree, random_tree, star_tree


def test_new_session_is_empty():
    s = session_new(path_tree(3))
    assert s.count == 0 and len(s.transcript) == 0
    assert check_consistency(s.transcript)[0]


def test_zero_budget():
    s = session_new(star_tree(5), budget=0)
    with pytest.raises(BudgetExhausted):
        s.ask(1, 2)


def test_answers_and_caching():
    s = session_new(path_tree(4))
    assert s.ask(0, 3) == 3
    assert s.ask(3, 0) == 3
    assert s.count == 1
    assert session_new(star_tree(5)).ask(1, 2) == 2


def test_bad_pairs():
    s = session_new(path_tree(4))
    with pytest.raises(DomainError):
        s.ask(2, 2)
    with pytest.raises(DomainError):
        s.ask(0, 9)


def test_budget_never_exceeded(rng):
    t = random_tree(12, rng)
    s = session_new(t, budget=5)
    asked = 0
    with pytest.raises(BudgetExhausted):
        for a in range(12):
            for b in range(a + 1, 12):
                s.ask(a, b)
                asked += 1
    assert s.count == asked == 5
    # cached pairs remain available after the budget is gone
    assert s.ask(0, 1) == t.distance(0, 1)


def test_answers_match_metric(rng):
    for _ in range(100):
        t = random_tree(20, rng)
        s = session_new(t)
        d = t.distances
        for a, b in rng.integers(0, 20, size=(15, 2)):
            if a != b:
                assert s.ask(int(a), int(b)) == d[a, b]


def test_consistency_examples():
    ok, w = check_consistency(AnsweredQueryGraph(3, {(0, 1): 1, (1, 2): 1, (0, 2): 2}))
    assert ok and w == path_tree(3)
    assert not check_consistency(AnsweredQueryGraph(3, {(0, 1): 1, (1, 2): 1, (0, 2): 3}))[0]
    # a triangle of 1s is no tree
    assert not check_consistency(AnsweredQueryGraph(3, {(0, 1): 1, (1, 2): 1, (0, 2): 1}))[0]


def test_transcripts_of_every_n5_tree_are_consistent(rng):
    pairs = [(a, b) for a in range(5) for b in range(a + 1, 5)]
    for t in enumerate_trees(5):
        chosen = rng.choice(len(pairs), size=4, replace=False)
        s = session_new(t)
        for k in chosen:
            s.ask(*pairs[k])
        ok, w = check_consistency(s.transcript)
        assert ok and s.transcript.matches(w)


def test_conflicting_answer_rejected():
    aqg = AnsweredQueryGraph(4)
    aqg.add(0, 1, 2)
    aqg.add(1, 0, 2)
    with pytest.raises(ValueError):
        aqg.add(0, 1, 3)


def test_transcript_json_round_trip(tmp_path):
    s = session_new(path_tree(6))
    for b in range(1, 6):
        s.ask(0, b)
    p = tmp_path / "answers.json"
    p.write_text(json.dumps(s.transcript.to_json()))
    back = AnsweredQueryGraph.from_json(str(p))
    assert back.answers == s.transcript.answers


def test_session_from_distance_matrix():
    t = star_tree(6, center=3)
    s = QuerySession(dist=t.distances)
    assert s.ask(0, 1) == 2
    assert s.hidden == t


def test_consistency_at_n9_uses_chunked_scan():
    aqg = AnsweredQueryGraph(9, {(0, 8): 8, (0, 4): 4})
    ok, w = check_consistency(aqg, cap=9)
    assert ok and w.distance(0, 8) == 8 and w.distance(0, 4) == 4
    assert max(w.degrees) == 2
    assert not check_consistency(AnsweredQueryGraph(9, {(0, 8): 8, (0, 4): 4, (4, 8): 3}), cap=9)[0]
