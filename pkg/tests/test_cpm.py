from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from commevo.cpm import (
    Group,
    detect,
    detect_all,
    detect_bruteforce,
    enumerate_k_cliques,
    percolate,
    read_all_groups,
    read_groups,
    write_groups,
)
from commevo.temporal import FrameSnapshot


def clique_edges(nodes):
    return [(a, b) for a, b in combinations(nodes, 2)]


def snap(edges, index=0):
    return FrameSnapshot.from_edges(edges, index=index)


class TestEnumerate:
    def test_triangle(self):
        assert enumerate_k_cliques(snap(clique_edges([1, 2, 3])), 3) == [(1, 2, 3)]

    def test_k4_has_four_triangles(self):
        cliques = enumerate_k_cliques(snap(clique_edges([1, 2, 3, 4])), 3)
        assert sorted(cliques) == [(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)]

    def test_path_has_none(self):
        assert enumerate_k_cliques(snap([(1, 2), (2, 3)]), 3) == []

    def test_direction_is_ignored(self):
        # 1->2, 2->3, 3->1 is a triangle of the projection
        assert enumerate_k_cliques(snap([(1, 2), (2, 3), (3, 1)]), 3) == [(1, 2, 3)]

    def test_k_below_three(self):
        with pytest.raises(ValueError):
            enumerate_k_cliques(snap([(1, 2)]), 2)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(3, 12), p=st.floats(0.1, 0.9), k=st.integers(3, 5))
    def test_matches_subset_scan(self, seed, n, p, k):
        edges = oracles.random_digraph(np.random.default_rng(seed), n, p)
        got = enumerate_k_cliques(snap(list(edges)), k)
        assert sorted(got) == sorted(oracles.k_cliques(edges, k))
        assert len(set(got)) == len(got)


class TestPercolate:
    def test_k4s_sharing_a_triangle_join(self):
        cliques = [(1, 2, 3, 4), (2, 3, 4, 5)]
        assert percolate(cliques, 4) == [frozenset({1, 2, 3, 4, 5})]

    def test_k4s_sharing_an_edge_stay_apart(self):
        cliques = [(1, 2, 3, 4), (3, 4, 5, 6)]
        assert percolate(cliques, 4) == [frozenset({1, 2, 3, 4}), frozenset({3, 4, 5, 6})]

    def test_empty(self):
        assert percolate([], 4) == []

    def test_wrong_clique_size(self):
        with pytest.raises(ValueError):
            percolate([(1, 2, 3)], 4)


class TestDetect:
    def test_overlapping_communities_and_ordinals(self):
        # a K5 and a K4 sharing two nodes, plus a separate K4
        edges = clique_edges("abcde") + clique_edges("deFG") + clique_edges("wxyz")
        groups = detect(snap(edges, index=7), k=4)
        assert [g.members for g in groups] == [
            frozenset("abcde"),
            frozenset("FGde"),
            frozenset("wxyz"),
        ]
        assert [g.ordinal for g in groups] == [0, 1, 2]
        assert all(g.frame == 7 for g in groups)

    def test_equal_sizes_order_by_smallest_member(self):
        edges = clique_edges("pqr") + clique_edges("abc")
        assert [min(g.members) for g in detect(snap(edges), 3)] == ["a", "p"]

    def test_bruteforce_refuses_large_graphs(self):
        with pytest.raises(ValueError, match="refused"):
            detect_bruteforce(snap([(i, i + 1) for i in range(30)]), 3)

    def test_k_below_three(self):
        with pytest.raises(ValueError):
            detect(snap([(1, 2)]), 2)

    def test_empty_snapshot(self):
        assert detect(snap([]), 5) == []

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(3, 16), p=st.floats(0.2, 0.7), k=st.integers(3, 5))
    def test_same_family_as_bruteforce(self, seed, n, p, k):
        s = snap([(u, v, w) for (u, v), w in oracles.random_digraph(np.random.default_rng(seed), n, p).items()])
        fast = detect(s, k)
        assert [g.members for g in fast] == [g.members for g in detect_bruteforce(s, k)]
        for g in fast:
            assert g.n >= k and g.members <= s.nodes

    def test_larger_k_communities_nest(self):
        rng = np.random.default_rng(8)
        for _ in range(60):
            n = int(rng.integers(5, 20))
            s = snap(list(oracles.random_digraph(rng, n, float(rng.choice([0.2, 0.4, 0.6])))))
            for k in (3, 4):
                coarse = [g.members for g in detect(s, k)]
                for g in detect(s, k + 1):
                    assert any(g.members <= c for c in coarse)

    def test_detect_all_keeps_frame_order(self):
        frames = [snap(clique_edges("abc"), 0), snap([], 1), snap(clique_edges("xyz"), 2)]
        assert [len(g) for g in detect_all(frames, 3)] == [1, 0, 1]


def test_groups_file_roundtrip(tmp_path):
    groups = [Group(3, 0, frozenset({"b", "a", "c"})), Group(3, 1, frozenset({"x", "y", "z"}))]
    path = write_groups(groups, 3, tmp_path)
    assert path.name == "frame_00003.groups"
    assert path.read_text().splitlines()[0] == "0: a b c"
    assert read_groups(path, 3) == groups
    with pytest.raises(FileNotFoundError):
        read_all_groups(tmp_path, 2)
