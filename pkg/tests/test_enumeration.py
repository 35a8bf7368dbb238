import io

import networkx as nx
import numpy as np
import pytest

from dyadic import enumeration as en
from dyadic.errors import SizeGuardError
from dyadic.tiling import VERTICAL, canonical_decode, strips

from _oracles import brute_tilings


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_enumeration_matches_exact_cover(k):
    idx = en.enumerate_tilings(k)
    assert {t.rects for t in idx} == set(brute_tilings(k))


@pytest.mark.slow
def test_enumeration_matches_exact_cover_k4():
    assert {t.rects for t in en.enumerate_tilings(4)} == set(brute_tilings(4))


def test_index_is_sorted_and_lookup_works():
    idx = en.enumerate_tilings(3)
    enc = [t.encode() for t in idx]
    assert enc == sorted(enc) and len(set(enc)) == 82
    for i in (0, 17, 81):
        assert idx.lookup(idx[i]) == i and idx.find(enc[i]) == i


def test_join_tables():
    idx = en.enumerate_tilings(3)
    prev = en.enumerate_tilings(2)
    from dyadic.tiling import join

    for a in range(7):
        for b in range(7):
            assert idx[idx.vjoin[a, b]] == join(prev[a], prev[b], "V")
            assert idx[idx.hjoin[a, b]] == join(prev[a], prev[b], "H")


def test_stream_count():
    assert [en.stream_count(k) for k in range(6)] == [1, 2, 7, 82, 11047, 2 * 11047**2 - 82**4]
    with pytest.raises(SizeGuardError):
        en.stream_count(6)


def test_materialisation_guard():
    with pytest.raises(SizeGuardError):
        en.enumerate_tilings(5)


def test_subset_scan():
    for k in (2, 3, 4):
        a1, a2 = len(en.enumerate_tilings(k - 1)), len(en.enumerate_tilings(k - 2))
        assert en.scan_subset_counts(k) == (a1 * a1, a1 * a1, a2**4)


def test_neighbors_multiplicity():
    # every flip is reachable from both rectangles sharing the edge
    for t in en.enumerate_tilings(3):
        for u, m in en.neighbors(t):
            assert m == 2 and u != t


def test_flip_graph_against_networkx():
    for k in (1, 2, 3):
        g = en.flip_graph(k)
        G = nx.Graph()
        G.add_nodes_from(range(g.num_vertices))
        G.add_edges_from((i, j) for i, j, _ in g.edges())
        assert g.num_edges == G.number_of_edges()
        assert g.is_connected() and nx.is_connected(G)
        assert en.diameter(g) == nx.diameter(G)
        assert all(g.degree(i) == G.degree(i) for i in G)


def test_edge_move_table_consistent():
    idx = en.enumerate_tilings(2)
    table = en.edge_move_table(2)
    assert table.shape == (7, 16)
    from dyadic.chains import apply_edge_draw

    for i, t in enumerate(idx):
        for u in range(16):
            assert idx[table[i, u]] == apply_edge_draw(t, u)


def test_boundary_sets():
    for k, size in ((2, 2), (3, 16)):
        members = en.boundary_set(k)
        assert len(members) == size
        for t in members:
            assert not t.has_vertical_bisector()
            assert len(en.pivotal_flip(t)) == 1


def test_boundary_guard():
    with pytest.raises(SizeGuardError):
        en.boundary_indices(1)


def test_upsilon():
    for k in (2, 3, 4):
        fam = en.upsilon_set(k)
        assert len(set(fam)) == len(fam)
        assert all(t.has_vertical_bisector() and t.has_horizontal_bisector() for t in fam)
    assert [len(en.upsilon_set(k)) for k in (2, 3, 4)] == [1, 4, 196]


def test_dump_and_edge_list():
    buf = io.StringIO()
    en.enumerate_tilings(2).dump(buf)
    assert buf.getvalue().splitlines()[-1] == "V(V(.,.),V(.,.))"
    buf = io.StringIO()
    en.flip_graph(1).write_edge_list(buf)
    assert buf.getvalue().split() == ["0", "1", "2"]


def test_flags_and_halves():
    idx = en.enumerate_tilings(2)
    i = idx.find("V(H(.,.),V(.,.))")
    assert en.flag_names(int(idx.flags[i])) == ["LEFT", "TOP", "BOTTOM"]
    halves = idx.halves
    assert (halves[VERTICAL][i] >= 0).all()
    assert (halves["H"][idx.lookup(strips(2, VERTICAL))] < 0).all()
    assert idx.vertical.sum() == 4 and idx.horizontal.sum() == 4
    assert canonical_decode("V(.,.)") in list(en.enumerate_tilings(1))
