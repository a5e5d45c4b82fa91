from __future__ import annotations

from itertools import product

import pytest
from sympy.combinatorics.prufer import Prufer

from raagtree.core.errors import BadLabel, NotATree, TooSmall
from raagtree.models.tree import PruferCode
from raagtree.services import tree_core
from raagtree.services.enumeration import enumerate_unrooted
from raagtree.services.tree_core import (
    boundary_profile,
    canonical_form,
    decode_edges,
    double_star,
    from_edges,
    in_vanishing_class,
    leq,
    leq_tree_characterization,
    parse_tree_text,
    path,
    prufer_decode,
    prufer_encode,
    sim,
    sim_tree_characterization,
    star,
)


def test_prufer_decode_matches_sympy_convention():
    for n in (3, 4, 5, 6):
        for code in product(range(1, n + 1), repeat=n - 2):
            ours = {tuple(sorted(e)) for e in decode_edges(n, code)}
            theirs = {tuple(sorted((u + 1, v + 1))) for u, v in Prufer.to_tree([c - 1 for c in code])}
            assert ours == theirs, f"code {code}"


def test_prufer_encode_matches_sympy():
    tree = from_edges(6, [(1, 4), (2, 4), (3, 4), (4, 5), (5, 6)])
    assert prufer_encode(tree).code == (4, 4, 4, 5)
    expected = Prufer.to_prufer([[u - 1, v - 1] for u, v in tree.edge_list()], 6)
    assert list(prufer_encode(tree).code) == [c + 1 for c in expected]
    assert prufer_decode(PruferCode(n=6, code=(4, 4, 4, 5))) == tree


def test_prufer_code_validation():
    with pytest.raises(BadLabel):
        PruferCode(n=5, code=(1, 2))
    with pytest.raises(BadLabel):
        PruferCode(n=4, code=(1, 5))


def test_from_edges_rejects_non_trees():
    with pytest.raises(NotATree):
        from_edges(4, [(1, 2), (2, 3), (1, 3)])
    with pytest.raises(NotATree):
        from_edges(3, [(1, 2), (2, 1)])
    with pytest.raises(NotATree):
        from_edges(3, [(1, 2)])
    with pytest.raises(NotATree):
        from_edges(3, [(1, 1), (2, 3)])
    with pytest.raises(BadLabel):
        from_edges(3, [(1, 2), (2, 4)])


def test_boundary_profile_of_path_seven():
    profile = boundary_profile(path(7))
    assert profile.distances == (0, 1, 2, 3, 2, 1, 0)
    assert profile.deep == (4,)
    assert profile.upsilon == 2
    assert not profile.shallow


def test_boundary_profile_of_star_and_small_trees():
    profile = boundary_profile(star(6))
    assert profile.deep == ()
    assert profile.shallow
    assert profile.upsilon == 0
    assert boundary_profile(path(2)).distances == (0, 0)
    with pytest.raises(TooSmall):
        boundary_profile(from_edges(1, []))


def test_upsilon_counts_second_generation_of_each_deep_node():
    # spider: centre 1 with three legs of length 3
    edges = [(1, 2), (2, 3), (3, 4), (1, 5), (5, 6), (6, 7), (1, 8), (8, 9), (9, 10)]
    spider = from_edges(10, edges)
    assert spider.deg(1) == 3
    assert [spider.deg(v) for v in (4, 7, 10)] == [1, 1, 1]
    profile = boundary_profile(spider)
    assert profile.deep == (1,)
    assert profile.upsilon == 3


def test_leq_and_sim_on_a_path():
    t = path(3)
    assert leq(t, 1, 3)
    assert sim(t, 1, 3)
    assert not leq(t, 2, 1)
    assert leq(t, 1, 2)
    assert tree_core.is_thin(t, 2)
    assert not tree_core.is_thin(t, 1)
    with pytest.raises(BadLabel):
        leq(t, 0, 1)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, pytest.param(8, marks=pytest.mark.slow)])
def test_leaf_criteria_agree_with_link_star_definition(n: int):
    for t in enumerate_unrooted(n):
        for v in t.nodes:
            for w in t.nodes:
                assert leq_tree_characterization(t, v, w) == t.leq(v, w), (t.edge_list(), v, w)
                assert sim_tree_characterization(t, v, w) == t.sim(v, w), (t.edge_list(), v, w)


def test_leaf_criteria_need_three_nodes():
    with pytest.raises(TooSmall):
        leq_tree_characterization(path(2), 1, 2)


def test_equivalence_classes_of_a_double_star():
    t = double_star(2)
    assert t.equivalence_classes == ((1,), (2,), (3, 4), (5, 6))


def test_canonical_form_is_a_complete_isomorphism_invariant():
    assert canonical_form(path(5)) == canonical_form(path(5).relabel({1: 3, 2: 5, 3: 1, 4: 2, 5: 4}))
    assert canonical_form(path(5)) != canonical_form(star(5))
    assert len({canonical_form(t) for t in enumerate_unrooted(6)}) == 6
    assert len({canonical_form(t) for t in enumerate_unrooted(7)}) == 11


def test_parse_tree_text_formats():
    edge_list = parse_tree_text("# comment\n4\n1 2\n\n2 3\n3 4\n")
    assert edge_list == path(4)
    assert parse_tree_text("prufer: 4 4 4 5") == from_edges(6, [(1, 4), (2, 4), (3, 4), (4, 5), (5, 6)])
    with pytest.raises(BadLabel):
        parse_tree_text("3\n1 x\n2 3\n")
    with pytest.raises(NotATree):
        parse_tree_text("# nothing\n")


def test_vanishing_class_membership():
    assert in_vanishing_class(star(4))
    assert in_vanishing_class(double_star(3))
    assert not in_vanishing_class(double_star(2))
    assert not in_vanishing_class(path(4))


def test_components_outside_star():
    t = path(7)
    assert t.components_outside_star(4) == ((1, 2), (6, 7))
    assert t.components_outside_star(1) == ((3, 4, 5, 6, 7),)
