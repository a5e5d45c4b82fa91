from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from raagtree.core.errors import RaagTreeError, TooLarge, TooSmall
from raagtree.services import homology, raag_aut
from raagtree.services.storage import read_matrix_triplets
from raagtree.services.tree_core import double_star, from_edges, in_vanishing_class, path, star
from raagtree.services.verification import distinct_trees


def test_lattice_rank_and_torsion():
    lattice = homology.UnitPivotLattice(1)
    lattice.extend([{0: 2}])
    assert lattice.rank() == 1
    assert lattice.torsion() == [2]

    lattice = homology.UnitPivotLattice(2)
    lattice.extend([{0: 1, 1: 2}, {1: 2}])
    assert lattice.pivot_columns == [0]
    assert lattice.rank() == 2
    assert lattice.torsion() == [2]
    assert lattice.in_rational_span({1: 1})


def test_lattice_span_membership():
    lattice = homology.UnitPivotLattice(3)
    lattice.extend([{0: 1, 1: 1}, {1: 1, 2: 1}])
    assert lattice.rank() == 2
    assert lattice.free_columns == [2]
    assert lattice.torsion() == []
    assert lattice.in_rational_span({0: 1, 2: -1})
    assert not lattice.in_rational_span({2: 1})


def test_rational_rank_on_dependent_rows():
    rows = [{0: 2, 1: 4}, {0: 1, 1: 2}, {1: 3, 2: 1}]
    assert homology.rational_rank(rows) == 2
    assert homology.rational_rank([]) == 0


def test_build_presentation_budgets():
    with pytest.raises(TooSmall):
        homology.build_presentation(from_edges(1, []))
    with pytest.raises(TooLarge):
        homology.build_presentation(path(7), max_nodes=6)


@pytest.mark.parametrize("tree", [path(4), star(4)], ids=["path4", "star4"])
def test_pairwise_relator_verification(tree):
    presentation = homology.build_presentation(tree, max_nodes=4, verify=True, pairwise_limit=10**9)
    assert presentation.verified
    assert presentation.relators
    assert set(presentation.schema_counts) >= {"R1", "R2", "R3", "R9"}
    assert presentation.type2_count <= len(presentation.generators)


def test_lattice_rank_agrees_with_fraction_free_rank():
    presentation = homology.build_presentation(path(5), max_nodes=5)
    lattice = homology.lattice_for(presentation)
    assert lattice.rank() == homology.rational_rank(presentation.rows)
    result = homology.betti_one(path(5), presentation=presentation)
    assert result.b1 == len(presentation.generators) - result.rank
    assert result.rows == len(presentation.rows)


@pytest.mark.parametrize("tree", [path(2), star(4), star(5)], ids=["path2", "star4", "star5"])
def test_vanishing_class_has_no_free_abelianization(tree):
    assert in_vanishing_class(tree)
    assert homology.betti_one(tree, max_nodes=5).b1 == 0
    assert homology.check_vanishing_lemma(tree, max_nodes=5)


def test_vanishing_elements_on_star():
    cases = {case for case, _ in homology.vanishing_elements(star(4))}
    assert "transvection-shared-neighbour" in cases


def test_vanishing_elements_on_double_star():
    tree = double_star(2)
    cases = {case for case, _ in homology.vanishing_elements(tree)}
    assert "transvection-adjacent-leaf" in cases
    assert "transvection-shared-neighbour" not in cases
    assert "partial-conjugation-leaf" in cases
    report = homology.vanishing_report(tree)
    assert report.items
    assert report.holds


def test_theorem_a_holds_without_deep_nodes():
    for n in range(2, 6):
        for tree in distinct_trees(n):
            report = homology.theorem_a_report(tree, max_nodes=5)
            assert report.upsilon == 0
            assert report.omega_size == 0
            assert report.holds


def test_write_matrix_uses_sparse_triplets(tmp_path: Path):
    presentation = homology.build_presentation(path(4), max_nodes=4)
    target = homology.write_matrix(presentation, tmp_path / "relations.txt")
    rows, ncols = read_matrix_triplets(target)
    assert ncols == len(presentation.generators)
    assert rows == presentation.rows
    assert target.read_text(encoding="utf-8").splitlines()[0] == f"{len(presentation.rows)} {ncols}"


def test_unverified_presentation_refuses_betti():
    presentation = homology.build_presentation(path(3), max_nodes=3)
    presentation.failures.append({"schema": "R1"})
    with pytest.raises(RaagTreeError, match="failed the automorphism check"):
        homology.betti_one(path(3), presentation=presentation)


def test_omega_generators_conjugate_by_the_deep_node():
    tree = path(7)
    generators = homology.omega_generators(tree)
    assert [raag_aut.to_json(aut)["a"] for aut in generators] == ["+4", "+4"]


def test_theorem_a_on_seven_node_path():
    tree = path(7)
    assert all(gen.element.images[4] == 4 for gen in raag_aut.sym1_generators(tree))
    report = homology.theorem_a_report(tree, max_nodes=7)
    assert report.upsilon == 2
    assert report.omega_size == 2
    assert report.omega_rank == 2
    assert report.phi_kills_relators
    assert report.b1 >= report.upsilon
    assert report.holds


def test_abelianized_matrix_dense_view():
    presentation = homology.build_presentation(path(3), max_nodes=3)
    matrix = presentation.matrix
    assert matrix.ncols == len(presentation.generators)
    assert matrix.nrows == len(presentation.rows)
    dense = matrix.dense()
    for row, sparse in zip(dense, presentation.rows):
        assert {c: v for c, v in enumerate(row) if v} == sparse


def test_betti_number_is_invariant_under_relabeling():
    tree = from_edges(5, [(1, 2), (2, 3), (2, 4), (4, 5)])
    expected = homology.betti_one(tree, max_nodes=5).b1
    rng = np.random.default_rng(11)
    for _ in range(5):
        permutation = (0, *(int(x) + 1 for x in rng.permutation(5)))
        assert homology.betti_one(tree.relabel(permutation), max_nodes=5).b1 == expected


def test_check_theorem_a_on_small_trees():
    assert homology.check_theorem_A(path(4), max_nodes=4)
    assert homology.check_theorem_A(star(5), max_nodes=5)
