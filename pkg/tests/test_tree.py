"""Tree data model, orderings, predicates, and transformations."""

import itertools

import pytest

from conftest import node_named
from discoparse.tree import (ConstituentSet, DuplicateIndex, EmptyCandidate,
                             Incomparable, InstantiatedConstituent,
                             MissingIndex, NoProjectiveAscendant, NotBinary,
                             NotComplete, RangeLabelledTree, ReservedLabel,
                             UnaryChainPresent, binarize, compare,
                             constituents_to_tree, debinarize, g_precedes,
                             gap_set, ind_precedes, max_subset_parent,
                             normalize_unaries, post_order,
                             projective_anchors, right_leq,
                             structural_report, tree_to_constituents,
                             validate_constituent_set)
from helpers import all_complete_sets, all_trees


def members(*pairs):
    return frozenset(InstantiatedConstituent(l, frozenset(s)) for l, s in pairs)


class TestConstruction:
    def test_duplicate_index(self):
        with pytest.raises(DuplicateIndex):
            RangeLabelledTree.build(("S", [1, 1]))

    def test_missing_index(self):
        with pytest.raises(MissingIndex):
            RangeLabelledTree.build(("S", [1, 3]))

    def test_reserved_labels(self):
        with pytest.raises(ReservedLabel):
            RangeLabelledTree.build(("S@X", [1]))
        with pytest.raises(ReservedLabel):
            RangeLabelledTree.build(("S*", [1]))

    def test_equality_is_isomorphism(self):
        t1 = RangeLabelledTree.build(("S", [("A", [1]), ("B", [2])]))
        t2 = RangeLabelledTree.build(("S", [("B", [2]), ("A", [1])]))
        assert t1 == t2
        assert hash(t1) == hash(t2)
        assert t1 != RangeLabelledTree.build(("S", [("B", [1]), ("A", [2])]))


class TestConstituentConversion:
    def test_fig323(self, fig323_tree):
        kset = tree_to_constituents(fig323_tree)
        assert kset.members == members(("A", {2, 3, 4}), ("B", {1, 5}),
                                       ("S", {1, 2, 3, 4, 5}))
        assert validate_constituent_set(kset).complete

    def test_single_preterminal(self):
        tree = RangeLabelledTree.build(("X", [1]))
        assert tree_to_constituents(tree).members == members(("X", {1}))

    def test_fig13_constituents(self, fig13_tree):
        kset = tree_to_constituents(fig13_tree)
        assert kset.members == members(("VP", {1, 3}), ("VP", {1, 3, 4}),
                                       ("S", {1, 2, 3, 4}))

    def test_unary_chain_rejected(self):
        tree = RangeLabelledTree.build(("X", [("Y", [1, 2])]))
        with pytest.raises(UnaryChainPresent):
            tree_to_constituents(tree)

    def test_back_conversion(self, fig323_tree):
        kset = ConstituentSet(members(("A", {2, 3, 4}), ("B", {1, 5}),
                                      ("S", {1, 2, 3, 4, 5})), 5)
        assert constituents_to_tree(kset) == fig323_tree

    def test_single_member(self):
        kset = ConstituentSet(members(("S", {1})), 1)
        tree = constituents_to_tree(kset)
        assert tree.label(tree.root) == "S" and tree.n == 1

    def test_not_complete(self):
        kset = ConstituentSet(members(("A", {1, 2}), ("B", {2, 3})), 3)
        with pytest.raises(NotComplete):
            constituents_to_tree(kset)

    def test_round_trip_exhaustive(self):
        for n in range(1, 5):
            for tree in all_trees(n):
                assert constituents_to_tree(tree_to_constituents(tree)) == tree

    def test_dominance_subset_duality(self):
        # v1 < v2 in the tree iff psi(v2) is a maximal subset of psi(v1)
        for tree in all_trees(4, labels=("A", "B")):
            kset = tree_to_constituents(tree)
            internal = tree.internal_nodes()
            for v1 in internal:
                for v2 in internal:
                    direct = v2 in tree.children(v1)
                    m2 = InstantiatedConstituent(tree.label(v2), tree.indices(v2))
                    parent = max_subset_parent(kset, m2.indices)
                    via_sets = (parent is not None
                                and parent.indices == tree.indices(v1)
                                and tree.indices(v2) < tree.indices(v1))
                    assert direct == via_sets or tree.indices(v1) == tree.indices(v2)


class TestSetValidation:
    def test_fig43_final(self):
        kset = ConstituentSet(members(("A", {2, 3, 4}), ("B", {1, 5}),
                                      ("S", {1, 2, 3, 4, 5})), 5)
        assert validate_constituent_set(kset) == (True, True, True, True)

    def test_overlap_inconsistent(self):
        kset = ConstituentSet(members(("A", {1, 2}), ("B", {2, 3})), 3)
        assert not validate_constituent_set(kset).consistent

    def test_max_subset_parent(self):
        kset = ConstituentSet(members(("A", {2, 3, 4}), ("B", {1, 5}),
                                      ("S", {1, 2, 3, 4, 5})), 5)
        parent = max_subset_parent(kset, {2, 3, 4})
        assert parent == InstantiatedConstituent("S", frozenset({1, 2, 3, 4, 5}))
        assert max_subset_parent(kset, {1, 2, 3, 4, 5}) is None

    def test_parent_uniqueness(self):
        # in any consistent set each member has at most one maximal superset
        for kset in all_complete_sets(4, labels=("A",)):
            sets = [m.indices for m in kset.members]
            for s in sets:
                strict = [t for t in sets if s < t]
                minimal = [t for t in strict
                           if not any(s < u < t for u in strict)]
                assert len(minimal) <= 1


class TestOrderings:
    def test_right_order(self):
        assert right_leq({2, 3}, {1, 2, 3})
        assert right_leq({1, 2}, {3})
        assert not right_leq({3}, {1, 2})
        with pytest.raises(Incomparable):
            right_leq({1, 3}, {2, 3})

    def test_ind(self, fig13_tree):
        vp13 = node_named(fig13_tree, "VP")
        leaf2 = node_named(fig13_tree, 2)
        assert ind_precedes(fig13_tree, vp13, leaf2)
        assert compare("ind", fig13_tree, vp13, leaf2)

    def test_g_fig316(self, fig316_tree):
        w5, w4 = node_named(fig316_tree, 5), node_named(fig316_tree, 4)
        assert g_precedes(fig316_tree, w5, w4)
        assert not g_precedes(fig316_tree, w4, w5)

    def test_g_dominance_incomparable(self, fig13_tree):
        root = fig13_tree.root
        with pytest.raises(Incomparable):
            g_precedes(fig13_tree, root, node_named(fig13_tree, 2))

    def test_right_partial_order_on_compatible_sets(self):
        for kset in all_complete_sets(4, labels=("A",)):
            sets = sorted((m.indices for m in kset.members),
                          key=lambda s: (max(s), len(s)))
            # reflexive, antisymmetric, transitive on this compatible family
            for s in sets:
                assert right_leq(s, s)
            for s1, s2 in itertools.combinations(sets, 2):
                assert right_leq(s1, s2) or right_leq(s2, s1)
                if right_leq(s1, s2) and right_leq(s2, s1):
                    assert s1 == s2
            for s1, s2, s3 in itertools.combinations(sets, 3):
                if right_leq(s1, s2) and right_leq(s2, s3):
                    assert right_leq(s1, s3)

    def test_g_is_dominance_compatible(self):
        # u < v and moving both to ancestors keeps the order (Def 3.28 shape)
        for tree in all_trees(4, labels=("A",)):
            nodes = list(tree.nodes())
            for u, v in itertools.permutations(nodes, 2):
                if tree.dominates(u, v) or tree.dominates(v, u):
                    continue
                if not g_precedes(tree, u, v):
                    continue
                for u2 in [u] + list(tree.ancestors(u)):
                    for v2 in [v] + list(tree.ancestors(v)):
                        if tree.dominates(u2, v2) or tree.dominates(v2, u2):
                            continue
                        assert g_precedes(tree, u2, v2)

    def test_reduction_preserves_g_order(self):
        # collapsing two sisters in a <_G-sorted tree-cut keeps it sorted
        for tree in all_trees(4, labels=("A",)):
            cut = sorted(tree.leaves(), key=tree.leaf_index)
            order = {v: k for k, v in enumerate(post_order_safe(tree))}
            cut.sort(key=order.get)
            while len(cut) > 1:
                reduced = False
                for k in range(len(cut) - 1):
                    p = tree.parent(cut[k])
                    if p == tree.parent(cut[k + 1]) and p is not None and \
                            set(tree.children(p)) <= set(cut[k:k + 2]):
                        cut[k:k + 2] = [p]
                        reduced = True
                        break
                if not reduced:
                    break
                for a, b in zip(cut, cut[1:]):
                    assert g_precedes(tree, a, b)


def post_order_safe(tree):
    """Post-order over possibly non-binary trees (test-local ordering)."""
    out = []

    def visit(v):
        for c in sorted(tree.children(v), key=tree.min_index):
            visit(c)
        out.append(v)

    visit(tree.root)
    return out


class TestPostOrder:
    def test_fig13_leaf_order(self, fig13_tree):
        seq = post_order(fig13_tree)
        leaves = [fig13_tree.leaf_index(v) for v in seq if fig13_tree.is_leaf(v)]
        assert leaves == [1, 3, 4, 2]

    def test_single_leaf(self):
        tree = RangeLabelledTree.build(("X", [1]))
        seq = post_order(tree)
        assert [tree.is_leaf(v) for v in seq] == [True, False]

    def test_projective_tree_surface_order(self):
        tree = RangeLabelledTree.build(("S", [("A", [1, 2]), ("B", [3, 4])]))
        leaves = [tree.leaf_index(v) for v in post_order(tree) if tree.is_leaf(v)]
        assert leaves == [1, 2, 3, 4]

    def test_not_binary(self, fig323_tree):
        with pytest.raises(NotBinary):
            post_order(fig323_tree)


class TestGapSet:
    def test_examples(self):
        assert gap_set({1, 3, 5}) == {2, 4}
        assert gap_set({1, 5}) == {2, 3, 4}
        assert gap_set({1, 2, 3}) == frozenset()

    def test_empty(self):
        with pytest.raises(EmptyCandidate):
            gap_set(frozenset())


class TestStructuralReport:
    def test_fig316_leaf_is_maximal(self, fig316_tree):
        report = structural_report(fig316_tree, node_named(fig316_tree, 3))
        assert report.maximal_fully_projective

    def test_fig316_gap_node(self, fig316_tree):
        report = structural_report(fig316_tree, node_named(fig316_tree, "A"))
        assert not report.projective

    def test_fig315_maximal_node(self, fig315_tree):
        report = structural_report(fig315_tree, node_named(fig315_tree, "A"))
        assert report == (True, True, True)
        assert structural_report(fig315_tree, node_named(fig315_tree, "B")) \
            == (False, False, False)
        # S is projective but dominates a non-projective node
        assert structural_report(fig315_tree, fig315_tree.root) \
            == (True, False, False)

    def test_implication_chain(self):
        for tree in all_trees(4, labels=("A",)):
            for v in tree.nodes():
                r = structural_report(tree, v)
                assert (not r.maximal_fully_projective or r.fully_projective)
                assert (not r.fully_projective or r.projective)


class TestProjectiveAnchors:
    def test_fig316_leaf3(self, fig316_tree):
        leaf3 = node_named(fig316_tree, 3)
        mpc, cpc = projective_anchors(fig316_tree, leaf3)
        assert mpc == leaf3
        assert fig316_tree.label(cpc) == "B"

    def test_unknown_node(self, fig13_tree):
        from discoparse.tree import UnknownNode
        with pytest.raises(UnknownNode):
            structural_report(fig13_tree, 999)
        with pytest.raises(UnknownNode):
            projective_anchors(fig13_tree, -1)

    def test_fig315_leaf_under_a(self, fig315_tree):
        leaf2 = node_named(fig315_tree, 2)
        mpc, _ = projective_anchors(fig315_tree, leaf2)
        assert fig315_tree.label(mpc) == "A"

    def test_root_has_no_cpc(self, fig13_tree):
        with pytest.raises(NoProjectiveAscendant):
            projective_anchors(fig13_tree, fig13_tree.root)


class TestTransformations:
    def test_collapse_simple_chain(self):
        tree = RangeLabelledTree.build(("X", [("Y", [1, 2])]))
        collapsed = normalize_unaries(tree, "collapse")
        assert collapsed.label(collapsed.root) == "X@Y"
        assert normalize_unaries(collapsed, "expand") == tree

    def test_unary_free_unchanged(self, fig323_tree):
        assert normalize_unaries(fig323_tree, "collapse") == fig323_tree

    def test_round_trips(self):
        specs = [("X", [("Y", [("Z", [1])])]),
                 ("S", [("A", [("B", [1, 3])]), 2]),
                 ("S", [("P", [1]), ("Q", [2])])]
        for spec in specs:
            tree = RangeLabelledTree.build(spec)
            assert normalize_unaries(normalize_unaries(tree, "collapse"),
                                     "expand") == tree

    def test_binarize_counts(self):
        tree = RangeLabelledTree.build(("S", [1, 2, 3, 4]))
        btree = binarize(tree)
        stars = [v for v in btree.internal_nodes()
                 if btree.label(v).endswith("*")]
        assert len(stars) == 2
        assert all(len(btree.children(v)) <= 2 for v in btree.internal_nodes())
        assert debinarize(btree) == tree

    def test_binary_tree_unchanged(self, fig13_tree):
        assert binarize(fig13_tree) == fig13_tree

    def test_binarize_round_trip_exhaustive(self):
        for tree in all_trees(4, labels=("A", "B")):
            assert debinarize(binarize(tree)) == tree

    def test_binarize_rejects_reserved(self):
        tree = binarize(RangeLabelledTree.build(("S", [1, 2, 3])))
        with pytest.raises(ReservedLabel):
            binarize(tree)
