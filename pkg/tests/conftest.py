import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from discoparse.grammar import Plcfrs, T, V, make_rule
from discoparse.tree import RangeLabelledTree


@pytest.fixture(scope="session")
def fig13_tree():
    """Daruber muss nachgedacht werden: VP{1,3} under VP{1,3,4} under S."""
    return RangeLabelledTree.build(("S", [("VP", [("VP", [1, 3]), 4]), 2]))


@pytest.fixture(scope="session")
def fig314_tree():
    """Minimal lazy-swap example: A{3,4} under B{1,3,4} under S{1..4}."""
    return RangeLabelledTree.build(("S", [("B", [1, ("A", [3, 4])]), 2]))


@pytest.fixture(scope="session")
def fig315_tree():
    """A{2,3} maximal fully projective; B{2,3,5} and S are not."""
    return RangeLabelledTree.build(("S", [1, ("B", [("A", [2, 3]), 5]), 4]))


@pytest.fixture(scope="session")
def fig316_tree():
    """No internal node fully projective: A{3,5}, B{3,4,5}, C{1,3,4,5}."""
    return RangeLabelledTree.build(
        ("S", [("C", [1, ("B", [("A", [3, 5]), 4])]), 2]))


@pytest.fixture(scope="session")
def fig323_tree():
    """The non-binary example tree: A{2,3,4} and B{1,5} under S."""
    return RangeLabelledTree.build(("S", [("A", [2, 3, 4]), ("B", [1, 5])]))


@pytest.fixture(scope="session")
def eq32_grammar():
    """The aaa grammar with rule probabilities 0.1/0.9/1/1."""
    return Plcfrs(
        {"S": 1, "A": 2, "B": 1},
        [make_rule("S", [(V("X"), V("Y"), V("Z"))],
                   [("A", ("X", "Y")), ("B", ("Z",))], 0.1),
         make_rule("S", [(V("X"), V("Y"), V("Z"))],
                   [("A", ("X", "Z")), ("B", ("Y",))], 0.9),
         make_rule("A", [(V("X"),), (V("Y"),)],
                   [("B", ("X",)), ("B", ("Y",))], 1.0),
         make_rule("B", [(T("a"),)], [], 1.0)],
        "S")


@pytest.fixture(scope="session")
def eq23_grammar():
    """The {w ccc w} grammar with fan-out 2 and mixed-terminal rules."""
    return Plcfrs(
        {"S": 1, "A": 2, "B": 2},
        [make_rule("S", [(V("U"), V("V"), V("W"), V("X"))],
                   [("A", ("U", "X")), ("B", ("V", "W"))]),
         make_rule("A", [(T("a"), V("U")), (T("a"), V("X"))],
                   [("A", ("U", "X"))]),
         make_rule("A", [(T("b"), V("U")), (T("b"), V("X"))],
                   [("A", ("U", "X"))]),
         make_rule("A", [(T("a"),), (T("a"),)], []),
         make_rule("A", [(T("b"),), (T("b"),)], []),
         make_rule("B", [(T("c"),), (T("c"), T("c"))], []),
         make_rule("B", [(T("c"), T("c")), (T("c"),)], [])],
        "S")


def node_named(tree, key):
    """Find a node by label (internal) or leaf index."""
    for v in tree.nodes():
        if tree.is_leaf(v):
            if tree.leaf_index(v) == key:
                return v
        elif tree.label(v) == key:
            return v
    raise KeyError(key)
