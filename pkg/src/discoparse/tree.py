"""Discontinuous tree data model.

A discontinuous constituent tree is an unordered labelled tree whose leaves
carry one-token ranges; only the leaves are ordered, via their positions in
the sentence.  This module provides the tree type itself, the equivalent
set-of-constituents view, the orderings and structural predicates that the
transition systems and oracles are built on, and the reversible tree
transformations (unary collapsing, binarization).

Indices are 1-based throughout.  A leaf for token i internally carries the
range <i-1, i> and is exposed as the index i.  The characters ``@`` (unary
chain separator) and ``*`` (binarization marker) are reserved in labels.
"""

from collections import Counter
from typing import Iterable, NamedTuple, Optional, Union

UNARY_JOINER = "@"
BINARIZE_MARKER = "*"


class TreeError(Exception):
    """Base class for tree and constituent-set errors."""


class DuplicateIndex(TreeError):
    pass


class MissingIndex(TreeError):
    pass


class ReservedLabel(TreeError):
    pass


class UnknownNode(TreeError):
    pass


class NotBinary(TreeError):
    pass


class Incomparable(TreeError):
    pass


class UnaryChainPresent(TreeError):
    pass


class NotComplete(TreeError):
    pass


class EmptyCandidate(TreeError):
    pass


class NoProjectiveAscendant(TreeError):
    pass


class Range(NamedTuple):
    """Half-open pair of string positions; empty iff lo == hi."""

    lo: int
    hi: int

    def __str__(self):
        return "<%d,%d>" % (self.lo, self.hi)


# A constituent candidate is a plain set of 1-based token indices.
ConstituentCandidate = frozenset


class InstantiatedConstituent(NamedTuple):
    """A labelled index set."""

    label: str
    indices: frozenset

    def __str__(self):
        return "<%s,{%s}>" % (self.label, ",".join(map(str, sorted(self.indices))))


class StructuralReport(NamedTuple):
    projective: bool
    fully_projective: bool
    maximal_fully_projective: bool


class SetReport(NamedTuple):
    consistent: bool
    rooted: bool
    spanning: bool
    complete: bool


# Tree specs for RangeLabelledTree.build(): an int is a leaf (token index),
# a (label, children) pair is an internal node.
TreeSpec = Union[int, tuple]


def check_label(label):
    """Reject labels using reserved characters or whitespace/parens."""
    if not label:
        raise ReservedLabel("empty label")
    if UNARY_JOINER in label or BINARIZE_MARKER in label:
        raise ReservedLabel("label %r uses a reserved character" % label)
    if any(ch in label for ch in " \t()"):
        raise ReservedLabel("label %r contains whitespace or parentheses" % label)
    return label


class RangeLabelledTree:
    """Unordered labelled tree over 1-length leaf ranges.

    Nodes are identified by stable integer ids assigned in construction
    (depth-first) order.  Instances are immutable; all derived data (index
    sets, parents) is computed once at construction.
    """

    __slots__ = ("n", "root", "tokens", "_label", "_leaf", "_children",
                 "_parent", "_indices", "_canon")

    def __init__(self, labels, leaves, children, root, n, tokens=None):
        self._label = tuple(labels)
        self._leaf = tuple(leaves)
        self._children = tuple(tuple(c) for c in children)
        self._parent = self._compute_parents()
        self.root = root
        self.n = n
        if tokens is not None:
            tokens = tuple(tokens)
            if len(tokens) != n:
                raise TreeError("expected %d tokens, got %d" % (n, len(tokens)))
        self.tokens = tokens
        self._indices = self._compute_indices()
        self._canon = None
        self._check()

    # -- construction -----------------------------------------------------

    @classmethod
    def build(cls, spec: TreeSpec, tokens=None,
              check_labels: bool = True) -> "RangeLabelledTree":
        """Build a tree from a nested spec.

        Leaves are given as 1-based token indices, internal nodes as
        ``(label, [child, ...])``.  The leaf indices must cover 1..n exactly
        once.  The root must be an internal node.  `tokens`, when given, is
        the surface string (one token per index).
        """
        labels, leaves, children = [], [], []

        def walk(node):
            vid = len(labels)
            labels.append(None)
            leaves.append(None)
            children.append(())
            if isinstance(node, int):
                leaves[vid] = node
            else:
                label, kids = node
                if check_labels:
                    check_label(label)
                if not kids:
                    raise TreeError("internal node %r has no children" % label)
                labels[vid] = label
                children[vid] = tuple(walk(kid) for kid in kids)
            return vid

        if isinstance(spec, int):
            raise TreeError("the root must be an internal node")
        walk(spec)
        idx = [i for i in leaves if i is not None]
        dupes = [i for i, c in Counter(idx).items() if c > 1]
        if dupes:
            raise DuplicateIndex("duplicate leaf indices: %s" % sorted(dupes))
        n = max(idx)
        missing = set(range(1, n + 1)) - set(idx)
        if missing or min(idx) < 1:
            raise MissingIndex("leaf indices do not cover 1..%d: missing %s"
                               % (n, sorted(missing)))
        return cls(labels, leaves, children, 0, n, tokens=tokens)

    def with_tokens(self, tokens) -> "RangeLabelledTree":
        """Copy of this tree carrying the given surface tokens."""
        return RangeLabelledTree(self._label, self._leaf, self._children,
                                 self.root, self.n, tokens=tokens)

    def token_at(self, i: int) -> str:
        if self.tokens is None:
            raise TreeError("tree carries no tokens")
        return self.tokens[i - 1]

    def _compute_parents(self):
        parent = [None] * len(self._label)
        for v, kids in enumerate(self._children):
            for c in kids:
                parent[c] = v
        return tuple(parent)

    def _compute_indices(self):
        indices = [None] * len(self._label)
        for v in reversed(range(len(self._label))):  # ids are in DFS preorder
            if self._leaf[v] is not None:
                indices[v] = frozenset((self._leaf[v],))
            else:
                acc = frozenset()
                for c in self._children[v]:
                    acc |= indices[c]
                indices[v] = acc
        return tuple(indices)

    def _check(self):
        for v in self.nodes():
            if self._leaf[v] is None and not self._children[v]:
                raise TreeError("internal node without children")

    # -- basic accessors ---------------------------------------------------

    def nodes(self):
        return range(len(self._label))

    def is_leaf(self, v) -> bool:
        return self._leaf[v] is not None

    def internal_nodes(self):
        return [v for v in self.nodes() if not self.is_leaf(v)]

    def leaves(self):
        return [v for v in self.nodes() if self.is_leaf(v)]

    def label(self, v) -> Optional[str]:
        self._require(v)
        return self._label[v]

    def leaf_index(self, v) -> int:
        self._require(v)
        if self._leaf[v] is None:
            raise TreeError("node %d is not a leaf" % v)
        return self._leaf[v]

    def leaf_range(self, v) -> Range:
        i = self.leaf_index(v)
        return Range(i - 1, i)

    def children(self, v):
        self._require(v)
        return self._children[v]

    def parent(self, v) -> Optional[int]:
        self._require(v)
        return self._parent[v]

    def indices(self, v) -> frozenset:
        """Set of token indices dominated by v."""
        self._require(v)
        return self._indices[v]

    def min_index(self, v) -> int:
        return min(self._indices[v])

    def ancestors(self, v):
        """Strict ascendants of v, closest first."""
        v = self._parent[v]
        while v is not None:
            yield v
            v = self._parent[v]

    def dominates(self, u, v) -> bool:
        """Reflexive dominance."""
        while v is not None:
            if v == u:
                return True
            v = self._parent[v]
        return False

    def is_preterminal(self, v) -> bool:
        kids = self._children[v]
        return len(kids) == 1 and self.is_leaf(kids[0])

    def _require(self, v):
        if not isinstance(v, int) or not 0 <= v < len(self._label):
            raise UnknownNode("no node %r in tree" % (v,))

    # -- equality: label- and index-set-preserving isomorphism -------------

    def canonical(self):
        if self._canon is None:
            def canon(v):
                if self.is_leaf(v):
                    return self._leaf[v]
                kids = sorted((canon(c) for c in self._children[v]),
                              key=_spec_sort_key)
                return (self._label[v], tuple(kids))
            self._canon = canon(self.root)
        return self._canon

    def __eq__(self, other):
        """Label- and index-set-preserving isomorphism (plus tokens)."""
        if not isinstance(other, RangeLabelledTree):
            return NotImplemented
        return (self.canonical() == other.canonical()
                and self.tokens == other.tokens)

    def __hash__(self):
        return hash((self.canonical(), self.tokens))

    def __repr__(self):
        return "RangeLabelledTree(%s)" % (self.canonical(),)


def _spec_sort_key(spec):
    return _spec_min_index(spec)


def _spec_min_index(spec):
    if isinstance(spec, int):
        return spec
    return min(_spec_min_index(kid) for kid in spec[1])


# -- constituent sets ------------------------------------------------------


class ConstituentSet:
    """Set of labelled index sets; the set view of an unordered tree."""

    __slots__ = ("members", "n")

    def __init__(self, members: Iterable[InstantiatedConstituent], n: int):
        self.members = frozenset(
            InstantiatedConstituent(label, frozenset(indices))
            for label, indices in members)
        self.n = n

    def index_sets(self):
        return frozenset(m.indices for m in self.members)

    def label_of(self, indices) -> Optional[str]:
        indices = frozenset(indices)
        for m in self.members:
            if m.indices == indices:
                return m.label
        return None

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, item):
        return item in self.members

    def __eq__(self, other):
        if not isinstance(other, ConstituentSet):
            return NotImplemented
        return self.members == other.members and self.n == other.n

    def __hash__(self):
        return hash((self.members, self.n))

    def __repr__(self):
        items = ", ".join(str(m) for m in sorted(
            self.members, key=lambda m: (min(m.indices), -len(m.indices), m.label)))
        return "ConstituentSet({%s}, n=%d)" % (items, self.n)


def compatible(s1: frozenset, s2: frozenset) -> bool:
    """Two index sets are compatible iff nested (strictly) or disjoint."""
    return s1 < s2 or s2 < s1 or not (s1 & s2)


def validate_constituent_set(kset: ConstituentSet) -> SetReport:
    """Report consistency, rootedness and coverage of a constituent set."""
    sets = [m.indices for m in kset.members]
    consistent = all(compatible(s1, s2)
                     for i, s1 in enumerate(sets) for s2 in sets[i + 1:])
    full = frozenset(range(1, kset.n + 1))
    rooted = any(all(s < r for s in sets if s != r) for r in sets)
    covered = frozenset().union(*sets) if sets else frozenset()
    spanning = covered == full and kset.n >= 1
    return SetReport(consistent, rooted, spanning,
                     consistent and rooted and spanning)


def max_subset_parent(kset: ConstituentSet, indices) -> Optional[InstantiatedConstituent]:
    """The unique minimal member strictly containing `indices`, if any.

    Uniqueness holds for consistent sets; for inconsistent input the
    smallest superset (ties broken by label) is returned.
    """
    indices = frozenset(indices)
    supersets = [m for m in kset.members if indices < m.indices]
    if not supersets:
        return None
    return min(supersets, key=lambda m: (len(m.indices), m.label,
                                         tuple(sorted(m.indices))))


def tree_to_constituents(tree: RangeLabelledTree) -> ConstituentSet:
    """One member per internal node; requires a unary-free tree.

    Two internal nodes dominating the same index set cannot be told apart in
    the set view, so unary chains must be collapsed first.
    """
    members = []
    seen = {}
    for v in tree.internal_nodes():
        ind = tree.indices(v)
        if ind in seen:
            raise UnaryChainPresent(
                "nodes %r and %r dominate the same indices %s"
                % (tree.label(seen[ind]), tree.label(v), sorted(ind)))
        seen[ind] = v
        members.append(InstantiatedConstituent(tree.label(v), ind))
    return ConstituentSet(members, tree.n)


def constituents_to_tree(kset: ConstituentSet, tokens=None) -> RangeLabelledTree:
    """Rebuild the unique unary-free tree encoded by a complete set."""
    report = validate_constituent_set(kset)
    if not report.complete:
        raise NotComplete("constituent set is not complete: %s" % (report,))
    members = sorted(kset.members,
                     key=lambda m: (min(m.indices), -len(m.indices)))

    def parent_of(m):
        best = None
        for cand in members:
            if m.indices < cand.indices:
                if best is None or cand.indices < best.indices:
                    best = cand
        return best

    kids = {m: [] for m in members}
    root = None
    for m in members:
        p = parent_of(m)
        if p is None:
            root = m
        else:
            kids[p].append(m)
    # attach each token under the smallest member containing it
    for i in range(1, kset.n + 1):
        best = None
        for m in members:
            if i in m.indices and (best is None or m.indices < best.indices):
                best = m
        kids[best].append(i)

    def spec(m):
        out = [kid if isinstance(kid, int) else spec(kid) for kid in kids[m]]
        out.sort(key=_spec_sort_key)
        return (m.label, out)

    return RangeLabelledTree.build(spec(root), tokens=tokens,
                                   check_labels=False)


# -- orderings --------------------------------------------------------------


def ind_precedes(tree: RangeLabelledTree, u: int, v: int) -> bool:
    """Leftmost index ordering: strict total order on any tree-cut."""
    return tree.min_index(u) < tree.min_index(v)


def right_leq(s1, s2) -> bool:
    """Rightmost index ordering on index sets (max, then subset)."""
    s1, s2 = frozenset(s1), frozenset(s2)
    if max(s1) < max(s2):
        return True
    if max(s2) < max(s1):
        return False
    if s1 <= s2:
        return True
    if s2 <= s1:
        return False
    raise Incomparable("sets %s and %s have equal max and no subset relation"
                       % (sorted(s1), sorted(s2)))


def g_precedes(tree: RangeLabelledTree, u: int, v: int) -> bool:
    """Projective ordering: sister-ancestor comparison rooted in min-index.

    Defined for nodes neither of which dominates the other: the children of
    their lowest common ancestor on the two paths are compared by leftmost
    index.
    """
    tree._require(u)
    tree._require(v)
    if tree.dominates(u, v) or tree.dominates(v, u):
        raise Incomparable("nodes %d and %d stand in dominance" % (u, v))
    up = [u] + list(tree.ancestors(u))
    on_u_path = {node: i for i, node in enumerate(up)}
    prev = v
    for anc in tree.ancestors(v):
        if anc in on_u_path:
            sister_u = up[on_u_path[anc] - 1]
            sister_v = prev
            return ind_precedes(tree, sister_u, sister_v)
        prev = anc
    raise Incomparable("nodes %d and %d share no ancestor" % (u, v))


def compare(kind: str, *args):
    """Dispatching front-end for the three orderings.

    ``compare('ind', tree, u, v)`` and ``compare('G', tree, u, v)`` test
    whether u precedes v; ``compare('right', s1, s2)`` tests s1 <=_right s2.
    """
    if kind == "ind":
        return ind_precedes(*args)
    if kind == "right":
        return right_leq(*args)
    if kind == "G":
        return g_precedes(*args)
    raise ValueError("unknown ordering kind %r" % kind)


def post_order(tree: RangeLabelledTree, root: Optional[int] = None):
    """Post-order traversal visiting the min-index child subtree first.

    The induced leaf order is the projective ordering of the sentence.
    Requires a binary tree (at most two children per node).
    """
    if root is None:
        root = tree.root
    out = []

    def visit(v):
        kids = tree.children(v)
        if len(kids) > 2:
            raise NotBinary("node %r has %d children" % (tree.label(v), len(kids)))
        for c in sorted(kids, key=tree.min_index):
            visit(c)
        out.append(v)

    visit(root)
    return out


# -- structural predicates ---------------------------------------------------


def gap_set(s) -> frozenset:
    """Indices missing from s strictly between min(s) and max(s)."""
    s = frozenset(s)
    if not s:
        raise EmptyCandidate("gap set of the empty candidate is undefined")
    return frozenset(i for i in range(min(s) + 1, max(s)) if i not in s)


def is_projective(tree: RangeLabelledTree, v: int) -> bool:
    ind = tree.indices(v)
    return len(ind) == max(ind) - min(ind) + 1


def _fully_projective(tree):
    """Per-node flag: projective with all descendants projective."""
    fully = [False] * len(tree._label)
    for v in reversed(range(len(tree._label))):
        if tree.is_leaf(v):
            fully[v] = True
        else:
            fully[v] = (is_projective(tree, v)
                        and all(fully[c] for c in tree.children(v)))
    return fully


def structural_report(tree: RangeLabelledTree, v: int) -> StructuralReport:
    """Projectivity flags for one node (maximal => fully => projective)."""
    tree._require(v)
    fully = _fully_projective(tree)
    p = tree.parent(v)
    maximal = fully[v] and (p is None or not fully[p])
    return StructuralReport(tree.is_leaf(v) or is_projective(tree, v),
                            fully[v], maximal)


def projective_anchors(tree: RangeLabelledTree, v: int):
    """Closest maximal-fully-projective and closest projective ascendants.

    The MPC falls back to the node itself when no strict ascendant
    qualifies; the CPC has no fallback and raises when no strict ascendant
    is projective (impossible in a complete tree, whose root is).
    """
    tree._require(v)
    fully = _fully_projective(tree)
    mpc = cpc = None
    for a in tree.ancestors(v):  # closest first: first hit wins size ties
        p = tree.parent(a)
        if fully[a] and (p is None or not fully[p]):
            if mpc is None or len(tree.indices(a)) < len(tree.indices(mpc)):
                mpc = a
        if is_projective(tree, a):
            if cpc is None or len(tree.indices(a)) < len(tree.indices(cpc)):
                cpc = a
    if cpc is None:
        raise NoProjectiveAscendant("node %d has no projective strict ascendant" % v)
    return (v if mpc is None else mpc), cpc


# -- transformations ---------------------------------------------------------


def normalize_unaries(tree: RangeLabelledTree, direction: str) -> RangeLabelledTree:
    """Collapse internal unary chains into @-joined labels, or expand them.

    ``collapse`` merges each maximal chain A0 -> A1 -> ... -> Ak of
    single-internal-child nodes into one node labelled ``A0@A1@...@Ak``;
    ``expand`` inverts it.  The two directions are mutually inverse.
    """
    if direction not in ("collapse", "expand"):
        raise ValueError("direction must be 'collapse' or 'expand'")

    def collapse(v):
        if tree.is_leaf(v):
            return tree.leaf_index(v)
        labels = [tree.label(v)]
        while (len(tree.children(v)) == 1
               and not tree.is_leaf(tree.children(v)[0])):
            v = tree.children(v)[0]
            labels.append(tree.label(v))
        return (UNARY_JOINER.join(labels),
                [collapse(c) for c in tree.children(v)])

    def expand(v):
        if tree.is_leaf(v):
            return tree.leaf_index(v)
        parts = tree.label(v).split(UNARY_JOINER)
        spec = (parts[-1], [expand(c) for c in tree.children(v)])
        for label in reversed(parts[:-1]):
            spec = (label, [spec])
        return spec

    walk = collapse if direction == "collapse" else expand
    return RangeLabelledTree.build(walk(tree.root), tokens=tree.tokens,
                                   check_labels=False)


def binarize(tree: RangeLabelledTree) -> RangeLabelledTree:
    """Left-branching binarization over min-index-ordered children.

    A node with children c1 < c2 < ... < ck (k > 2) becomes a cascade of
    fresh ``LABEL*`` nodes: (((c1 c2) c3) ...) with only the topmost node
    keeping the original label.
    """
    for v in tree.internal_nodes():
        if BINARIZE_MARKER in tree.label(v):
            raise ReservedLabel("label %r already uses %r"
                                % (tree.label(v), BINARIZE_MARKER))

    def walk(v):
        if tree.is_leaf(v):
            return tree.leaf_index(v)
        kids = sorted(tree.children(v), key=tree.min_index)
        specs = [walk(c) for c in kids]
        label = tree.label(v)
        while len(specs) > 2:
            specs = [(label + BINARIZE_MARKER, specs[:2])] + specs[2:]
        return (label, specs)

    return RangeLabelledTree.build(walk(tree.root), tokens=tree.tokens,
                                   check_labels=False)


def strip_preterminals(tree: RangeLabelledTree) -> RangeLabelledTree:
    """Splice out non-root POS nodes (single-leaf-child nodes).

    Transition parsers work over tagged tokens, so the POS layer of a
    treebank tree is dropped before computing gold constituents and
    restored from the input tags after decoding.
    """

    def walk(v):
        if tree.is_leaf(v):
            return tree.leaf_index(v)
        if tree.is_preterminal(v) and v != tree.root:
            return tree.leaf_index(tree.children(v)[0])
        return (tree.label(v), [walk(c) for c in tree.children(v)])

    return RangeLabelledTree.build(walk(tree.root), tokens=tree.tokens,
                                   check_labels=False)


def attach_preterminals(tree: RangeLabelledTree, tags) -> RangeLabelledTree:
    """Insert a POS node labelled ``tags[i-1]`` above every leaf i.

    Meant for trees without a POS layer (parser output); applying it to a
    tree that already has one stacks a second layer.
    """
    if len(tags) != tree.n:
        raise TreeError("expected %d tags, got %d" % (tree.n, len(tags)))

    def walk(v):
        if tree.is_leaf(v):
            i = tree.leaf_index(v)
            return (tags[i - 1], [i])
        return (tree.label(v), [walk(c) for c in tree.children(v)])

    return RangeLabelledTree.build(walk(tree.root), tokens=tree.tokens,
                                   check_labels=False)


def pos_sequence(tree: RangeLabelledTree):
    """The (token, POS) sequence read off the tree's preterminal layer."""
    tags = {}
    for v in tree.internal_nodes():
        if tree.is_preterminal(v):
            tags[tree.leaf_index(tree.children(v)[0])] = tree.label(v)
    missing = [i for i in range(1, tree.n + 1) if i not in tags]
    if missing:
        raise TreeError("leaves %s lack a POS node" % missing)
    if tree.tokens is None:
        raise TreeError("tree carries no tokens")
    return [(tree.tokens[i - 1], tags[i]) for i in range(1, tree.n + 1)]


def debinarize(tree: RangeLabelledTree) -> RangeLabelledTree:
    """Remove ``*``-marked intermediates, reattaching their children."""

    def walk(v):
        if tree.is_leaf(v):
            return [tree.leaf_index(v)]
        flat = []
        for c in tree.children(v):
            if not tree.is_leaf(c) and tree.label(c).endswith(BINARIZE_MARKER):
                flat.extend(walk(c))
            else:
                flat.append(walk_node(c))
        return flat

    def walk_node(v):
        if tree.is_leaf(v):
            return tree.leaf_index(v)
        kids = walk(v)
        kids.sort(key=_spec_sort_key)
        return (tree.label(v), kids)

    return RangeLabelledTree.build(walk_node(tree.root), tokens=tree.tokens,
                                   check_labels=False)
