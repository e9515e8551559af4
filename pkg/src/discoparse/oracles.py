"""Oracles for the transition systems.

An oracle maps configurations to the next action on a path that rebuilds
a given gold tree (static oracles), or to the set of actions preserving
the best reachable F-score from an arbitrary valid configuration (the
dynamic oracle of the stack-free system).

The SWAP oracles differ only in when they allow a SWAP: the eager variant
swaps whenever the two stack tops are out of projective order; the lazy
variant additionally requires the stack top and the buffer front not to
share their closest maximal fully projective constituent; the lazier
variant instead requires the two stack tops to share their closest
projective constituent.  A ``projective`` strategy disables SWAP
altogether and only accepts projective trees.
"""

from typing import NamedTuple

from . import transitions as tr
from .transitions import Action, SfConfig
from .tree import (ConstituentSet, InstantiatedConstituent, NotBinary,
                   RangeLabelledTree, _fully_projective, is_projective,
                   post_order, validate_constituent_set)

SWAP_STRATEGIES = ("eager", "lazy", "lazier", "projective")


class OracleError(Exception):
    pass


class NotComplete(OracleError):
    pass


class ProjectiveStrategyOnDiscontinuousTree(OracleError):
    pass


class UnaryCapExceeded(OracleError):
    pass


class AlreadyBuilt(OracleError):
    pass


class OracleStuck(OracleError):
    """No gold-compatible action exists; indicates an invalid input."""


# -- shift-reduce(-swap) oracles ----------------------------------------------


def _gold_anchor_tables(tree):
    """Per-node MPC/CPC over precomputed full-projectivity flags."""
    fully = _fully_projective(tree)
    proj = {v: tree.is_leaf(v) or is_projective(tree, v) for v in tree.nodes()}
    mpc, cpc = {}, {}
    for v in tree.nodes():
        best_m = best_c = None
        for a in tree.ancestors(v):  # closest first: first hit wins size ties
            p = tree.parent(a)
            if fully[a] and (p is None or not fully[p]):
                if best_m is None or len(tree.indices(a)) < len(tree.indices(best_m)):
                    best_m = a
            if proj[a]:
                if best_c is None or len(tree.indices(a)) < len(tree.indices(best_c)):
                    best_c = a
        mpc[v] = v if best_m is None else best_m
        cpc[v] = best_c  # None only for the root, which is never queried
    return mpc, cpc


def swap_oracle(tree: RangeLabelledTree, strategy: str = "lazier",
                unary_cap: int = 3):
    """Action sequence rebuilding a binary gold tree via SHIFT-REDUCE(-SWAP).

    Reductions take priority over unary reductions, which take priority
    over allowed SWAPs, which take priority over SHIFT.  Replaying the
    sequence from the initial configuration reaches a terminal
    configuration decoding to the input tree.
    """
    if strategy not in SWAP_STRATEGIES:
        raise OracleError("unknown strategy %r; expected one of %s"
                          % (strategy, "/".join(SWAP_STRATEGIES)))
    for v in tree.internal_nodes():
        if len(tree.children(v)) > 2:
            raise NotBinary("node %r has %d children; binarize first"
                            % (tree.label(v), len(tree.children(v))))

    def chain_depth(v):
        depth = 0
        while not tree.is_leaf(v) and len(tree.children(v)) == 1:
            depth += 1
            v = tree.children(v)[0]
        return depth

    if any(chain_depth(v) > unary_cap for v in tree.internal_nodes()):
        raise UnaryCapExceeded("gold tree has a unary chain longer than %d"
                               % unary_cap)
    if strategy == "projective":
        if any(not is_projective(tree, v) for v in tree.internal_nodes()):
            raise ProjectiveStrategyOnDiscontinuousTree(
                "plain shift-reduce cannot build a discontinuous tree")

    # position in the min-index post-order traversal linearizes <_G
    rank = {v: i for i, v in enumerate(post_order(tree))}
    mpc, cpc = _gold_anchor_tables(tree)

    def swap_allowed(stack, buffer):
        s1, s0 = stack[-2], stack[-1]
        if not rank[s0] < rank[s1]:  # needs s0 <_G s1
            return False
        if strategy == "eager":
            return True
        if strategy == "lazy":
            return not buffer or mpc[s0] != mpc[buffer[0]]
        if strategy == "lazier":
            return cpc[s1] == cpc[s0]
        return False  # projective

    stack = []
    buffer = sorted(tree.leaves(), key=tree.leaf_index)
    actions = []
    limit = 8 * len(buffer) ** 2 + 4 * unary_cap * len(buffer) + 16
    while not (len(stack) == 1 and stack[0] == tree.root and not buffer):
        if len(actions) > limit:
            raise OracleStuck("no progress after %d actions" % limit)
        if len(stack) >= 2:
            p = tree.parent(stack[-1])
            if (p is not None and p == tree.parent(stack[-2])
                    and len(tree.children(p)) == 2):
                actions.append(tr.reduce_(tree.label(p)))
                stack[-2:] = [p]
                continue
        if stack:
            p = tree.parent(stack[-1])
            if p is not None and len(tree.children(p)) == 1:
                actions.append(tr.reduce_unary(tree.label(p)))
                stack[-1] = p
                continue
        if len(stack) >= 2 and swap_allowed(stack, buffer):
            actions.append(tr.swap())
            buffer.insert(0, stack[-2])
            del stack[-2]
            continue
        if buffer:
            actions.append(tr.shift())
            stack.append(buffer.pop(0))
            continue
        raise OracleStuck("dead end with stack %s" % ([str(s) for s in stack],))
    return actions


# -- gold-set helpers ---------------------------------------------------------


def _require_complete(kset: ConstituentSet):
    report = validate_constituent_set(kset)
    if not report.complete:
        raise NotComplete("gold constituent set is not complete: %s" % (report,))


def _parent_table(kset: ConstituentSet):
    """Map from an index set to its minimal strict gold superset."""
    members = sorted(kset.members, key=lambda m: len(m.indices))
    cache = {}

    def parent_of(indices):
        if indices not in cache:
            cache[indices] = next(
                (m.indices for m in members if indices < m.indices), None)
        return cache[indices]

    return parent_of


# -- merge-label-gap oracle ---------------------------------------------------


def mlgap_oracle(kset: ConstituentSet):
    """Eager oracle with leftmost implicit binarization.

    MERGE fires when the stack top shares the deque top's gold parent; a
    chain of GAPs digs out the unique deeper stack element that does (at
    most one exists); otherwise SHIFT.  Labelling steps assert gold
    constituents and nothing else.
    """
    _require_complete(kset)
    parent_of = _parent_table(kset)
    config = tr.init("mlgap", kset.n)
    actions = []
    while not tr.is_terminal("mlgap", config):
        if config.state == tr.LABEL_STATE:
            symbol = kset.label_of(config.deque[-1])
            action = tr.label(symbol) if symbol is not None else tr.no_label()
        else:
            action = None
            if config.deque and config.stack:
                target = parent_of(config.deque[-1])
                matches = [k for k, s in enumerate(reversed(config.stack))
                           if parent_of(s) == target] if target else []
                assert len(matches) <= 1, "gold parent shared by several stack items"
                if matches:
                    action = tr.merge() if matches[0] == 0 else tr.gap()
            if action is None:
                if config.state != tr.STRUCT or config.i >= config.j:
                    raise OracleStuck("no structural action rebuilds the gold set")
                action = tr.shift()
        actions.append(action)
        config = tr.apply("mlgap", config, action)
    return actions


# -- stack-free static oracle -------------------------------------------------


def sf_static_action(config: SfConfig, kset: ConstituentSet,
                     parent_of=None) -> Action:
    """The static-oracle action for one configuration on the gold path."""
    if parent_of is None:
        parent_of = _parent_table(kset)
    if config.step % 2 == 1:
        symbol = kset.label_of(config.focus)
        return tr.label(symbol) if symbol is not None else tr.no_label()
    if config.focus:
        target = parent_of(config.focus)
        if target is not None:
            matches = [s for s in config.memory if parent_of(s) == target]
            assert len(matches) <= 1, "gold parent shared by several memory items"
            if matches:
                return tr.combine(matches[0])
    if config.i >= config.j:
        raise OracleStuck("no structural action rebuilds the gold set")
    return tr.shift()


def sf_static_oracle(kset: ConstituentSet):
    """Static oracle of the stack-free system; always 4n-2 actions."""
    _require_complete(kset)
    parent_of = _parent_table(kset)
    config = tr.init("sf", kset.n)
    actions = []
    while not tr.is_terminal("sf", config):
        action = sf_static_action(config, kset, parent_of)
        actions.append(action)
        config = tr.apply("sf", config, action)
    return actions


# -- stack-free dynamic oracle ------------------------------------------------


def reachable(config: SfConfig, target: InstantiatedConstituent) -> bool:
    """Whether `target` can still enter the constituent set from `config`.

    A constituent is reachable iff its right edge is not behind the focus,
    every memory item and the focus are inside it or disjoint from it, and
    (at structural steps) it is not the focus itself, which can no longer
    be labelled as-is.
    """
    if target in config.constituents:
        raise AlreadyBuilt("%s is already built" % (target,))
    goal = target.indices
    if not goal or max(goal) > config.j - 1:
        return False
    focus_max = max(config.focus) if config.focus else 0
    if focus_max > max(goal):
        return False
    for s in config.memory | {config.focus}:
        if s and not (s <= goal or not (s & goal)):
            return False
    if config.step % 2 == 0 and config.focus == goal:
        return False
    return True


def reach(config: SfConfig, kset: ConstituentSet):
    """The gold constituents still reachable from `config`."""
    return [m for m in kset.members
            if m not in config.constituents and reachable(config, m)]


def next_constituent(config: SfConfig, kset: ConstituentSet) -> InstantiatedConstituent:
    """The rightmost-index-minimal reachable gold constituent.

    Well-defined for valid non-terminal configurations: reachable gold
    members are pairwise compatible, and the gold root is always among
    them.
    """
    candidates = reach(config, kset)
    return min(candidates, key=lambda m: (max(m.indices), len(m.indices)))


class DynamicDecision(NamedTuple):
    actions: frozenset
    pick: Action


def dynamic_oracle(config: SfConfig, kset: ConstituentSet) -> DynamicDecision:
    """All optimal actions plus the deterministic training pick.

    Odd steps label the focus iff it is gold.  Even steps allow every
    COMBINE that stays inside the next reachable gold constituent, plus
    SHIFT when that constituent reaches further right than the focus; the
    deterministic pick prefers COMBINE, breaking ties towards the highest
    right index.
    """
    _require_complete(kset)
    if config.step % 2 == 1:
        symbol = kset.label_of(config.focus)
        action = tr.label(symbol) if symbol is not None else tr.no_label()
        return DynamicDecision(frozenset((action,)), action)
    target = next_constituent(config, kset)
    goal = target.indices
    combines = [s for s in config.memory if (config.focus | s) <= goal]
    actions = {tr.combine(s) for s in combines}
    focus_max = max(config.focus) if config.focus else 0
    if max(goal) > focus_max:
        actions.add(tr.shift())
    if combines:
        pick = tr.combine(max(combines, key=max))
    else:
        pick = tr.shift()
    return DynamicDecision(frozenset(actions), pick)
