"""The four transition systems as explicit state machines.

Systems are identified by short names:

- ``sr``: projective shift-reduce over binary trees (stack + buffer),
- ``swap``: shift-reduce with the SWAP reordering action,
- ``mlgap``: merge-label-gap over a stack and a deque of index sets, with
  a three-state automaton restricting action order,
- ``sf``: the stack-free shift-combine system over an unordered memory
  set and a focus item, alternating structural and labelling steps.

Configurations are immutable values; ``apply`` returns a fresh
configuration and raises IllegalAction when the side conditions of the
deduction rule are not met.  ``legal`` enumerates exactly the applicable
actions (labelled actions once per symbol of the given alphabet) and
never offers an action that would strand the parser short of a terminal
configuration.
"""

from typing import NamedTuple, Optional

from .tree import (ConstituentSet, InstantiatedConstituent, RangeLabelledTree,
                   constituents_to_tree, normalize_unaries, _spec_min_index)

SYSTEMS = ("sr", "swap", "mlgap", "sf")

STRUCT, STRUCT_GAP, LABEL_STATE = "Struct", "Struct'", "Label"
# FSA of allowed action kinds per state (the merge-label-gap automaton)
_MLGAP_FSA = {
    (STRUCT, "SHIFT"): LABEL_STATE,
    (STRUCT, "MERGE"): LABEL_STATE,
    (STRUCT, "GAP"): STRUCT_GAP,
    (STRUCT_GAP, "GAP"): STRUCT_GAP,
    (STRUCT_GAP, "MERGE"): LABEL_STATE,
    (LABEL_STATE, "LABEL"): STRUCT,
    (LABEL_STATE, "NO-LABEL"): STRUCT,
}


class TransitionError(Exception):
    pass


class ZeroLength(TransitionError):
    pass


class IllegalAction(TransitionError):
    pass


class NotTerminal(TransitionError):
    pass


class Action(NamedTuple):
    """One parser action; `label` and `indices` are payload fields."""

    kind: str
    label: Optional[str] = None
    indices: Optional[frozenset] = None

    def __str__(self):
        if self.kind in ("REDUCE", "REDUCEUNARY", "LABEL"):
            return "%s-%s" % (self.kind, self.label)
        if self.kind == "COMBINE":
            return "COMBINE-{%s}" % ",".join(map(str, sorted(self.indices)))
        return self.kind


def shift():
    return Action("SHIFT")


def reduce_(label):
    return Action("REDUCE", label)


def reduce_unary(label):
    return Action("REDUCEUNARY", label)


def swap():
    return Action("SWAP")


def merge():
    return Action("MERGE")


def gap():
    return Action("GAP")


def label(symbol):
    return Action("LABEL", symbol)


def no_label():
    return Action("NO-LABEL")


def combine(indices):
    return Action("COMBINE", None, frozenset(indices))


# -- stack/buffer trees for the shift-reduce systems -------------------------
#
# Partial trees are nested tuples: a leaf is its 1-based token index, an
# internal node a (label, children) pair with children sorted by smallest
# index.  This is exactly the tree-spec format of RangeLabelledTree.build.


def subtree_min(t) -> int:
    return _spec_min_index(t)


def subtree_unary_chain(t) -> int:
    """Number of consecutive single-child nodes hanging from the root."""
    depth = 0
    while not isinstance(t, int) and len(t[1]) == 1:
        depth += 1
        t = t[1][0]
    return depth


class SrConfig(NamedTuple):
    stack: tuple
    buffer: tuple


class SwapConfig(NamedTuple):
    stack: tuple
    buffer: tuple


class MlGapConfig(NamedTuple):
    """Stack and deque of index sets; tops are the last elements."""

    stack: tuple
    deque: tuple
    i: int
    j: int
    constituents: frozenset
    state: str


class SfConfig(NamedTuple):
    memory: frozenset
    focus: frozenset
    i: int
    j: int
    constituents: frozenset
    step: int


def init(system: str, n: int):
    """Initial configuration for a sentence of n tokens."""
    _check_system(system)
    if n < 1:
        raise ZeroLength("sentence length must be positive")
    if system == "sr":
        return SrConfig((), tuple(range(1, n + 1)))
    if system == "swap":
        return SwapConfig((), tuple(range(1, n + 1)))
    if system == "mlgap":
        return MlGapConfig((), (), 0, n, frozenset(), STRUCT)
    return SfConfig(frozenset(), frozenset(), 1, n + 1, frozenset(), 0)


def _check_system(system):
    if system not in SYSTEMS:
        raise TransitionError("unknown system %r; expected one of %s"
                              % (system, "/".join(SYSTEMS)))


def sentence_length(system: str, config) -> int:
    if isinstance(config, (SrConfig, SwapConfig)):
        leaves = set()
        for t in config.stack + config.buffer:
            stackq = [t]
            while stackq:
                x = stackq.pop()
                if isinstance(x, int):
                    leaves.add(x)
                else:
                    stackq.extend(x[1])
        return max(leaves)
    if isinstance(config, MlGapConfig):
        return config.j
    return config.j - 1


def is_terminal(system: str, config) -> bool:
    _check_system(system)
    if system in ("sr", "swap"):
        return len(config.stack) == 1 and not config.buffer
    if system == "mlgap":
        full = frozenset(range(1, config.j + 1))
        return (config.i == config.j and config.state == STRUCT
                and any(m.indices == full for m in config.constituents))
    full = frozenset(range(1, config.j))
    return (config.i == config.j
            and any(m.indices == full for m in config.constituents))


def legal(system: str, config, labels=(), unary_cap: int = 3) -> frozenset:
    """The actions applicable in `config`, labelled ones per `labels`.

    Emptiness and ordering guards follow the deduction rules; in addition
    GAP requires two stack elements (a lone gapped element could never be
    merged again) and NO-LABEL is withheld when no structural action could
    follow, so a greedy parser can never strand itself.
    """
    _check_system(system)
    out = set()
    if system in ("sr", "swap"):
        if config.buffer:
            out.add(shift())
        if len(config.stack) >= 2:
            out.update(reduce_(x) for x in labels)
            if (system == "swap"
                    and subtree_min(config.stack[-2]) < subtree_min(config.stack[-1])):
                out.add(swap())
        if config.stack and subtree_unary_chain(config.stack[-1]) < unary_cap:
            out.update(reduce_unary(x) for x in labels)
        return frozenset(out)
    if system == "mlgap":
        if config.state == LABEL_STATE:
            out.update(label(x) for x in labels)
            if config.i < config.j or config.stack:
                out.add(no_label())
        else:
            if config.state == STRUCT and config.i < config.j:
                out.add(shift())
            if config.stack and config.deque:
                out.add(merge())
            if len(config.stack) >= 2 and config.deque:
                out.add(gap())
        return frozenset(out)
    if config.step % 2 == 0:
        if config.i < config.j:
            out.add(shift())
        out.update(combine(s) for s in config.memory)
    else:
        out.update(label(x) for x in labels)
        if config.i < config.j or config.memory:
            out.add(no_label())
    return frozenset(out)


def apply(system: str, config, action: Action, unary_cap: int = 3):
    """One deduction step; raises IllegalAction on unmet side conditions."""
    _check_system(system)
    kind = action.kind
    if system in ("sr", "swap"):
        stack, buffer = config.stack, config.buffer
        cls = type(config)
        if kind == "SHIFT":
            if not buffer:
                raise IllegalAction("SHIFT on an empty buffer")
            return cls(stack + (buffer[0],), buffer[1:])
        if kind == "REDUCE":
            if len(stack) < 2:
                raise IllegalAction("REDUCE needs two stack elements")
            node = (action.label,
                    tuple(sorted(stack[-2:], key=subtree_min)))
            return cls(stack[:-2] + (node,), buffer)
        if kind == "REDUCEUNARY":
            if not stack:
                raise IllegalAction("REDUCEUNARY on an empty stack")
            if subtree_unary_chain(stack[-1]) >= unary_cap:
                raise IllegalAction("unary chain longer than %d" % unary_cap)
            return cls(stack[:-1] + ((action.label, (stack[-1],)),), buffer)
        if kind == "SWAP" and system == "swap":
            if len(stack) < 2:
                raise IllegalAction("SWAP needs two stack elements")
            s1, s0 = stack[-2], stack[-1]
            if not subtree_min(s1) < subtree_min(s0):
                raise IllegalAction("SWAP violates the leftmost-index guard")
            return cls(stack[:-2] + (s0,), (s1,) + buffer)
        raise IllegalAction("action %s undefined for system %s" % (action, system))
    if system == "mlgap":
        state = _MLGAP_FSA.get((config.state, kind))
        if state is None:
            raise IllegalAction("%s not allowed in state %s" % (action, config.state))
        stack, deque = config.stack, config.deque
        if kind == "SHIFT":
            if config.i >= config.j:
                raise IllegalAction("SHIFT past the last token")
            return MlGapConfig(stack + deque, (frozenset((config.i + 1,)),),
                               config.i + 1, config.j, config.constituents, state)
        if kind == "MERGE":
            if not stack or not deque:
                raise IllegalAction("MERGE needs a stack top and a deque top")
            return MlGapConfig(stack[:-1] + deque[:-1], (stack[-1] | deque[-1],),
                               config.i, config.j, config.constituents, state)
        if kind == "GAP":
            if not stack:
                raise IllegalAction("GAP on an empty stack")
            return MlGapConfig(stack[:-1], (stack[-1],) + deque,
                               config.i, config.j, config.constituents, state)
        if kind == "LABEL":
            item = InstantiatedConstituent(action.label, deque[-1])
            return MlGapConfig(stack, deque, config.i, config.j,
                               config.constituents | {item}, state)
        return MlGapConfig(stack, deque, config.i, config.j,
                           config.constituents, state)
    # stack-free
    even = config.step % 2 == 0
    if kind == "SHIFT":
        if not even or config.i >= config.j:
            raise IllegalAction("SHIFT needs an even step and unread input")
        memory = config.memory | {config.focus} if config.focus else config.memory
        return SfConfig(memory, frozenset((config.i,)), config.i + 1,
                        config.j, config.constituents, config.step + 1)
    if kind == "COMBINE":
        if not even:
            raise IllegalAction("COMBINE needs an even step")
        if action.indices not in config.memory:
            raise IllegalAction("COMBINE target %s not in the memory"
                                % sorted(action.indices))
        return SfConfig(config.memory - {action.indices},
                        config.focus | action.indices, config.i, config.j,
                        config.constituents, config.step + 1)
    if kind == "LABEL":
        if even:
            raise IllegalAction("LABEL needs an odd step")
        item = InstantiatedConstituent(action.label, config.focus)
        return SfConfig(config.memory, config.focus, config.i, config.j,
                        config.constituents | {item}, config.step + 1)
    if kind == "NO-LABEL":
        if even:
            raise IllegalAction("NO-LABEL needs an odd step")
        if config.i == config.j and not config.memory:
            raise IllegalAction("NO-LABEL would strand the final focus")
        return SfConfig(config.memory, config.focus, config.i, config.j,
                        config.constituents, config.step + 1)
    raise IllegalAction("action %s undefined for system sf" % (action,))


def decode(system: str, config) -> RangeLabelledTree:
    """Read the finished tree off a terminal configuration.

    For the set-based systems the constituent set is turned back into a
    tree and collapsed unary chains are expanded.
    """
    _check_system(system)
    if not is_terminal(system, config):
        raise NotTerminal("configuration is not terminal")
    if system in ("sr", "swap"):
        return RangeLabelledTree.build(config.stack[0], check_labels=False)
    n = config.j if system == "mlgap" else config.j - 1
    kset = ConstituentSet(config.constituents, n)
    return normalize_unaries(constituents_to_tree(kset), "expand")


def replay(system: str, actions, n: int, unary_cap: int = 3):
    """Run an action sequence from the initial configuration.

    Returns the list of all configurations visited (length ``len(actions)
    + 1``); useful for trace emission and invariant checking.
    """
    config = init(system, n)
    trace = [config]
    for action in actions:
        config = apply(system, config, action, unary_cap=unary_cap)
        trace.append(config)
    return trace
