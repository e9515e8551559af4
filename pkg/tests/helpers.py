"""Shared test machinery: exhaustive enumerations and brute-force oracles.

Everything here is deliberately independent of the production code paths
it is used to check: tree enumeration goes through laminar set families,
reachability and best-F1 checks search the raw transition space, and
random grammars are built directly from the rule constructors.
"""

import itertools
import random
from fractions import Fraction
from functools import lru_cache

from discoparse import transitions as tr
from discoparse.grammar import Plcfrs, T, V, make_rule
from discoparse.tree import (ConstituentSet, InstantiatedConstituent,
                             RangeLabelledTree, constituents_to_tree)  # noqa: F401


# -- exhaustive enumeration of trees via laminar families ---------------------


def _partial_partitions(elements):
    """All collections of disjoint non-empty subsets of `elements`."""
    elements = sorted(elements)
    if not elements:
        yield ()
        return
    head, rest = elements[0], elements[1:]
    # head unused
    for blocks in _partial_partitions(rest):
        yield blocks
    # head starts a new block together with any subset of the rest
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            block = frozenset((head,) + extra)
            remaining = [x for x in rest if x not in extra]
            for blocks in _partial_partitions(remaining):
                yield (block,) + blocks


@lru_cache(maxsize=None)
def _hierarchies(base):
    """All laminar families over `base` that contain `base` itself."""
    out = []
    for blocks in _partial_partitions(tuple(sorted(base))):
        if len(blocks) == 1 and blocks[0] == base:
            continue  # the root may not repeat as its own child
        pools = [_hierarchies(b) for b in blocks]
        for combo in itertools.product(*pools):
            family = frozenset((base,)).union(*combo)
            out.append(family)
    return tuple(set(out))


def laminar_families(n):
    """All laminar families over {1..n} containing the full set."""
    return _hierarchies(frozenset(range(1, n + 1)))


def all_complete_sets(n, labels=("A", "B")):
    """Every complete constituent set over {1..n} with the given labels."""
    out = []
    for family in laminar_families(n):
        members = sorted(family, key=lambda s: (min(s), -len(s), sorted(s)))
        for labelling in itertools.product(labels, repeat=len(members)):
            out.append(ConstituentSet(
                [InstantiatedConstituent(l, s)
                 for l, s in zip(labelling, members)], n))
    return out


def all_trees(n, labels=("A", "B")):
    """Every unary-free epsilon-free tree over n leaves (via the set view)."""
    return [constituents_to_tree(k) for k in all_complete_sets(n, labels)]


# -- brute-force search over the stack-free transition space ------------------


def sf_state(config):
    return (frozenset(config.memory), config.focus, config.i,
            config.step % 2, config.constituents)


def enumerate_sf_configs(n, labels=("A", "B")):
    """All valid stack-free configurations for sentence length n."""
    start = tr.init("sf", n)
    seen = {sf_state(start): start}
    frontier = [start]
    while frontier:
        config = frontier.pop()
        if tr.is_terminal("sf", config):
            continue
        for action in tr.legal("sf", config, labels):
            nxt = tr.apply("sf", config, action)
            key = sf_state(nxt)
            if key not in seen:
                seen[key] = nxt
                frontier.append(nxt)
    return list(seen.values())


def brute_force_reachable(config, target):
    """Search every completion for one that labels `target`.

    Independent of the closed-form reachability conditions: explores raw
    SHIFT/COMBINE choices and asks whether the focus can ever equal the
    target index set at a labelling step (any label may then be chosen).
    """
    if target in config.constituents:
        raise ValueError("target already built")
    goal = target.indices
    seen = set()

    def search(memory, focus, i, step):
        if step % 2 == 1:
            if focus == goal:
                return True
            return search(memory, focus, i, step + 1)  # label payload is free
        key = (memory, focus, i)
        if key in seen:
            return False
        seen.add(key)
        if i < config.j:
            new_mem = memory | {focus} if focus else memory
            if search(new_mem, frozenset((i,)), i + 1, step + 1):
                return True
        for s in memory:
            if search(memory - {s}, focus | s, i, step + 1):
                return True
        return False

    return search(frozenset(config.memory), config.focus, config.i,
                  config.step)


def max_additional_gold(config, gold):
    """Highest number of further gold constituents any completion builds.

    Label steps are forced (label the focus iff it is an unbuilt gold
    constituent): skipping a gold label or emitting a non-gold one never
    helps the F-score, so the search branches on structural choices only.
    """
    gold_sets = {m.indices: m for m in gold.members}
    built0 = frozenset(m for m in config.constituents if m in gold.members)
    full = frozenset(range(1, config.j))

    memo = {}

    def best(memory, focus, i, built):
        # states are entered at even steps
        if focus == full:
            return 0
        key = (memory, focus, i, built)
        if key in memo:
            return memo[key]
        memo[key] = 0  # cycle guard; states form a DAG so this is safe
        results = []

        def through_label(memory, focus, i, built):
            gain = 0
            member = gold_sets.get(focus)
            if member is not None and member not in built:
                gain = 1
                built = built | {member}
            return gain + best(memory, focus, i, built)

        if i < config.j:
            new_mem = memory | {focus} if focus else memory
            results.append(through_label(new_mem, frozenset((i,)), i + 1, built))
        for s in memory:
            results.append(through_label(memory - {s}, focus | s, i, built))
        memo[key] = max(results) if results else 0
        return memo[key]

    start_focus = config.focus
    built = built0
    gain0 = 0
    if config.step % 2 == 1:
        member = gold_sets.get(start_focus)
        if member is not None and member not in built:
            gain0 = 1
            built = built | {member}
        if start_focus == full:
            return gain0
    return gain0 + best(frozenset(config.memory), start_focus, config.i, built)


def exact_f1(pred_members, gold_members):
    matched = len(frozenset(pred_members) & frozenset(gold_members))
    denom = len(pred_members) + len(gold_members)
    if denom == 0:
        return Fraction(1)
    return Fraction(2 * matched, denom)


def best_completion_f1(config, gold):
    """The maximum F1 over all completions of `config`, exactly."""
    pre_pred = len(config.constituents)
    pre_matched = len(frozenset(config.constituents) & gold.members)
    extra = max_additional_gold(config, gold)
    return Fraction(2 * (pre_matched + extra),
                    pre_pred + extra + len(gold.members))


def rollout_dynamic(config, gold):
    """Follow the deterministic dynamic oracle to a terminal configuration."""
    from discoparse.oracles import dynamic_oracle
    while not tr.is_terminal("sf", config):
        config = tr.apply("sf", config, dynamic_oracle(config, gold).pick)
    return config


def project(config, gold):
    """The gold-relevant part of a configuration.

    The dynamic oracle's future gains depend only on the structural state
    and on which gold constituents are already built; extra (non-gold)
    labels in K affect the F-score additively but not the decisions.  A
    junk label on the root still terminates a run, so that bit is kept.
    """
    full = frozenset(range(1, gold.n + 1))
    return (frozenset(config.memory), config.focus, config.i,
            config.step % 2,
            frozenset(m for m in config.constituents if m in gold.members),
            any(m.indices == full for m in config.constituents))


class DynamicOracleChecker:
    """Per-gold machinery comparing the oracle against brute force.

    For a projected state, `oracle_extra` counts the gold constituents the
    deterministic dynamic oracle still builds, and `best_extra` the
    maximum any completion can build; optimality means they agree
    everywhere.  Memos are shared across states, so sweeping a whole
    configuration space costs little more than one traversal.
    """

    def __init__(self, gold):
        from discoparse.oracles import dynamic_oracle
        self.gold = gold
        self.j = gold.n + 1
        self.full = frozenset(range(1, gold.n + 1))
        self.gold_by_set = {m.indices: m for m in gold.members}
        self._dyn = dynamic_oracle
        self._best = {}
        self._oracle = {}

    def _config(self, state):
        memory, focus, i, parity, built, root_labelled = state
        constituents = set(built)
        if root_labelled and not any(m.indices == self.full for m in built):
            constituents.add(InstantiatedConstituent("?", self.full))
        step = parity  # only the parity matters to legality and the oracle
        return tr.SfConfig(memory, focus, i, self.j, frozenset(constituents),
                           step)

    def _is_terminal_state(self, state):
        return state[2] == self.j and state[5]

    def best_extra(self, state):
        if state not in self._best:
            self._best[state] = max_additional_gold(self._config(state),
                                                    self.gold)
        return self._best[state]

    def oracle_extra(self, state):
        if state in self._oracle:
            return self._oracle[state]
        if self._is_terminal_state(state):
            self._oracle[state] = 0
            return 0
        built = state[4]
        config = self._config(state)
        pick = self._dyn(config, self.gold).pick
        nxt = tr.apply("sf", config, pick)
        gain = len(frozenset(nxt.constituents) & self.gold.members) - len(built)
        result = gain + self.oracle_extra(project(nxt, self.gold))
        self._oracle[state] = result
        return result

    def check_state(self, state):
        assert self.oracle_extra(state) == self.best_extra(state), \
            ("dynamic oracle suboptimal", state, self.gold)

    def check_preservation(self, state):
        """After every oracle-approved even action, reach is preserved."""
        from discoparse.oracles import reach
        if state[3] != 0 or self._is_terminal_state(state):
            return
        config = self._config(state)
        before = set(reach(config, self.gold))
        for action in self._dyn(config, self.gold).actions:
            after_config = tr.apply("sf", config, action)
            after = set(reach(after_config, self.gold))
            missing = [m for m in before if m not in after
                       and m not in after_config.constituents]
            assert not missing, ("reachability lost", state, action, missing)

    def check_literal_config(self, config):
        """Full-config rollout F1 equals the brute-force maximum exactly."""
        final = rollout_dynamic(config, gold=self.gold)
        got = exact_f1(final.constituents, self.gold.members)
        want = best_completion_f1(config, self.gold)
        assert got == want, (config, got, want)


# -- random grammars -----------------------------------------------------------


def random_plcfrs(rng: random.Random, max_rules: int = 6):
    """A small random PLCFRS: fan-out <= 2, rank <= 2, POS-form lexicon.

    Preterminals carry one unique terminal each with probability 1, so
    token strings and tag sequences are in bijection and chart weights
    line up with the brute-force language weights.
    """
    n_pre = rng.randint(1, 2)
    pres = ["P%d" % k for k in range(1, n_pre + 1)]
    dims = {"S": 1}
    phrasal = ["S"]
    for name in ("A", "B"):
        if rng.random() < 0.6:
            dims[name] = rng.randint(1, 2)
            phrasal.append(name)
    for p in pres:
        dims[p] = 1
    rules = []
    budget = max_rules - n_pre
    for lhs in phrasal:
        if budget <= 0:
            break
        n_rules = rng.randint(1, min(2, budget))
        budget -= n_rules
        for k in range(n_rules):
            rule = _random_rule(rng, lhs, dims, phrasal, pres,
                                ground=(k == 0))
            if rule is not None:
                rules.append(rule)
    # normalize weights per LHS
    weighted = []
    by_lhs = {}
    for lhs, args, rhs in rules:
        by_lhs.setdefault(lhs, []).append((args, rhs))
    for lhs, group in by_lhs.items():
        counts = [rng.randint(1, 4) for _ in group]
        total = sum(counts)
        for (args, rhs), c in zip(group, counts):
            weighted.append(make_rule(lhs, args, rhs, c / total))
    for k, p in enumerate(pres):
        weighted.append(make_rule(p, [(T("t%d" % (k + 1)),)]))
    return Plcfrs(dims, weighted, "S")


def _random_rule(rng, lhs, dims, phrasal, pres, ground=False):
    rank = rng.randint(1, 2)
    rhs_nts = []
    for _ in range(rank):
        if ground:
            # each nonterminal's first rule avoids self-recursion so the
            # generated languages are usually non-trivial
            pool = pres + [x for x in phrasal if x != lhs]
        elif rng.random() < 0.8:
            pool = phrasal + pres
        else:
            pool = pres
        rhs_nts.append(rng.choice(pool))
    variables = []
    rhs = []
    for e, nt in enumerate(rhs_nts):
        tup = tuple("X%d%d" % (e, k) for k in range(dims[nt]))
        rhs.append((nt, tup))
        variables.append(list(tup))
    # random interleaving that preserves each element's own order
    seq = []
    pools = [list(v) for v in variables]
    while any(pools):
        choices = [k for k, pool in enumerate(pools) if pool]
        seq.append(pools[rng.choice(choices)].pop(0))
    dim = dims[lhs]
    if len(seq) < dim:
        return None
    cuts = sorted(rng.sample(range(1, len(seq)), dim - 1)) if dim > 1 else []
    args = []
    prev = 0
    for cut in cuts + [len(seq)]:
        args.append(tuple(V(x) for x in seq[prev:cut]))
        prev = cut
    return (lhs, args, rhs)


def learnable_plcfrs():
    """A fixed mildly discontinuous PLCFRS for training-sanity checks."""
    lex = {
        "MD": ["must", "may"], "VI": ["sleeps", "runs"],
        "PTC": ["about-it", "under-it"], "VB": ["thought", "talked"],
        "DT": ["the", "a"], "NN": ["cat", "dog", "man"],
        "PRO": ["he", "she"], "IN": ["in", "on"],
    }
    rules = [
        make_rule("S", [(V("X1"), V("X2"), V("X3"))],
                  [("VP", ("X1", "X3")), ("MD", ("X2",))], 0.5),
        make_rule("S", [(V("X1"), V("X2"))],
                  [("NP", ("X1",)), ("VI", ("X2",))], 0.5),
        make_rule("VP", [(V("X1"),), (V("X2"), V("X3"))],
                  [("VP", ("X1", "X2")), ("PP", ("X3",))], 0.3),
        make_rule("VP", [(V("X1"),), (V("X2"),)],
                  [("PTC", ("X1",)), ("VB", ("X2",))], 0.7),
        make_rule("NP", [(V("X1"), V("X2"))],
                  [("DT", ("X1",)), ("NN", ("X2",))], 0.7),
        make_rule("NP", [(V("X1"),)], [("PRO", ("X1",))], 0.3),
        make_rule("PP", [(V("X1"), V("X2"))],
                  [("IN", ("X1",)), ("NP", ("X2",))], 1.0),
    ]
    dims = {"S": 1, "VP": 2, "NP": 1, "PP": 1}
    for tag, words in lex.items():
        dims[tag] = 1
        for word in words:
            rules.append(make_rule(tag, [(T(word),)], weight=1.0 / len(words)))
    return Plcfrs(dims, rules, "S")


def sample_tree(g: Plcfrs, rng: random.Random, max_depth: int = 6):
    """Sample one derivation tree (with POS layer and tokens) from g."""

    class Leaf:
        __slots__ = ("token", "tag")

        def __init__(self, token, tag):
            self.token = token
            self.tag = tag

    def pick_rule(nt, depth):
        rules = list(g.rules_for(nt))
        if depth >= max_depth:
            nonrec = [r for r in rules
                      if all(other != nt for other, _ in r.rhs)]
            rules = nonrec or rules
        dart = rng.random() * sum(r.prob for r in rules)
        for rule in rules:
            dart -= rule.prob
            if dart <= 0:
                return rule
        return rules[-1]

    def expand(nt, depth):
        """Returns (node spec builder, tuple of leaf-component lists)."""
        rule = pick_rule(nt, depth)
        if rule.is_terminating():
            leaf = Leaf(rule.lhs_args[0][0].value, nt)
            return ("leaf", leaf), ((leaf,),)
        child_specs = []
        env = {}
        for child_nt, tup in rule.rhs:
            spec, components = expand(child_nt, depth + 1)
            child_specs.append(spec)
            for var, component in zip(tup, components):
                env[var] = component
        components = tuple(
            tuple(leaf for sym in arg for leaf in env[sym.value])
            for arg in rule.lhs_args)
        return ("node", nt, child_specs), components

    spec, components = expand(g.start, 0)
    sentence = list(components[0])
    position = {id(leaf): k + 1 for k, leaf in enumerate(sentence)}

    def build(node):
        if node[0] == "leaf":
            leaf = node[1]
            return (leaf.tag, [position[id(leaf)]])
        return (node[1], [build(c) for c in node[2]])

    tree = RangeLabelledTree.build(build(spec),
                                   tokens=[l.token for l in sentence])
    return tree


def tag_string_language(g: Plcfrs, max_len: int):
    """Token-tuple language mapped through the preterminal bijection."""
    from discoparse.grammar import generate_strings
    token_to_tag = {}
    for rule in g.rules:
        if rule.is_terminating():
            token_to_tag[rule.lhs_args[0][0].value] = rule.lhs
    table = generate_strings(g, max_len, with_weights=True)
    return {tuple(token_to_tag[t] for t in string): cost
            for string, cost in table.items()}
