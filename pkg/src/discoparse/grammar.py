"""LCFRS and probabilistic LCFRS grammars.

A rule rewrites a nonterminal with a tuple of argument strings over
terminals and variables into a sequence of nonterminals, each consuming a
tuple of variables.  Every variable occurs exactly once on each side.  Rule
probabilities are stored internally as non-negative costs ``|log q|``
(lower is better) and converted back to probabilities at IO boundaries.

Besides the grammar type this module provides the property checks required
or exploited by the chart parser, the normalization transformations
(gap-explicitness, terminal isolation, pruning), treebank extraction, rule
instantiation against a concrete word, and a brute-force string-language
computation that serves as the test oracle for everything else.
"""

import itertools
import math
from typing import Iterable, NamedTuple, Optional, Sequence

from .tree import Range, RangeLabelledTree

WEIGHT_TOL = 1e-9


class GrammarError(Exception):
    """Base class for grammar construction and transformation errors."""


class NotOrdered(GrammarError):
    pass


class CapExceeded(GrammarError):
    pass


class MissingPreterminal(GrammarError):
    pass


class NameCollision(GrammarError):
    pass


class Sym(NamedTuple):
    """One symbol in an LHS argument: a terminal or a variable."""

    terminal: bool
    value: str

    def __str__(self):
        return "'%s'" % self.value if self.terminal else self.value


def T(value: str) -> Sym:
    return Sym(True, value)


def V(value: str) -> Sym:
    return Sym(False, value)


class LcfrsRule(NamedTuple):
    """``lhs(args) -> rhs[0] rhs[1] ...`` with probability `prob`.

    `cost` duplicates the probability as ``|log q|``; parsing sums costs,
    IO reads and writes the probability verbatim.
    """

    lhs: str
    lhs_args: tuple  # tuple of tuples of Sym
    rhs: tuple       # tuple of (nonterminal, tuple of variable names)
    cost: float
    prob: float

    @property
    def rank(self) -> int:
        return len(self.rhs)

    @property
    def probability(self) -> float:
        return self.prob

    def is_terminating(self) -> bool:
        return not self.rhs

    def lhs_variables(self):
        return [s.value for arg in self.lhs_args for s in arg if not s.terminal]

    def lhs_terminals(self):
        return [s.value for arg in self.lhs_args for s in arg if s.terminal]

    def rhs_variables(self):
        return [v for _, tup in self.rhs for v in tup]

    def __str__(self):
        lhs = "%s(%s)" % (self.lhs, ", ".join(
            " ".join(str(s) for s in arg) for arg in self.lhs_args))
        if not self.rhs:
            return "%s -> eps" % lhs
        rhs = " ".join("%s(%s)" % (nt, ", ".join(tup)) for nt, tup in self.rhs)
        return "%s -> %s" % (lhs, rhs)


def make_rule(lhs: str, lhs_args, rhs=(), weight: float = 1.0) -> LcfrsRule:
    """Build a rule from a probability; zero-probability rules are invalid."""
    if not 0.0 < weight <= 1.0:
        raise GrammarError("rule probability must be in (0, 1], got %r" % weight)
    args = tuple(tuple(arg) for arg in lhs_args)
    rhs = tuple((nt, tuple(tup)) for nt, tup in rhs)
    return LcfrsRule(lhs, args, rhs, -math.log(weight), weight)


class Plcfrs:
    """A (probabilistic) LCFRS with fan-outs and a start symbol.

    The grammar is unweighted when every rule has probability 1; otherwise
    the rule probabilities of each LHS nonterminal must sum to 1.
    Immutable after construction.
    """

    __slots__ = ("dims", "rules", "start", "terminals", "_by_lhs",
                 "__weakref__")

    def __init__(self, dims: dict, rules: Iterable[LcfrsRule], start: str,
                 weight_tol: float = WEIGHT_TOL):
        self.dims = dict(dims)
        self.rules = tuple(rules)
        self.start = start
        self.terminals = frozenset(
            t for r in self.rules for t in r.lhs_terminals())
        self._by_lhs = {}
        for r in self.rules:
            self._by_lhs.setdefault(r.lhs, []).append(r)
        self._validate(weight_tol)

    def _validate(self, weight_tol):
        if self.start not in self.dims:
            raise GrammarError("unknown start symbol %r" % self.start)
        if self.dims[self.start] != 1:
            raise GrammarError("the start symbol must have fan-out 1")
        for nt, d in self.dims.items():
            if d < 1:
                raise GrammarError("nonterminal %r has fan-out %d" % (nt, d))
        for r in self.rules:
            if r.lhs not in self.dims:
                raise GrammarError("rule LHS %r is not a nonterminal" % r.lhs)
            if len(r.lhs_args) != self.dims[r.lhs]:
                raise GrammarError(
                    "rule %s: %d LHS arguments for fan-out %d nonterminal"
                    % (r, len(r.lhs_args), self.dims[r.lhs]))
            for nt, tup in r.rhs:
                if nt not in self.dims:
                    raise GrammarError("rule %s: unknown RHS nonterminal %r"
                                       % (r, nt))
                if len(tup) != self.dims[nt]:
                    raise GrammarError(
                        "rule %s: RHS %s takes %d variables, has %d"
                        % (r, nt, self.dims[nt], len(tup)))
            lvars, rvars = r.lhs_variables(), r.rhs_variables()
            if (len(set(lvars)) != len(lvars) or len(set(rvars)) != len(rvars)
                    or set(lvars) != set(rvars)):
                raise GrammarError(
                    "rule %s: each variable must occur exactly once on each side"
                    % (r,))
        if self.is_probabilistic():
            for lhs, rules in self._by_lhs.items():
                total = sum(r.probability for r in rules)
                if abs(total - 1.0) > weight_tol:
                    raise GrammarError(
                        "probabilities of %s-rules sum to %.12g, not 1" % (lhs, total))

    def is_probabilistic(self) -> bool:
        return any(r.cost != 0.0 for r in self.rules)

    def dim(self, nt: Optional[str] = None) -> int:
        if nt is None:
            return max(self.dims.values(), default=1)
        return self.dims[nt]

    def rules_for(self, lhs: str):
        return tuple(self._by_lhs.get(lhs, ()))

    def preterminals(self) -> frozenset:
        """Nonterminals with a one-terminal, fan-out-1 terminating rule."""
        return frozenset(
            r.lhs for r in self.rules
            if r.is_terminating() and len(r.lhs_args) == 1
            and len(r.lhs_args[0]) == 1 and r.lhs_args[0][0].terminal)

    def __repr__(self):
        return "Plcfrs(start=%r, %d rules)" % (self.start, len(self.rules))


# -- property suite ----------------------------------------------------------


class PropertyReport(NamedTuple):
    """The chart-relevant grammar properties, with per-flag offenders."""

    binary: bool
    terminal_restricted: bool
    gap_explicit: bool
    ordered: bool
    epsilon_free: bool
    offenders: dict

    def all_ok(self):
        return (self.binary and self.terminal_restricted and self.gap_explicit
                and self.ordered and self.epsilon_free)


def _rule_ordered(rule: LcfrsRule) -> bool:
    flat = rule.lhs_variables()
    pos = {v: i for i, v in enumerate(flat)}
    for _, tup in rule.rhs:
        if list(tup) != sorted(tup, key=pos.get):
            return False
    return True


def _gap_offending_runs(rule: LcfrsRule, k: int):
    """Maximal runs of >= 2 adjacent LHS variables that are consecutive
    components of RHS element k; runs are (l, r) 1-based tuple positions."""
    _, tup = rule.rhs[k]
    pos = {v: i + 1 for i, v in enumerate(tup)}
    runs = []
    for arg in rule.lhs_args:
        run_start = None
        prev = None
        for sym in arg + (Sym(True, ""),):  # sentinel flushes the last run
            p = pos.get(sym.value) if not sym.terminal else None
            if p is not None and prev is not None and p == prev + 1:
                if run_start is None:
                    run_start = prev
            else:
                if run_start is not None:
                    runs.append((run_start, prev))
                    run_start = None
            prev = p
    return runs


def validate(g: Plcfrs) -> PropertyReport:
    """Check the five chart-parser property flags independently."""
    offenders = {"binary": [], "terminal_restricted": [], "gap_explicit": [],
                 "ordered": [], "epsilon_free": []}
    for r in g.rules:
        if r.rank > 2:
            offenders["binary"].append(r)
        if not r.is_terminating() and r.lhs_terminals():
            offenders["terminal_restricted"].append(r)
        if any(_gap_offending_runs(r, k) for k in range(r.rank)):
            offenders["gap_explicit"].append(r)
        if not _rule_ordered(r):
            offenders["ordered"].append(r)
        if any(not arg for arg in r.lhs_args):
            offenders["epsilon_free"].append(r)
    eps = offenders["epsilon_free"]
    if len(eps) == 1:
        # the single permitted S(eps) -> eps rule for the empty word
        r = eps[0]
        if (r.lhs == g.start and r.is_terminating()
                and not any(g.start == nt for rr in g.rules for nt, _ in rr.rhs)):
            eps = []
    return PropertyReport(
        not offenders["binary"], not offenders["terminal_restricted"],
        not offenders["gap_explicit"], not offenders["ordered"], not eps,
        offenders)


# -- normalizations ----------------------------------------------------------


def _fresh_variable(used, hint="Z"):
    i = 1
    while "%s%d" % (hint, i) in used:
        i += 1
    return "%s%d" % (hint, i)


def make_gap_explicit(g: Plcfrs) -> Plcfrs:
    """Remove useless variable separation (requires an ordered grammar).

    Adjacent LHS variables belonging to consecutive components of one RHS
    element carry no gap information; they are merged into a single fresh
    variable and the component split is postponed to new nonterminals
    ``A^{l-r,...}`` whose rules are copies of the A-rules with the marked
    components concatenated.  Useless productions are pruned afterwards.
    """
    if not validate(g).ordered:
        raise NotOrdered("gap-explicitness transformation needs an ordered grammar")
    dims = dict(g.dims)
    rules = list(g.rules)
    merged_name = {}

    def name_for(nt, runs):
        key = (nt, tuple(runs))
        if key in merged_name:
            return merged_name[key]
        name = "%s^{%s}" % (nt, ",".join("%d-%d" % run for run in runs))
        if name in dims:
            raise NameCollision("fresh nonterminal %r already exists" % name)
        merged_name[key] = name
        return name

    def merge_args(args, runs):
        out = list(args)
        for l, r in sorted(runs, reverse=True):
            out[l - 1:r] = [tuple(s for part in args[l - 1:r] for s in part)]
        return tuple(out)

    changed = True
    while changed:
        changed = False
        for ridx, rule in enumerate(rules):
            for k in range(rule.rank):
                runs = _gap_offending_runs(rule, k)
                if not runs:
                    continue
                nt, tup = rule.rhs[k]
                new_nt = name_for(nt, runs)
                if new_nt not in dims:
                    dims[new_nt] = dims[nt] - sum(r - l for l, r in runs)
                    for other in list(rules):
                        if other.lhs == nt:
                            rules.append(LcfrsRule(
                                new_nt, merge_args(other.lhs_args, runs),
                                other.rhs, other.cost, other.prob))
                # replace each run by one fresh variable on both sides
                used = set(rule.lhs_variables())
                subst = {}
                new_tup = list(tup)
                for l, r in sorted(runs, reverse=True):
                    fresh = _fresh_variable(used)
                    used.add(fresh)
                    subst[tup[l - 1]] = fresh
                    for dead in tup[l:r]:
                        subst[dead] = None
                    new_tup[l - 1:r] = [fresh]
                new_args = []
                for arg in rule.lhs_args:
                    out = []
                    for sym in arg:
                        if sym.terminal or sym.value not in subst:
                            out.append(sym)
                        elif subst[sym.value] is not None:
                            out.append(V(subst[sym.value]))
                        # merged-away variables disappear
                    new_args.append(tuple(out))
                new_rhs = list(rule.rhs)
                new_rhs[k] = (new_nt, tuple(new_tup))
                rules[ridx] = LcfrsRule(rule.lhs, tuple(new_args),
                                        tuple(new_rhs), rule.cost, rule.prob)
                changed = True
                break
            if changed:
                break
    return prune_useless(Plcfrs(dims, rules, g.start)).grammar


def isolate_terminals(g: Plcfrs) -> Plcfrs:
    """Move terminals out of non-terminating rules into fresh preterminals.

    Each terminal occurrence ``t`` in a non-terminating rule becomes a fresh
    variable consumed by a new RHS element ``PT_t`` with the terminating
    rule ``PT_t(t) -> eps``.  The string language is unchanged.
    """
    dims = dict(g.dims)
    rules = []
    needed = {}
    for rule in g.rules:
        if rule.is_terminating() or not rule.lhs_terminals():
            rules.append(rule)
            continue
        used = set(rule.lhs_variables())
        new_args, extra = [], []
        for arg in rule.lhs_args:
            out = []
            for sym in arg:
                if not sym.terminal:
                    out.append(sym)
                    continue
                pt = "PT_%s" % sym.value
                if pt in g.dims:
                    raise NameCollision(
                        "preterminal name %r collides with an existing nonterminal" % pt)
                if pt not in dims:
                    dims[pt] = 1
                    needed[pt] = sym.value
                fresh = _fresh_variable(used, hint="Y")
                used.add(fresh)
                out.append(V(fresh))
                extra.append((pt, (fresh,)))
            new_args.append(tuple(out))
        rules.append(LcfrsRule(rule.lhs, tuple(new_args),
                               rule.rhs + tuple(extra), rule.cost, rule.prob))
    for pt, t in needed.items():
        rules.append(make_rule(pt, [(T(t),)]))
    return Plcfrs(dims, rules, g.start)


class PruneOutcome(NamedTuple):
    grammar: Plcfrs
    empty_language: bool


def prune_useless(g: Plcfrs) -> PruneOutcome:
    """Drop unproductive and unreachable rules; renormalize weights per LHS.

    When the start symbol itself is unproductive the language is empty; this
    is reported in the outcome rather than raised, and the returned grammar
    has no rules.
    """
    productive = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in productive and all(nt in productive for nt, _ in r.rhs):
                productive.add(r.lhs)
                changed = True
    reachable = {g.start}
    agenda = [g.start]
    while agenda:
        nt = agenda.pop()
        for r in g.rules_for(nt):
            if all(x in productive for x, _ in r.rhs):
                for x, _ in r.rhs:
                    if x not in reachable:
                        reachable.add(x)
                        agenda.append(x)
    useful = reachable & productive
    kept = [r for r in g.rules
            if r.lhs in useful and all(nt in useful for nt, _ in r.rhs)]
    if g.is_probabilistic():
        totals = {}
        for r in kept:
            totals[r.lhs] = totals.get(r.lhs, 0.0) + r.probability
        kept = [LcfrsRule(r.lhs, r.lhs_args, r.rhs,
                          r.cost + math.log(totals[r.lhs]),
                          r.prob / totals[r.lhs]) for r in kept]
    dims = {nt: d for nt, d in g.dims.items() if nt in useful or nt == g.start}
    return PruneOutcome(Plcfrs(dims, kept, g.start),
                        g.start not in productive)


# -- treebank extraction -----------------------------------------------------


def _blocks(indices):
    """Maximal contiguous runs of an index set, in surface order."""
    out = []
    for i in sorted(indices):
        if out and out[-1][-1] == i - 1:
            out[-1].append(i)
        else:
            out.append([i])
    return out


def _node_rule(tree: RangeLabelledTree, v: int):
    """Read the LCFRS rule off an internal (non-preterminal) node."""
    kids = sorted(tree.children(v), key=tree.min_index)
    var_at = {}   # start index of a child block -> (child slot, block no)
    counts = []
    for slot, c in enumerate(kids):
        if tree.is_leaf(c):
            raise MissingPreterminal(
                "leaf %d under %r is not dominated by a unary POS node"
                % (tree.leaf_index(c), tree.label(v)))
        blocks = _blocks(tree.indices(c))
        counts.append(len(blocks))
        for b, block in enumerate(blocks):
            var_at[block[0]] = (slot, b)
    names = {}
    args = []
    for block in _blocks(tree.indices(v)):
        arg = []
        i = block[0]
        while i <= block[-1]:
            slot, b = var_at[i]
            names[(slot, b)] = "X%d" % (len(names) + 1)
            arg.append(V(names[(slot, b)]))
            child = kids[slot]
            i = _blocks(tree.indices(child))[b][-1] + 1
        args.append(tuple(arg))
    rhs = tuple((tree.label(kids[slot]),
                 tuple(names[(slot, b)] for b in range(counts[slot])))
                for slot in range(len(kids)))
    return LcfrsRule(tree.label(v), tuple(args), rhs, 0.0, 1.0)


def extract_plcfrs(treebank: Sequence[RangeLabelledTree],
                   start: str = None) -> Plcfrs:
    """Read a PLCFRS off a treebank with relative-frequency weights.

    Trees must carry tokens and every leaf must sit under a unary POS
    node, which becomes a terminating rule ``POS(token) -> eps``.  Weights
    are relative frequencies among rules sharing an LHS nonterminal.
    Unary chains above the POS layer come out as unary rules; collapse
    them first when a round-trip through the set encoding is needed.
    """
    counts = {}
    dims = {}
    roots = set()
    for tree in treebank:
        if tree.tokens is None:
            raise MissingPreterminal("treebank trees must carry tokens")
        roots.add(tree.label(tree.root))
        for v in tree.internal_nodes():
            if tree.is_preterminal(v):
                token = tree.token_at(tree.leaf_index(tree.children(v)[0]))
                rule = LcfrsRule(tree.label(v), ((T(token),),), (), 0.0, 1.0)
            else:
                rule = _node_rule(tree, v)
            key = (rule.lhs, rule.lhs_args, rule.rhs)
            counts[key] = counts.get(key, 0) + 1
            dims.setdefault(rule.lhs, len(rule.lhs_args))
            if dims[rule.lhs] != len(rule.lhs_args):
                raise GrammarError("nonterminal %r used with fan-outs %d and %d"
                                   % (rule.lhs, dims[rule.lhs], len(rule.lhs_args)))
    if start is None:
        if len(roots) != 1:
            raise GrammarError("treebank has root labels %s; pass start="
                               % sorted(roots))
        start = roots.pop()
    totals = {}
    for (lhs, _, _), c in counts.items():
        totals[lhs] = totals.get(lhs, 0) + c
    rules = [make_rule(lhs, args, rhs, weight=c / totals[lhs])
             for (lhs, args, rhs), c in counts.items()]
    return Plcfrs(dims, rules, start)


# -- rule instances ----------------------------------------------------------


class RuleInstance(NamedTuple):
    rule: LcfrsRule
    lhs: tuple  # tuple of Range
    rhs: tuple  # tuple of tuples of Range

    def __str__(self):
        fmt = lambda ranges: ", ".join("<%d:%d>" % r for r in ranges)
        out = "%s(%s)" % (self.rule.lhs, fmt(self.lhs))
        if self.rhs:
            out += " -> " + " ".join(
                "%s(%s)" % (nt, fmt(rng))
                for (nt, _), rng in zip(self.rule.rhs, self.rhs))
        return out


def _arg_assignments(arg, word, n):
    """All contiguous range-string assignments for one LHS argument.

    Yields (range, {var: range}) pairs.  Terminals must match the word;
    variables may take any (possibly empty) range; an empty argument takes
    any empty range.
    """
    if not arg:
        for a in range(n + 1):
            yield Range(a, a), {}
        return

    def extend(pos, a, env):
        if pos == len(arg):
            yield a, env
            return
        sym = arg[pos]
        if sym.terminal:
            if a < n and word[a] == sym.value:
                yield from extend(pos + 1, a + 1, env)
        else:
            for b in range(a, n + 1):
                env2 = dict(env)
                env2[sym.value] = Range(a, b)
                yield from extend(pos + 1, b, env2)

    for start in range(n + 1):
        for end, env in extend(0, start, {}):
            yield Range(start, end), env


def enumerate_instances(rule: LcfrsRule, word: Sequence[str],
                        max_instances: int = 100000):
    """All instances of a rule against a word, per the range semantics.

    Ranges of separate components may overlap; each component must be a
    contiguous concatenation.  Raises CapExceeded beyond `max_instances`.
    """
    n = len(word)
    out = []
    per_arg = [list(_arg_assignments(arg, word, n)) for arg in rule.lhs_args]
    for combo in itertools.product(*per_arg):
        env = {}
        for _, e in combo:
            env.update(e)
        lhs = tuple(rng for rng, _ in combo)
        rhs = tuple(tuple(env[v] for v in tup) for _, tup in rule.rhs)
        out.append(RuleInstance(rule, lhs, rhs))
        if len(out) > max_instances:
            raise CapExceeded("more than %d instances of %s"
                              % (max_instances, rule))
    return out


# -- brute-force string language ---------------------------------------------


def _yields(g: Plcfrs, max_len: int):
    """Fixed point of per-nonterminal yield tuples with best costs.

    Yield tuples are tuples of token tuples; only tuples whose component
    lengths sum to at most `max_len` are computed.
    """
    best = {nt: {} for nt in g.dims}

    def offer(nt, tup, cost):
        old = best[nt].get(tup)
        if old is None or cost < old:
            best[nt][tup] = cost
            return True
        return False

    changed = True
    rounds = 0
    while changed:
        changed = False
        rounds += 1
        if rounds > 10000:
            raise GrammarError("yield computation did not converge")
        for rule in g.rules:
            if rule.is_terminating():
                tup = tuple(tuple(s.value for s in arg) for arg in rule.lhs_args)
                if sum(len(c) for c in tup) <= max_len:
                    changed |= offer(rule.lhs, tup, rule.cost)
                continue
            pools = [best[nt] for nt, _ in rule.rhs]
            if not all(pools):
                continue
            for combo in itertools.product(*(p.items() for p in pools)):
                env = {}
                for (_, tup), (alpha, _) in zip(rule.rhs, combo):
                    for var, component in zip(tup, alpha):
                        env[var] = component
                total = 0
                tup_out = []
                for arg in rule.lhs_args:
                    component = []
                    for sym in arg:
                        if sym.terminal:
                            component.append(sym.value)
                        else:
                            component.extend(env[sym.value])
                    total += len(component)
                    tup_out.append(tuple(component))
                if total > max_len:
                    continue
                cost = rule.cost + sum(c for _, c in combo)
                changed |= offer(rule.lhs, tuple(tup_out), cost)
    return best


def generate_strings(g: Plcfrs, max_len: int, with_weights: bool = False):
    """The string language of g up to length `max_len`, by fixed point.

    Returns a frozenset of token tuples, or a dict mapping each string to
    its best (lowest) total cost when `with_weights` is set.  Costs sum
    ``|log q|`` over every rule application including terminating rules.
    """
    if max_len < 0:
        raise GrammarError("max_len must be >= 0")
    table = _yields(g, max_len)[g.start]
    strings = {tup[0]: cost for tup, cost in table.items() if len(tup) == 1}
    if with_weights:
        return strings
    return frozenset(strings)
