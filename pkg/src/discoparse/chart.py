"""Weighted deductive CYK parsing for PLCFRS.

Items are pairs of a nonterminal and a tuple of pairwise non-overlapping
ranges.  An agenda keyed by weight (lower is better, with decrease-key on
duplicates) drives the deduction; because weights never decrease along a
deduction, the first goal item popped is the best one, and the chart plus
backpointers reconstruct the corresponding tree.

Axioms come from the POS tags of the input (weight 0) plus the instances
of terminating rules that are not plain POS rules; tokens left untagged
also admit axioms from matching POS rules, so raw strings can be
recognized against grammars that carry their own lexical rules.

Composition does not enumerate rule instances blindly: chart items are
indexed by (nonterminal, component, boundary position) and partners are
fetched through the adjacency constraints of the rule template, which
yields exactly the instances the definitional enumeration would.  The
deduction generalizes binary composition to rules of any rank, so
non-binary grammars (e.g. the output of terminal isolation) parse as
well; binariness remains a reported diagnostic rather than a hard
precondition.  Grammars must be epsilon-free and terminal-restricted, and
the fan-out is capped (the chart has 1 + 2*dim(G) dimensions).
"""

import heapq
from itertools import product
from typing import NamedTuple, Optional, Sequence, Union
from weakref import WeakKeyDictionary

from .grammar import Plcfrs, validate
from .tree import RangeLabelledTree

DEFAULT_MAX_DIM = 4

_ENGINES = WeakKeyDictionary()


class ChartError(Exception):
    pass


class GrammarPropertyViolation(ChartError):
    pass


class DimensionExceeded(ChartError):
    pass


class UnknownTag(ChartError):
    pass


class ParseResult(NamedTuple):
    tree: RangeLabelledTree
    weight: float


class ChartResult(NamedTuple):
    result: Optional[ParseResult]
    items: frozenset  # all charted (nt, ranges) pairs when the loop stopped
    weights: dict     # charted item -> weight


def _normalize_input(tagged):
    tokens, tags = [], []
    for entry in tagged:
        if isinstance(entry, str):
            tokens.append(entry)
            tags.append(None)
        else:
            token, tag = entry
            tokens.append(token)
            tags.append(tag)
    return tokens, tags


class _Template(NamedTuple):
    """A non-terminating rule compiled for positional composition."""

    rule: object
    rhs_nts: tuple   # nonterminal per RHS element
    args: tuple      # per LHS component: tuple of (element, component) refs
    plans: tuple     # plans[slot][e]: partner lookup plan or None (see below)


class _Engine:
    """Precompiled deduction tables for one grammar."""

    def __init__(self, g: Plcfrs, max_dim: int):
        report = validate(g)
        problems = []
        if not report.epsilon_free:
            problems.append("epsilon-free")
        if not report.terminal_restricted:
            problems.append("terminal-restricted")
        if problems:
            raise GrammarPropertyViolation(
                "grammar violates required propert%s: %s"
                % ("y" if len(problems) == 1 else "ies", ", ".join(problems)))
        if g.dim() > max_dim:
            raise DimensionExceeded(
                "grammar fan-out %d exceeds the cap %d; raise max_dim to "
                "accept chart dimensionality %d"
                % (g.dim(), max_dim, 1 + 2 * g.dim()))
        self.grammar = g
        self.ordered = report.ordered
        self.unary = {}        # rhs nt -> [rule]
        self.nary = {}         # rhs nt -> [(template, slot)]
        self.lexical = {}      # token -> [(nt, rule)] for plain POS rules
        self.exotic = []       # (rule, component token tuples)
        for rule in g.rules:
            if rule.is_terminating():
                if len(rule.lhs_args) == 1 and len(rule.lhs_args[0]) == 1:
                    token = rule.lhs_args[0][0].value
                    self.lexical.setdefault(token, []).append((rule.lhs, rule))
                else:
                    words = tuple(tuple(s.value for s in arg)
                                  for arg in rule.lhs_args)
                    self.exotic.append((rule, words))
            elif rule.rank == 1 and self._is_pure_unary(rule):
                self.unary.setdefault(rule.rhs[0][0], []).append(rule)
            else:
                template = self._compile(rule)
                for slot in range(rule.rank):
                    self.nary.setdefault(rule.rhs[slot][0], []).append(
                        (template, slot))
        self.preterminals = g.preterminals()

    @staticmethod
    def _is_pure_unary(rule):
        """Rank-1 rules of the A(a) -> B(a) form copy the range tuple;
        other rank-1 rules (concatenating variables) need composition."""
        return (all(len(arg) == 1 and not arg[0].terminal
                    for arg in rule.lhs_args)
                and tuple(arg[0].value for arg in rule.lhs_args)
                == rule.rhs[0][1])

    @staticmethod
    def _compile(rule):
        home = {}
        for e, (_, tup) in enumerate(rule.rhs):
            for k, var in enumerate(tup):
                home[var] = (e, k)
        args = tuple(tuple(home[s.value] for s in arg) for arg in rule.lhs_args)
        # partner lookup plans: when element e's component k is forced to
        # start (or end) at a boundary of the popped slot's ranges, partners
        # can be fetched from the boundary index instead of scanned.
        plans = []
        for slot in range(rule.rank):
            per_elem = {}
            for arg in args:
                for (e1, k1), (e2, k2) in zip(arg, arg[1:]):
                    # range(e2,k2) starts where range(e1,k1) ends
                    if e1 == slot and e2 != slot and e2 not in per_elem:
                        per_elem[e2] = (k2, False, k1, True)
                    if e2 == slot and e1 != slot and e1 not in per_elem:
                        per_elem[e1] = (k1, True, k2, False)
            plans.append(tuple(per_elem.get(e) for e in range(rule.rank)))
        return _Template(rule, tuple(nt for nt, _ in rule.rhs), args,
                         tuple(plans))

    def compose(self, template, tuples):
        """LHS ranges for a rule instance, or None if no instance exists.

        `tuples` gives one range tuple per RHS element.  Components must
        concatenate contiguously and the results be pairwise
        non-overlapping (in surface order, for ordered grammars, where
        out-of-order items are provably useless).
        """
        comps = []
        for arg in template.args:
            e, k = arg[0]
            lo, hi = tuples[e][k]
            ok = True
            for e2, k2 in arg[1:]:
                a, b = tuples[e2][k2]
                if a != hi:
                    ok = False
                    break
                hi = b
            if not ok:
                return None
            comps.append((lo, hi))
        if self.ordered:
            for k in range(len(comps) - 1):
                if comps[k][1] > comps[k + 1][0]:
                    return None
        else:
            spans = sorted(comps)
            for k in range(len(spans) - 1):
                if spans[k][1] > spans[k + 1][0]:
                    return None
        return tuple(comps)

    def exotic_axioms(self, tokens):
        """Instances of non-POS terminating rules against the tokens."""
        n = len(tokens)
        for rule, words in self.exotic:
            placements = []
            for w in words:
                spots = [(a, a + len(w)) for a in range(n - len(w) + 1)
                         if tuple(tokens[a:a + len(w)]) == w]
                if not spots:
                    placements = None
                    break
                placements.append(spots)
            if placements is None:
                continue
            for combo in product(*placements):
                spans = sorted(combo)
                if any(spans[k][1] > spans[k + 1][0]
                       for k in range(len(spans) - 1)):
                    continue
                if self.ordered and any(
                        combo[k][1] > combo[k + 1][0]
                        for k in range(len(combo) - 1)):
                    continue
                yield rule, tuple(combo)


def _engine_for(g: Plcfrs, max_dim: int) -> _Engine:
    per_grammar = _ENGINES.setdefault(g, {})
    if max_dim not in per_grammar:
        per_grammar[max_dim] = _Engine(g, max_dim)
    return per_grammar[max_dim]


def _run(g: Plcfrs, tagged, max_dim, need_tree):
    engine = _engine_for(g, max_dim)
    tokens, tags = _normalize_input(tagged)
    n = len(tokens)
    goal = (g.start, ((0, n),))

    chart = {}        # item -> (weight, backpointer)
    by_nt = {}        # nt -> [(ranges, weight)]
    by_boundary = {}  # (nt, component, is_end, position) -> [(ranges, weight)]
    pending = {}      # item -> weight currently on the agenda
    backptr = {}      # item -> best backpointer seen
    heap = []
    seq = 0

    def push(item, weight, bp):
        nonlocal seq
        if item in chart:
            return
        old = pending.get(item)
        if old is not None and old <= weight:
            return
        pending[item] = weight
        backptr[item] = bp
        seq += 1
        heapq.heappush(heap, (weight, seq, item))

    for i, (token, tag) in enumerate(zip(tokens, tags), start=1):
        if tag is not None:
            if tag not in engine.preterminals:
                raise UnknownTag("tag %r of token %r is not a preterminal "
                                 "of the grammar" % (tag, token))
            push((tag, ((i - 1, i),)), 0.0, ("tag", i, tag))
        else:
            for nt, rule in engine.lexical.get(token, ()):
                push((nt, ((i - 1, i),)), rule.cost, ("tag", i, nt))
    for rule, ranges in engine.exotic_axioms(tokens):
        push((rule.lhs, ranges), rule.cost, ("scan", rule, ranges))

    while heap:
        weight, _, item = heapq.heappop(heap)
        if item in chart or pending.get(item) != weight:
            continue  # stale entry superseded by a decrease-key
        del pending[item]
        chart[item] = (weight, backptr.pop(item))
        if item == goal:
            break
        nt, ranges = item
        entry = (ranges, weight)
        by_nt.setdefault(nt, []).append(entry)
        for k, (lo, hi) in enumerate(ranges):
            by_boundary.setdefault((nt, k, False, lo), []).append(entry)
            by_boundary.setdefault((nt, k, True, hi), []).append(entry)
        for rule in engine.unary.get(nt, ()):
            push((rule.lhs, ranges), weight + rule.cost, ("unary", rule, item))
        for template, slot in engine.nary.get(nt, ()):
            plans = template.plans[slot]
            pools = []
            for e, other_nt in enumerate(template.rhs_nts):
                if e == slot:
                    pools.append((entry,))
                    continue
                plan = plans[e]
                if plan is None:
                    partners = by_nt.get(other_nt)
                else:
                    k, is_end, slot_k, use_hi = plan
                    pos = ranges[slot_k][1] if use_hi else ranges[slot_k][0]
                    partners = by_boundary.get((other_nt, k, is_end, pos))
                if not partners:
                    pools = None
                    break
                pools.append(partners)
            if pools is None:
                continue
            rule = template.rule
            for combo in product(*pools):
                comps = engine.compose(template, [c[0] for c in combo])
                if comps is None:
                    continue
                total = rule.cost + sum(c[1] for c in combo)
                antecedents = tuple(
                    (template.rhs_nts[k], combo[k][0])
                    for k in range(len(template.rhs_nts)))
                push((rule.lhs, comps), total, ("nary", rule, antecedents))

    charted_weights = {item: entry[0] for item, entry in chart.items()}
    if goal not in chart:
        return ChartResult(None, frozenset(chart), charted_weights)
    weight = chart[goal][0]
    if not need_tree:
        return ChartResult(ParseResult(None, weight), frozenset(chart),
                           charted_weights)

    def spec(item):
        bp = chart[item][1]
        kind = bp[0]
        if kind == "tag":
            return (bp[2], [bp[1]])
        if kind == "scan":
            _, rule, ranges = bp
            leaves = [i for lo, hi in ranges for i in range(lo + 1, hi + 1)]
            return (rule.lhs, leaves)
        if kind == "unary":
            return (bp[1].lhs, [spec(bp[2])])
        _, rule, antecedents = bp
        return (rule.lhs, [spec(a) for a in antecedents])

    tree = RangeLabelledTree.build(spec(goal), tokens=tokens,
                                   check_labels=False)
    return ChartResult(ParseResult(tree, weight), frozenset(chart),
                       charted_weights)


def parse_full(g: Plcfrs, tagged: Sequence[Union[str, tuple]],
               max_dim: int = DEFAULT_MAX_DIM) -> ChartResult:
    """Parse and also report the set of charted items (for diagnostics)."""
    return _run(g, tagged, max_dim, need_tree=True)


def parse(g: Plcfrs, tagged: Sequence[Union[str, tuple]],
          max_dim: int = DEFAULT_MAX_DIM) -> Optional[ParseResult]:
    """Best tree and weight for a tagged sentence, or None if no parse.

    The weight is the sum of ``|log q|`` over the applied rules; axioms
    contributed by the given POS tags count 0.
    """
    return _run(g, tagged, max_dim, need_tree=True).result


def recognize(g: Plcfrs, tagged: Sequence[Union[str, tuple]],
              max_dim: int = DEFAULT_MAX_DIM) -> bool:
    """True iff the goal item is derivable for the tagged sentence."""
    return _run(g, tagged, max_dim, need_tree=False).result is not None


def best_weight(g: Plcfrs, tagged, max_dim: int = DEFAULT_MAX_DIM) -> Optional[float]:
    res = _run(g, tagged, max_dim, need_tree=False).result
    return None if res is None else res.weight
