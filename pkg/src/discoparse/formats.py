"""Line-oriented text formats for trees and grammars.

Trees, one per line::

    (S (VP (VP 1=Darüber 3=nachgedacht) 4=werden) 2=muß)

A child is either a bracketed subtree or ``INDEX=TOKEN`` with 1-based
indices; labels and tokens contain no whitespace or parentheses (PTB
escapes like ``-LRB-`` are ordinary tokens).  Blank lines and lines
starting with ``#`` are ignored.  A node whose single child is a leaf is,
by convention, the POS node of that token.

Grammars, one rule per line::

    0.9<TAB>S(X Y Z) -> A(X, Z) B(Y)
    1<TAB>B('a') -> eps

Components are comma-separated, symbols within a component
space-separated, terminals single-quoted, variables match
``[A-Z][A-Z0-9]*``; an empty RHS is written ``eps``.  The start symbol is
the LHS of the first rule.  Weights are probabilities in (0, 1]; unless
every weight is 1 they must sum to 1 per LHS nonterminal.
"""

import re

from .grammar import GrammarError, Plcfrs, T, V, make_rule
from .tree import (BINARIZE_MARKER, UNARY_JOINER, RangeLabelledTree,
                   TreeError)

VARIABLE_RE = re.compile(r"[A-Z][A-Z0-9]*$")


class ParseError(Exception):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = " (line %d%s)" % (line, "" if column is None
                                      else ", column %d" % column)
        super().__init__(message + where)


class WeightSumViolation(ParseError):
    pass


class DuplicateVariable(ParseError):
    pass


# -- trees --------------------------------------------------------------------


def _tree_tokens(text, lineno):
    for m in re.finditer(r"[()]|[^\s()]+", text):
        yield m.group(), m.start() + 1
    yield None, len(text) + 1


def _parse_tree_line(text, lineno):
    stream = _tree_tokens(text, lineno)
    tok, col = next(stream)

    def fail(msg, column):
        raise ParseError(msg, lineno, column)

    def node():
        nonlocal tok, col
        if tok != "(":
            fail("expected '('", col)
        tok, col = next(stream)
        if tok in ("(", ")", None):
            fail("expected a node label", col)
        label = tok
        if UNARY_JOINER in label or BINARIZE_MARKER in label:
            fail("label %r uses a reserved character (%r or %r)"
                 % (label, UNARY_JOINER, BINARIZE_MARKER), col)
        tok, col = next(stream)
        children = []
        while tok != ")":
            if tok is None:
                fail("unbalanced parentheses", col)
            if tok == "(":
                children.append(node())  # leaves tok just past the ')'
            else:
                m = re.match(r"(\d+)=(.+)$", tok)
                if not m:
                    fail("expected INDEX=TOKEN, got %r" % tok, col)
                index = int(m.group(1))
                if index < 1:
                    fail("leaf indices are 1-based", col)
                children.append((index, m.group(2)))
                tok, col = next(stream)
        tok, col = next(stream)
        if not children:
            fail("empty constituent", col)
        return (label, children)

    spec = node()
    if tok is not None:
        fail("trailing material after the tree", col)
    return spec


def read_trees(text):
    """Parse a treebank; every tree carries its surface tokens."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        spec = _parse_tree_line(line, lineno)
        tokens = {}

        def strip(node):
            if isinstance(node, tuple) and isinstance(node[0], int):
                index, token = node
                tokens[index] = token
                return index
            label, children = node
            return (label, [strip(c) for c in children])

        bare = strip(spec)
        covered = len(tokens) == max(tokens, default=0)
        try:
            tree = RangeLabelledTree.build(
                bare,
                tokens=[tokens[i] for i in sorted(tokens)] if covered else None)
        except TreeError as exc:
            raise type(exc)("%s (line %d)" % (exc, lineno))
        out.append(tree)
    return out


def write_tree(tree: RangeLabelledTree) -> str:
    """One-line canonical rendering (children in leftmost-index order)."""
    if tree.tokens is None:
        raise TreeError("tree carries no tokens; attach them before writing")
    for token in tree.tokens:
        if not token or any(ch in token for ch in " \t()"):
            raise TreeError("token %r cannot be written in the line format"
                            % token)

    def render(v):
        if tree.is_leaf(v):
            i = tree.leaf_index(v)
            return "%d=%s" % (i, tree.tokens[i - 1])
        kids = sorted(tree.children(v), key=tree.min_index)
        return "(%s %s)" % (tree.label(v), " ".join(render(c) for c in kids))

    return render(tree.root)


def write_trees(trees) -> str:
    return "".join(write_tree(t) + "\n" for t in trees)


# -- grammars -----------------------------------------------------------------


def _parse_component(text, lineno):
    syms = []
    for part in text.split():
        if part.startswith("'") and part.endswith("'") and len(part) >= 3:
            syms.append(T(part[1:-1]))
        elif VARIABLE_RE.match(part):
            syms.append(V(part))
        else:
            raise ParseError("expected 'terminal' or VARIABLE, got %r" % part,
                             lineno)
    return tuple(syms)


_CALL_RE = re.compile(r"([^\s(]+)\(([^()]*)\)")


def _parse_call(text, lineno):
    m = _CALL_RE.fullmatch(text.strip())
    if not m:
        raise ParseError("expected NT(...), got %r" % text.strip(), lineno)
    return m.group(1), [c.strip() for c in m.group(2).split(",")]


def read_grammar(text) -> Plcfrs:
    """Parse the tab-separated rule format into a grammar."""
    rules = []
    dims = {}
    start = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip()
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            raise ParseError("expected WEIGHT<TAB>RULE", lineno)
        weight_text, rule_text = line.split("\t", 1)
        try:
            weight = float(weight_text)
        except ValueError:
            raise ParseError("bad weight %r" % weight_text, lineno)
        if not 0.0 < weight <= 1.0:
            raise ParseError("weight %r outside (0, 1]" % weight_text, lineno)
        if "->" not in rule_text:
            raise ParseError("missing '->'", lineno)
        lhs_text, rhs_text = rule_text.split("->", 1)
        lhs, comp_texts = _parse_call(lhs_text, lineno)
        lhs_args = tuple(_parse_component(c, lineno) for c in comp_texts)
        rhs = []
        rhs_text = rhs_text.strip()
        if rhs_text != "eps":
            for call in re.findall(r"[^\s(]+\([^()]*\)", rhs_text):
                name, comps = _parse_call(call, lineno)
                variables = []
                for c in comps:
                    parts = c.split()
                    if len(parts) != 1 or not VARIABLE_RE.match(parts[0]):
                        raise ParseError(
                            "RHS components must be single variables, got %r"
                            % c, lineno)
                    variables.append(parts[0])
                rhs.append((name, tuple(variables)))
            if not rhs:
                raise ParseError("empty RHS must be written 'eps'", lineno)
        lvars = [s.value for arg in lhs_args for s in arg if not s.terminal]
        rvars = [v for _, tup in rhs for v in tup]
        if len(set(lvars)) != len(lvars) or len(set(rvars)) != len(rvars):
            raise DuplicateVariable("a variable occurs twice on one side",
                                    lineno)
        rule = make_rule(lhs, lhs_args, rhs, weight)
        rules.append(rule)
        if start is None:
            start = lhs
        if lhs in dims and dims[lhs] != len(lhs_args):
            raise ParseError("nonterminal %r used with fan-outs %d and %d"
                             % (lhs, dims[lhs], len(lhs_args)), lineno)
        dims[lhs] = len(lhs_args)
        for name, variables in rule.rhs:
            if name in dims and dims[name] != len(variables):
                raise ParseError("nonterminal %r used with fan-outs %d and %d"
                                 % (name, dims[name], len(variables)), lineno)
            dims.setdefault(name, len(variables))
    if not rules:
        raise ParseError("no rules in grammar text")
    if any(r.prob != 1.0 for r in rules):
        totals = {}
        for r in rules:
            totals[r.lhs] = totals.get(r.lhs, 0.0) + r.prob
        for lhs, total in totals.items():
            if abs(total - 1.0) > 1e-6:
                raise WeightSumViolation(
                    "probabilities of %s-rules sum to %.9g, not 1" % (lhs, total))
    try:
        return Plcfrs(dims, rules, start, weight_tol=1e-6)
    except GrammarError as exc:
        raise ParseError(str(exc))


def _format_weight(prob: float) -> str:
    if prob == 1.0:
        return "1"
    return repr(prob)


def write_grammar(g: Plcfrs) -> str:
    """Canonical rendering: start-symbol rules first, then sorted."""

    def render(rule):
        lhs = "%s(%s)" % (rule.lhs, ", ".join(
            " ".join(str(s) for s in arg) for arg in rule.lhs_args))
        rhs = " ".join("%s(%s)" % (nt, ", ".join(tup)) for nt, tup in rule.rhs)
        return "%s\t%s -> %s" % (_format_weight(rule.prob), lhs, rhs or "eps")

    lines = sorted(render(r) for r in g.rules if r.lhs == g.start)
    lines.extend(sorted(render(r) for r in g.rules if r.lhs != g.start))
    return "".join(line + "\n" for line in lines)
