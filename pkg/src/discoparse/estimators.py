"""Scikit-learn style estimator facades.

Both parsers follow the fit/predict protocol with ``get_params`` /
``set_params`` inherited from BaseEstimator, so they compose with
scikit-learn tooling (cloning, grid search over their hyperparameters).
X is always a list of tagged sentences (sequences of (token, POS) pairs)
and y a list of trees; ``predict`` returns trees with the POS layer
rebuilt from the input tags.
"""

import re
import warnings

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import chart as _chart
from . import scorer as _scorer
from .evaluation import EvalParams, evaluate
from .grammar import extract_plcfrs
from .tree import (RangeLabelledTree, attach_preterminals, binarize,
                   debinarize, normalize_unaries, strip_preterminals,
                   tree_to_constituents)  # noqa: F401


def check_tagged_sentences(X):
    """Validate and normalize a corpus of (token, POS) sequences."""
    out = []
    for k, sentence in enumerate(X):
        pairs = list(sentence)
        if not pairs:
            raise ValueError("sentence %d is empty" % k)
        for pair in pairs:
            if (len(pair) != 2 or not isinstance(pair[0], str)
                    or not isinstance(pair[1], str)):
                raise ValueError(
                    "sentence %d: expected (token, POS) string pairs, got %r"
                    % (k, pair))
        out.append([tuple(p) for p in pairs])
    return out

def check_trees(y, X=None):
    trees = list(y)
    for k, tree in enumerate(trees):
        if not isinstance(tree, RangeLabelledTree):
            raise ValueError("y[%d] is not a RangeLabelledTree" % k)
        if X is not None and tree.n != len(X[k]):
            raise ValueError("y[%d] spans %d tokens but X[%d] has %d"
                             % (k, tree.n, k, len(X[k])))
    return trees


def _gold_set(tree):
    """Strip the POS layer and collapse unary chains into a gold set."""
    return tree_to_constituents(
        normalize_unaries(strip_preterminals(tree), "collapse"))


def _fanout(tree, v):
    indices = sorted(tree.indices(v))
    return sum(1 for k, i in enumerate(indices)
               if k == 0 or indices[k - 1] != i - 1)


def mark_mixed_fanouts(trees):
    """Disambiguate labels used with several fan-outs across a treebank.

    A label must have a single fan-out within one LCFRS, but treebanks use
    e.g. VP both continuously and discontinuously.  Occurrences of such
    mixed labels get the block count appended (``VP_2``); unambiguous
    labels are left alone.  Returns the rewritten trees and the set of
    marker labels introduced, which `strip_fanout_markers` removes again.
    """
    fanouts = {}
    for tree in trees:
        for v in tree.internal_nodes():
            fanouts.setdefault(tree.label(v), set()).add(_fanout(tree, v))
    mixed = {label for label, seen in fanouts.items() if len(seen) > 1}
    marked = set()

    def rewrite(tree):
        def walk(v):
            if tree.is_leaf(v):
                return tree.leaf_index(v)
            label = tree.label(v)
            if label in mixed:
                label = "%s_%d" % (label, _fanout(tree, v))
                marked.add(label)
            return (label, [walk(c) for c in tree.children(v)])

        return RangeLabelledTree.build(walk(tree.root), tokens=tree.tokens,
                                       check_labels=False)

    return [rewrite(t) for t in trees], marked


def strip_fanout_markers(tree, marked):
    """Undo `mark_mixed_fanouts` on a parse, given the marker label set."""
    pattern = re.compile(r"_\d+$")

    def walk(v):
        if tree.is_leaf(v):
            return tree.leaf_index(v)
        label = tree.label(v)
        if label in marked:
            label = pattern.sub("", label)
        return (label, [walk(c) for c in tree.children(v)])

    return RangeLabelledTree.build(walk(tree.root), tokens=tree.tokens,
                                   check_labels=False)


class ChartParser(BaseEstimator):
    """Treebank-grammar chart parser with a fit/predict interface.

    ``fit`` extracts a PLCFRS from the gold trees (binarizing them first
    by default; unary treebank nodes become unary rules, which the chart
    handles natively); ``predict`` runs the weighted deductive parser on
    tagged sentences and undoes the binarization, returning None where no
    parse exists.
    """

    def __init__(self, binarize_trees=True, max_dim=_chart.DEFAULT_MAX_DIM):
        self.binarize_trees = binarize_trees
        self.max_dim = max_dim

    def fit(self, X, y=None):
        if y is None:
            raise ValueError("ChartParser.fit needs gold trees as y")
        X = check_tagged_sentences(X)
        trees = check_trees(y, X)
        processed = []
        for sentence, tree in zip(X, trees):
            tree = tree.with_tokens([token for token, _ in sentence])
            if self.binarize_trees:
                tree = binarize(tree)
            processed.append(tree)
        processed, self.marked_labels_ = mark_mixed_fanouts(processed)
        self.grammar_ = extract_plcfrs(processed)
        return self

    def predict(self, X):
        if not hasattr(self, "grammar_"):
            raise NotFittedError("ChartParser is not fitted yet")
        X = check_tagged_sentences(X)
        out = []
        for sentence in X:
            try:
                result = _chart.parse(self.grammar_, sentence,
                                      max_dim=self.max_dim)
            except _chart.UnknownTag:
                result = None
            if result is None:
                out.append(None)
                continue
            tree = strip_fanout_markers(result.tree, self.marked_labels_)
            if self.binarize_trees:
                tree = debinarize(tree)
            out.append(tree)
        return out

    def score(self, X, y):
        return _corpus_f1(self.predict(X), X, y)


class TransitionParser(BaseEstimator):
    """Greedy stack-free transition parser with a perceptron scorer.

    ``fit`` trains the averaged perceptron along the static oracle (or
    with dynamic-oracle exploration); ``predict`` parses greedily and
    restores the POS layer from the input tags.
    """

    def __init__(self, mode="static", epochs=10, explore=0.1, seed=42):
        self.mode = mode
        self.epochs = epochs
        self.explore = explore
        self.seed = seed

    def fit(self, X, y):
        X = check_tagged_sentences(X)
        trees = check_trees(y, X)
        corpus = [(sentence, _gold_set(tree))
                  for sentence, tree in zip(X, trees)]
        self.model_ = _scorer.train(corpus, mode=self.mode,
                                    epochs=self.epochs,
                                    explore=self.explore, seed=self.seed)
        return self

    def predict(self, X):
        if not hasattr(self, "model_"):
            raise NotFittedError("TransitionParser is not fitted yet")
        X = check_tagged_sentences(X)
        out = []
        for sentence in X:
            tree = _scorer.greedy_parse(self.model_, sentence)
            tree = attach_preterminals(tree, [tag for _, tag in sentence])
            out.append(tree.with_tokens([token for token, _ in sentence]))
        return out

    def score(self, X, y):
        """Micro-averaged labelled F1 against gold trees."""
        return _corpus_f1(self.predict(X), X, y)


def _corpus_f1(predictions, X, y):
    golds, preds = [], []
    for k, (pred, tree) in enumerate(zip(predictions, check_trees(y))):
        gold = _gold_set(tree)
        if pred is None:
            warnings.warn("sentence %d failed to parse; scoring it empty" % k)
            pred_set = type(gold)(frozenset(), gold.n)
        else:
            pred_set = _gold_set(pred)
        golds.append(gold)
        preds.append(pred_set)
    _, corpus = evaluate(golds, preds, EvalParams())
    return corpus.f1
