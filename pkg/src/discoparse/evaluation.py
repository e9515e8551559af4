"""Labelled and discontinuous F-score over constituent sets.

A predicted and a gold constituent set are compared by exact (label,
index set) matches.  Conventions follow the usual discontinuous
evaluation setup: punctuation token indices (identified by their POS
tags) can be removed from every constituent, the root-spanning
constituent can be ignored, and scoring can be restricted to
discontinuous constituents only.  Ratios with empty denominators count as
perfect when both sides are empty (configurable), otherwise as zero.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .tree import ConstituentSet, InstantiatedConstituent

PTB_PUNCT_TAGS = frozenset({",", ".", ":", "``", "''", "-LRB-", "-RRB-",
                            "$", "#"})


class LengthMismatch(Exception):
    pass


@dataclass(frozen=True)
class EvalParams:
    punct_tags: frozenset = PTB_PUNCT_TAGS
    ignore_root: bool = False
    disc_only: bool = False
    empty_empty_is_perfect: bool = True


class EvalResult(NamedTuple):
    precision: float
    recall: float
    f1: float
    matched: int
    predicted: int
    gold: int
    exact_match: bool


def _contiguous(indices):
    return len(indices) == max(indices) - min(indices) + 1


def filter_constituents(kset: ConstituentSet, params: EvalParams,
                        tags: Optional[Sequence[str]] = None) -> frozenset:
    """Apply the evaluation conventions to one constituent set."""
    punct = frozenset()
    if tags is not None and params.punct_tags:
        punct = frozenset(i for i, tag in enumerate(tags, start=1)
                          if tag in params.punct_tags)
    members = set()
    for m in kset.members:
        indices = m.indices - punct
        if indices:
            members.add(InstantiatedConstituent(m.label, indices))
    if params.ignore_root:
        remaining = frozenset(range(1, kset.n + 1)) - punct
        members = {m for m in members if m.indices != remaining}
    if params.disc_only:
        members = {m for m in members if not _contiguous(m.indices)}
    return frozenset(members)


def _ratio(num, den, params):
    if den == 0:
        return 1.0 if num == 0 and params.empty_empty_is_perfect else 0.0
    return num / den


def _result(matched, predicted, gold, params, exact):
    precision = _ratio(matched, predicted, params)
    recall = _ratio(matched, gold, params)
    if predicted == 0 and gold == 0:
        f1 = 1.0 if params.empty_empty_is_perfect else 0.0
    else:
        f1 = 2 * matched / (predicted + gold)
    return EvalResult(precision, recall, f1, matched, predicted, gold, exact)


def evaluate(golds: Sequence[ConstituentSet], preds: Sequence[ConstituentSet],
             params: EvalParams = EvalParams(),
             tags: Optional[Sequence[Sequence[str]]] = None):
    """Per-sentence results plus the micro-averaged corpus result.

    `tags` optionally gives each sentence's POS sequence, enabling
    punctuation filtering.  Gold and prediction corpora must pair up in
    length and per-sentence token count.
    """
    if len(golds) != len(preds):
        raise LengthMismatch("gold corpus has %d sentences, predictions %d"
                             % (len(golds), len(preds)))
    if tags is not None and len(tags) != len(golds):
        raise LengthMismatch("tag sequences do not pair up with the corpus")
    per_sentence = []
    total_m = total_p = total_g = 0
    for k, (gold, pred) in enumerate(zip(golds, preds)):
        if gold.n != pred.n:
            raise LengthMismatch(
                "sentence %d: gold over %d tokens, prediction over %d"
                % (k, gold.n, pred.n))
        sent_tags = tags[k] if tags is not None else None
        gset = filter_constituents(gold, params, sent_tags)
        pset = filter_constituents(pred, params, sent_tags)
        matched = len(gset & pset)
        per_sentence.append(_result(matched, len(pset), len(gset), params,
                                    gset == pset))
        total_m += matched
        total_p += len(pset)
        total_g += len(gset)
    corpus = _result(total_m, total_p, total_g, params,
                     all(r.exact_match for r in per_sentence))
    return per_sentence, corpus
