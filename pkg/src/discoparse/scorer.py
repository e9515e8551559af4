"""Action scoring for greedy transition parsing with the stack-free system.

Two scorers share one interface (``score_actions(config, sentence)``
returning (action, score) pairs over the legal actions): an oracle-replay
scorer that follows a gold constituent set, for pipeline testing, and an
averaged perceptron over sparse binary features.

Constituent candidates are summarized by four index positions: their left
and right boundary and the boundaries of their gap span, with a NIL marker
for contiguous candidates.  Features are the tokens and POS tags at those
positions, position-wise tag conjunctions between the focus and the
candidate under consideration, the buffer front, and a memory-size
bucket.  Structural and labelling actions use disjoint weight spaces.
Features are interned exactly (no hashing), so training is reproducible
bit for bit given a fixed corpus order and seed.
"""

import random
import warnings
from typing import Iterable, Sequence, Tuple

from . import transitions as tr
from .oracles import (dynamic_oracle, sf_static_action, _parent_table,
                      _require_complete)
from .transitions import Action, SfConfig
from .tree import ConstituentSet, RangeLabelledTree, gap_set

Sentence = Sequence[Tuple[str, str]]  # (token, POS) pairs

STRUCT_SPACE = "STRUCT"
UNK = "<UNK>"
NIL = "<NIL>"


class ScorerError(Exception):
    pass


class IncompleteGold(ScorerError):
    pass


def four_index_summary(candidate) -> tuple:
    """(min, max, gap-min, gap-max) with None marking an empty gap."""
    gap = gap_set(candidate)
    if gap:
        return (min(candidate), max(candidate), min(gap), max(gap))
    return (min(candidate), max(candidate), None, None)


def _atoms(prefix, candidate, sentence, vocab=None):
    out = []
    for name, pos in zip(("min", "max", "gmin", "gmax"),
                         four_index_summary(candidate)):
        if pos is None:
            out.append("%s.%s=%s" % (prefix, name, NIL))
            out.append("%s.%s.t=%s" % (prefix, name, NIL))
        else:
            token, tag = sentence[pos - 1]
            if vocab is not None and token not in vocab:
                token = UNK
            out.append("%s.%s=%s" % (prefix, name, tag))
            out.append("%s.%s.t=%s" % (prefix, name, token))
    return out


def _context_atoms(config: SfConfig, sentence, vocab=None):
    out = []
    if config.i <= len(sentence):
        token, tag = sentence[config.i - 1]
        if vocab is not None and token not in vocab:
            token = UNK
        out.append("b0=%s" % tag)
        out.append("b0.t=%s" % token)
    else:
        out.append("b0=%s" % NIL)
    size = len(config.memory)
    out.append("mem=%s" % (size if size < 5 else "5+"))
    return out


def _conjoin(focus_atoms, cand_atoms):
    ftags = [a for a in focus_atoms if ".t=" not in a]
    ctags = [a for a in cand_atoms if ".t=" not in a]
    return ["%s&%s" % (f, c) for f in ftags for c in ctags]


def extract_features(config: SfConfig, sentence: Sentence, vocab=None) -> dict:
    """Per-candidate feature vectors for one configuration.

    The result maps ``"label"`` to the labelling-step features of the
    focus, and ``("struct", s)`` to the features of pairing the focus with
    each COMBINE candidate s and with the buffer-front singleton (the
    SHIFT candidate).  Deterministic for identical configurations.
    """
    context = _context_atoms(config, sentence, vocab)
    focus_atoms = (_atoms("f", config.focus, sentence, vocab)
                   if config.focus else ["f=%s" % NIL])
    out = {"label": tuple(focus_atoms + context)}
    candidates = [("COMBINE", s) for s in config.memory]
    if config.i < config.j:
        candidates.append(("SHIFT", frozenset((config.i,))))
    for kind, cand in candidates:
        cand_atoms = _atoms("c", cand, sentence, vocab)
        feats = (["kind=%s" % kind] + focus_atoms + cand_atoms
                 + _conjoin(focus_atoms, cand_atoms) + context)
        out[("struct", kind, cand)] = tuple(feats)
    return out


def _action_order_key(labels):
    """Deterministic tie-break: SHIFT < COMBINE by max < NO-LABEL < LABEL."""
    label_id = {x: k for k, x in enumerate(labels)}

    def key(action: Action):
        if action.kind == "SHIFT":
            return (0,)
        if action.kind == "COMBINE":
            return (1, max(action.indices))
        if action.kind == "NO-LABEL":
            return (2,)
        return (3, label_id.get(action.label, len(label_id)))

    return key


class OracleScorer:
    """Scores the static-oracle action 1 and every other legal action 0."""

    def __init__(self, gold: ConstituentSet):
        _require_complete(gold)
        self.gold = gold
        self.labels = tuple(sorted({m.label for m in gold.members}))
        self._parents = _parent_table(gold)

    def score_actions(self, config: SfConfig, sentence: Sentence):
        want = sf_static_action(config, self.gold, self._parents)
        order = _action_order_key(self.labels)
        actions = sorted(tr.legal("sf", config, self.labels), key=order)
        return [(a, 1.0 if a == want else 0.0) for a in actions]


class PerceptronModel:
    """Averaged perceptron with disjoint structural/labelling weights.

    ``weights`` maps (feature, action key) to the averaged weight, where
    the action key is the shared structural space for SHIFT/COMBINE
    (candidates are distinguished by their features) and the labelling
    action name otherwise.  During training the raw weights and the
    running average are kept separately; scoring always uses the average.
    """

    def __init__(self, labels: Iterable[str] = (), vocab=None):
        self.labels = tuple(labels)
        self.vocab = None if vocab is None else frozenset(vocab)
        self.weights = {}       # averaged weights, used for scoring
        self._raw = {}
        self._acc = {}
        self._stamp = {}
        self._ticks = 0

    # -- training internals -------------------------------------------------

    def _tick(self):
        self._ticks += 1

    def _bump(self, key, delta):
        self._acc[key] = (self._acc.get(key, 0.0)
                          + self._raw.get(key, 0.0)
                          * (self._ticks - self._stamp.get(key, 0)))
        self._stamp[key] = self._ticks
        self._raw[key] = self._raw.get(key, 0.0) + delta

    def update(self, good_feats, good_key, bad_feats, bad_key):
        for f in good_feats:
            self._bump((f, good_key), 1.0)
        for f in bad_feats:
            self._bump((f, bad_key), -1.0)

    def finalize(self):
        """Fix the averaged weights after the last update.

        A raw value set at tick t is part of the snapshots t..T inclusive,
        so the closing credit spans one tick more than the in-run credits
        of ``_bump`` (which cover stamp..t-1 just before overwriting).
        """
        total = max(self._ticks, 1)
        self.weights = {}
        for key, raw in self._raw.items():
            acc = (self._acc.get(key, 0.0)
                   + raw * (self._ticks - self._stamp.get(key, 0) + 1))
            avg = acc / total
            if avg != 0.0:
                self.weights[key] = avg
        return self

    # -- scoring -------------------------------------------------------------

    def _score(self, table, feats, key):
        return sum(table.get((f, key), 0.0) for f in feats)

    def _scored_actions(self, config, sentence, table):
        feats = extract_features(config, sentence, self.vocab)
        order = _action_order_key(self.labels)
        actions = sorted(tr.legal("sf", config, self.labels), key=order)
        out = []
        for action in actions:
            if action.kind == "SHIFT":
                fv = feats[("struct", "SHIFT", frozenset((config.i,)))]
                out.append((action, self._score(table, fv, STRUCT_SPACE)))
            elif action.kind == "COMBINE":
                fv = feats[("struct", "COMBINE", action.indices)]
                out.append((action, self._score(table, fv, STRUCT_SPACE)))
            else:
                key = str(action)  # NO-LABEL or LABEL-X
                out.append((action, self._score(table, feats["label"], key)))
        return out

    def score_actions(self, config: SfConfig, sentence: Sentence):
        """(action, score) over legal actions, by averaged weights."""
        return self._scored_actions(config, sentence, self.weights)

    def raw_score_actions(self, config, sentence):
        return self._scored_actions(config, sentence, self._raw)


def _argmax(scored):
    best_action, best_score = scored[0]
    for action, score in scored[1:]:
        if score > best_score:
            best_action, best_score = action, score
    return best_action


def greedy_parse(scorer, sentence: Sentence) -> RangeLabelledTree:
    """Parse by repeatedly applying the best-scored legal action.

    Terminates in exactly 4n-2 actions for any scorer (the legal-action
    guards keep every non-terminal configuration productive) and decodes
    the terminal constituent set into a tree.
    """
    config = tr.init("sf", len(sentence))
    while not tr.is_terminal("sf", config):
        action = _argmax(scorer.score_actions(config, sentence))
        config = tr.apply("sf", config, action)
    return tr.decode("sf", config)


def _feats_for(feats, action, i):
    if action.kind == "SHIFT":
        return feats[("struct", "SHIFT", frozenset((i,)))], STRUCT_SPACE
    if action.kind == "COMBINE":
        return feats[("struct", "COMBINE", action.indices)], STRUCT_SPACE
    return feats["label"], str(action)


def train(corpus: Sequence[Tuple[Sentence, ConstituentSet]],
          mode: str = "static", epochs: int = 10, explore: float = 0.1,
          seed: int = 42) -> PerceptronModel:
    """Train an averaged perceptron on (sentence, gold set) pairs.

    Static mode follows the static-oracle trajectory and updates whenever
    the current raw weights would have chosen differently.  Dynamic mode
    rolls in with epsilon-greedy model actions and updates toward the
    dynamic oracle's deterministic pick at every visited configuration.
    The corpus order is reshuffled each epoch with the seeded RNG.
    """
    if mode not in ("static", "dynamic"):
        raise ScorerError("mode must be 'static' or 'dynamic'")
    if epochs < 1:
        raise ScorerError("epochs must be >= 1")
    if not corpus:
        warnings.warn("training on an empty corpus yields a zero model")
        return PerceptronModel().finalize()
    labels = []
    parents = {}
    for k, (sentence, gold) in enumerate(corpus):
        if len(sentence) != gold.n:
            raise IncompleteGold("sentence %d has %d tokens but gold is "
                                 "for length %d" % (k, len(sentence), gold.n))
        try:
            _require_complete(gold)
        except Exception as exc:
            raise IncompleteGold("gold set %d: %s" % (k, exc))
        parents[id(gold)] = _parent_table(gold)
        for m in sorted(gold.members, key=lambda m: (max(m.indices), len(m.indices))):
            if m.label not in labels:
                labels.append(m.label)
    vocab = {token for sentence, _ in corpus for token, _ in sentence}
    model = PerceptronModel(labels, vocab=vocab)
    rng = random.Random(seed)
    order = list(range(len(corpus)))
    for _ in range(epochs):
        rng.shuffle(order)
        for k in order:
            sentence, gold = corpus[k]
            config = tr.init("sf", gold.n)
            while not tr.is_terminal("sf", config):
                model._tick()
                feats = extract_features(config, sentence, model.vocab)
                scored = model.raw_score_actions(config, sentence)
                predicted = _argmax(scored)
                if mode == "static":
                    want = sf_static_action(config, gold, parents[id(gold)])
                    chosen = want
                else:
                    want = dynamic_oracle(config, gold).pick
                    if explore > 0 and rng.random() < explore:
                        chosen = scored[rng.randrange(len(scored))][0]
                    else:
                        chosen = predicted
                if predicted != want:
                    good, good_key = _feats_for(feats, want, config.i)
                    bad, bad_key = _feats_for(feats, predicted, config.i)
                    model.update(good, good_key, bad, bad_key)
                config = tr.apply("sf", config, chosen)
    return model.finalize()


# -- model file format --------------------------------------------------------

_HEADER = "#discoparse-perceptron v1"


def save_model(model: PerceptronModel, path):
    """Write averaged weights as ``feature<TAB>action<TAB>weight`` lines."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("%s labels=%s vocab=%d\n"
                     % (_HEADER, ",".join(model.labels),
                        -1 if model.vocab is None else len(model.vocab)))
        if model.vocab is not None:
            for token in sorted(model.vocab):
                handle.write("#vocab\t%s\n" % token)
        for (feature, key), weight in sorted(model.weights.items()):
            handle.write("%s\t%s\t%r\n" % (feature, key, weight))


def load_model(path) -> PerceptronModel:
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
        if not header.startswith(_HEADER):
            raise ScorerError("not a discoparse model file: %r" % header)
        meta = dict(part.split("=", 1) for part in header.split()[2:])
        labels = tuple(x for x in meta.get("labels", "").split(",") if x)
        vocab = set() if int(meta.get("vocab", -1)) >= 0 else None
        weights = {}
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#vocab\t"):
                vocab.add(line.split("\t", 1)[1])
                continue
            feature, key, weight = line.split("\t")
            weights[(feature, key)] = float(weight)
    model = PerceptronModel(labels, vocab=vocab)
    model.weights = weights
    return model
