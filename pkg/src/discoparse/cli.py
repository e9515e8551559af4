"""The ``discoparse`` command line interface.

Subcommands cover grammar validation and normalization, treebank grammar
extraction, chart parsing, brute-force language enumeration, oracle
emission, perceptron training, greedy parsing, and evaluation.  All
formats are line-oriented UTF-8; results go to stdout, diagnostics to
stderr.  Exit codes: 0 success, 1 usage error, 2 data error.
"""

import sys

import click

from . import chart as _chart
from . import formats, grammar as _grammar, oracles, scorer as _scorer
from . import transitions as tr
from .evaluation import EvalParams, LengthMismatch, evaluate
from .tree import (TreeError, attach_preterminals, binarize,
                   normalize_unaries, pos_sequence, strip_preterminals,
                   tree_to_constituents)

DATA_ERRORS = (formats.ParseError, _grammar.GrammarError, TreeError,
               _chart.ChartError, oracles.OracleError, tr.TransitionError,
               _scorer.ScorerError, LengthMismatch, OSError, ValueError)


@click.group()
def cli():
    """Discontinuous constituent parsing toolkit."""


def _read_grammar(path):
    with open(path, encoding="utf-8") as handle:
        return formats.read_grammar(handle.read())


def _read_trees(path):
    with open(path, encoding="utf-8") as handle:
        return formats.read_trees(handle.read())


def _read_tagged(path):
    """token/POS lines; the final slash splits token from tag.

    Tokens without a slash are passed through untagged, which the chart
    parser accepts for grammars carrying their own lexical rules.
    """
    stream = open(path, encoding="utf-8") if path else sys.stdin
    sentences = []
    for line in stream:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        sentence = []
        for item in line.split():
            if "/" in item:
                token, tag = item.rsplit("/", 1)
                sentence.append((token, tag))
            else:
                sentence.append(item)
        sentences.append(sentence)
    if path:
        stream.close()
    return sentences


def _emit(text):
    click.echo(text, nl=False)


@cli.command("validate-grammar")
@click.option("-g", "--grammar", "grammar_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
def validate_grammar(grammar_path):
    """Report the chart-parser property flags of a grammar."""
    g = _read_grammar(grammar_path)
    report = _grammar.validate(g)
    for flag in ("binary", "terminal_restricted", "gap_explicit", "ordered",
                 "epsilon_free"):
        ok = getattr(report, flag)
        click.echo("%s: %s" % (flag.replace("_", "-"), "ok" if ok else "violated"))
        if not ok:
            for rule in report.offenders[flag]:
                click.echo("  offender: %s" % str(rule))


@cli.command()
@click.option("-g", "--grammar", "grammar_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--gap-explicit", "action", flag_value="gap-explicit")
@click.option("--isolate-terminals", "action", flag_value="isolate-terminals")
@click.option("--prune", "action", flag_value="prune")
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def transform(grammar_path, action, output):
    """Apply one grammar normalization and print the result."""
    if action is None:
        raise click.UsageError(
            "pick one of --gap-explicit, --isolate-terminals, --prune")
    g = _read_grammar(grammar_path)
    if action == "gap-explicit":
        g = _grammar.make_gap_explicit(g)
    elif action == "isolate-terminals":
        g = _grammar.isolate_terminals(g)
    else:
        outcome = _grammar.prune_useless(g)
        if outcome.empty_language:
            click.echo("warning: the start symbol is unproductive; "
                       "the language is empty", err=True)
        g = outcome.grammar
    text = formats.write_grammar(g)
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        _emit(text)


@cli.command()
@click.option("--trees", "trees_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--binarize", "do_binarize", is_flag=True)
@click.option("--collapse-unaries", "do_collapse", is_flag=True)
@click.option("--fanout-markers", "do_markers", is_flag=True,
              help="disambiguate labels used with several fan-outs (VP_2)")
@click.option("-o", "--output", type=click.Path(dir_okay=False))
def extract(trees_path, do_binarize, do_collapse, do_markers, output):
    """Extract a PLCFRS from a treebank with relative-frequency weights."""
    from .estimators import mark_mixed_fanouts
    trees = _read_trees(trees_path)
    if do_collapse:
        trees = [normalize_unaries(t, "collapse") for t in trees]
    if do_binarize:
        trees = [binarize(t) for t in trees]
    if do_markers:
        trees, marked = mark_mixed_fanouts(trees)
        if marked:
            click.echo("note: marker labels introduced: %s"
                       % ", ".join(sorted(marked)), err=True)
    try:
        g = _grammar.extract_plcfrs(trees)
    except _grammar.GrammarError as exc:
        if "fan-outs" in str(exc) and not do_markers:
            raise _grammar.GrammarError(
                "%s; re-run with --fanout-markers to disambiguate" % exc)
        raise
    text = formats.write_grammar(g)
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        _emit(text)


@cli.command("chart-parse")
@click.option("-g", "--grammar", "grammar_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-dim", default=_chart.DEFAULT_MAX_DIM, show_default=True)
@click.option("--strip-fanout-markers", "strip_markers", is_flag=True,
              help="remove _k fan-out markers from output labels")
def chart_parse(grammar_path, input_path, max_dim, strip_markers):
    """Parse token/POS lines; prints ``tree<TAB>weight`` or NOPARSE."""
    from .estimators import strip_fanout_markers
    g = _read_grammar(grammar_path)
    marked = {nt for nt in g.dims if __import__("re").search(r"_\d+$", nt)}
    for sentence in _read_tagged(input_path):
        result = _chart.parse(g, sentence, max_dim=max_dim)
        if result is None:
            click.echo("NOPARSE")
            continue
        tree = result.tree
        if strip_markers:
            tree = strip_fanout_markers(tree, marked)
        click.echo("%s\t%.6f" % (formats.write_tree(tree), result.weight))


@cli.command("enumerate")
@click.option("-g", "--grammar", "grammar_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--max-len", required=True, type=int)
@click.option("--weights", "show_weights", is_flag=True,
              help="append the best |log q| weight per string")
def enumerate_language(grammar_path, max_len, show_weights):
    """Print the string language up to a length bound, one per line."""
    g = _read_grammar(grammar_path)
    table = _grammar.generate_strings(g, max_len, with_weights=True)
    for string in sorted(table, key=lambda s: (len(s), s)):
        line = " ".join(string)
        if show_weights:
            line += "\t%.6f" % table[string]
        click.echo(line)


def _oracle_actions(system, strategy, tree):
    if system in ("sr", "swap"):
        if any(len(tree.children(v)) > 2 for v in tree.internal_nodes()):
            tree = binarize(tree)
        if system == "sr":
            strategy = "projective"
        return oracles.swap_oracle(tree, strategy), tree.n
    kset = tree_to_constituents(normalize_unaries(tree, "collapse"))
    if system == "mlgap":
        return oracles.mlgap_oracle(kset), kset.n
    return oracles.sf_static_oracle(kset), kset.n


def _action_fields(action):
    if action.kind == "COMBINE":
        return ["COMBINE", ",".join(map(str, sorted(action.indices)))]
    if action.label is not None:
        return [action.kind, action.label]
    return [action.kind]


@cli.command()
@click.option("--system", type=click.Choice(tr.SYSTEMS), default="sf",
              show_default=True)
@click.option("--strategy", type=click.Choice(oracles.SWAP_STRATEGIES),
              default="lazier", show_default=True,
              help="SWAP oracle strategy (ignored by other systems)")
@click.option("--trees", "trees_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--emit", type=click.Choice(["actions", "trace"]),
              default="actions", show_default=True)
def oracle(system, strategy, trees_path, emit):
    """Emit static-oracle action sequences, one ``STEP<TAB>ACTION`` per line.

    Non-binary trees are binarized on the fly for the sr/swap systems;
    unary chains are collapsed for the set-based systems.
    """
    first = True
    for tree in _read_trees(trees_path):
        if not first:
            click.echo("")
        first = False
        actions, n = _oracle_actions(system, strategy, tree)
        configs = tr.replay(system, actions, n)
        for step, action in enumerate(actions):
            fields = [str(step)] + _action_fields(action)
            if emit == "trace":
                fields.append(repr(configs[step]))
            click.echo("\t".join(fields))


@cli.command()
@click.option("--trees", "trees_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--mode", type=click.Choice(["static", "dynamic"]),
              default="static", show_default=True)
@click.option("--epochs", default=10, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--explore", default=0.1, show_default=True,
              help="epsilon for dynamic-mode exploration")
def train(trees_path, model_path, mode, epochs, seed, explore):
    """Train the averaged-perceptron scorer on a treebank with POS nodes."""
    corpus = []
    for tree in _read_trees(trees_path):
        sentence = pos_sequence(tree)
        gold = tree_to_constituents(
            normalize_unaries(strip_preterminals(tree), "collapse"))
        corpus.append((sentence, gold))
    model = _scorer.train(corpus, mode=mode, epochs=epochs,
                          explore=explore, seed=seed)
    _scorer.save_model(model, model_path)
    click.echo("trained on %d sentences; %d averaged weights -> %s"
               % (len(corpus), len(model.weights), model_path), err=True)


@cli.command()
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False))
def parse(model_path, input_path):
    """Greedy-parse token/POS lines with a trained model."""
    model = _scorer.load_model(model_path)
    for sentence in _read_tagged(input_path):
        if any(isinstance(item, str) for item in sentence):
            raise click.UsageError("greedy parsing needs token/POS input")
        tree = _scorer.greedy_parse(model, sentence)
        tree = attach_preterminals(tree, [tag for _, tag in sentence])
        tree = tree.with_tokens([token for token, _ in sentence])
        click.echo(formats.write_tree(tree))


def _tree_to_eval_set(tree):
    stripped = strip_preterminals(tree)
    return tree_to_constituents(normalize_unaries(stripped, "collapse"))


@cli.command("eval")
@click.option("--gold", "gold_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", "pred_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--disc-only", is_flag=True)
@click.option("--ignore-root", is_flag=True)
@click.option("--punct-tags", default=",".join(sorted(EvalParams().punct_tags)),
              show_default=True, help="comma-separated POS tags to discount")
@click.option("--per-sentence", is_flag=True)
def eval_command(gold_path, pred_path, disc_only, ignore_root, punct_tags,
                 per_sentence):
    """Labelled F-score of a predicted treebank against a gold treebank.

    The POS layer is stripped before comparison (its tags drive the
    punctuation filter); remaining unary chains count as single
    ``@``-joined constituents.
    """
    golds = _read_trees(gold_path)
    preds = _read_trees(pred_path)
    params = EvalParams(
        punct_tags=frozenset(t for t in punct_tags.split(",") if t),
        ignore_root=ignore_root, disc_only=disc_only)
    tags = []
    for tree in golds:
        try:
            tags.append([tag for _, tag in pos_sequence(tree)])
        except TreeError:
            tags.append(None)
    gold_sets = [_tree_to_eval_set(t) for t in golds]
    pred_sets = [_tree_to_eval_set(t) for t in preds]
    sentences, corpus = evaluate(gold_sets, pred_sets, params, tags)
    if per_sentence:
        for k, r in enumerate(sentences):
            click.echo("sentence %d\tP %.2f\tR %.2f\tF %.2f\t%s"
                       % (k + 1, 100 * r.precision, 100 * r.recall,
                          100 * r.f1, "exact" if r.exact_match else ""))
    click.echo("matched = %d\npredicted = %d\ngold = %d"
               % (corpus.matched, corpus.predicted, corpus.gold))
    click.echo("P = %.2f" % (100 * corpus.precision))
    click.echo("R = %.2f" % (100 * corpus.recall))
    click.echo("F = %.2f" % (100 * corpus.f1))


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.Abort:
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 2
    except DATA_ERRORS as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
