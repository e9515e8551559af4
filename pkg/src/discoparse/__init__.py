"""Discontinuous constituent parsing toolkit.

An LCFRS grammar core with a weighted deductive chart parser, the
SR-SWAP, ML-GAP and stack-free SHIFT-COMBINE transition systems with
their static and dynamic oracles, a pluggable scorer for greedy parsing,
and labelled/discontinuous F-score evaluation.
"""

from .tree import (Range, RangeLabelledTree, ConstituentSet,
                   InstantiatedConstituent, StructuralReport, SetReport,
                   tree_to_constituents, constituents_to_tree,
                   normalize_unaries, binarize, debinarize, gap_set,
                   structural_report, projective_anchors, post_order,
                   compare, ind_precedes, right_leq, g_precedes,
                   validate_constituent_set, max_subset_parent,
                   strip_preterminals, attach_preterminals, pos_sequence)
from .grammar import (Plcfrs, LcfrsRule, PropertyReport, RuleInstance,
                      Sym, T, V, make_rule, validate, make_gap_explicit,
                      isolate_terminals, prune_useless, PruneOutcome,
                      extract_plcfrs, enumerate_instances, generate_strings)
from .chart import (parse, parse_full, recognize, best_weight, ParseResult,
                    ChartResult)
from .transitions import (Action, SrConfig, SwapConfig, MlGapConfig,
                          SfConfig, init, legal, apply, decode, is_terminal,
                          replay)
from .oracles import (swap_oracle, mlgap_oracle, sf_static_oracle,
                      reachable, reach, next_constituent, dynamic_oracle,
                      DynamicDecision)
from .scorer import (OracleScorer, PerceptronModel, extract_features,
                     greedy_parse, train, save_model, load_model,
                     four_index_summary)
from .evaluation import (EvalParams, EvalResult, evaluate,
                         filter_constituents, PTB_PUNCT_TAGS)
from .formats import (read_trees, write_trees, write_tree, read_grammar,
                      write_grammar, ParseError)
from .estimators import ChartParser, TransitionParser

__version__ = "0.1.0"
