"""Incremental Takagi-Sugeno-Kang fuzzy rule learning on regression streams."""

from .drift import Adwin, DriftEvent, adwin_add, retract_rule
from .ebst import SplitResult, SplitTree
from .fuzzy import (VOID, LeftUnbounded, NotSiblings, RightUnbounded, Rule, RuleSet, SShaped,
                    Uncovered, Void, activation, eval_mf, normalized_weights, predict, split_mf,
                    union_mf)
from .induction import (ConfigError, ExpansionConfig, complexity_penalty, gen_update_er_candidates,
                        hoeffding_epsilon, try_expand_er, try_expand_vr, update_consequents)
from .io import (DriftStreamConfig, ParseError, StreamSource, UnsupportedAttribute, gen_drift_stream,
                 make_2dplanes, make_fried, parse_arff, parse_csv)
from .learner import LinearSGDBaseline, MeanBaseline, PrequentialRecord, TSKStreams, evaluate_stream
from .stats import Standardizer, standardize

__all__ = [
    "Adwin", "DriftEvent", "adwin_add", "retract_rule", "SplitResult", "SplitTree", "VOID",
    "LeftUnbounded", "NotSiblings", "RightUnbounded", "Rule", "RuleSet", "SShaped", "Uncovered",
    "Void", "activation", "eval_mf", "normalized_weights", "predict", "split_mf", "union_mf",
    "ConfigError", "ExpansionConfig", "complexity_penalty", "gen_update_er_candidates",
    "hoeffding_epsilon", "try_expand_er", "try_expand_vr", "update_consequents",
    "DriftStreamConfig", "ParseError", "StreamSource", "UnsupportedAttribute", "gen_drift_stream",
    "make_2dplanes", "make_fried", "parse_arff", "parse_csv", "LinearSGDBaseline", "MeanBaseline",
    "PrequentialRecord", "TSKStreams", "evaluate_stream", "Standardizer", "standardize",
]
