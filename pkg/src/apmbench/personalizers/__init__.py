from .labels import (STRATEGIES, RoutingLabel, class_to_label, label_to_class, make_label, margin_label,
                     one_sided_label, regression_label, regression_targets, split_targets, two_sided_label,
                     user_principle_scores)
from .methods import (Candidate, PreferencePair, StyleInstruction, build_context, build_preference_pair,
                      candidate_rewards, generate, generate_candidates, instruction_for, judge_vector,
                      oracle_route, preference_summary, route, style_summary)
from .retrieval import Neighbor, RetrievalIndex
from .router import RouterModel, train_classifier, train_regressor, train_router

__all__ = [
    "STRATEGIES", "Candidate", "Neighbor", "PreferencePair", "RetrievalIndex", "RouterModel", "RoutingLabel",
    "StyleInstruction", "build_context", "build_preference_pair", "candidate_rewards", "class_to_label",
    "generate", "generate_candidates", "instruction_for", "judge_vector", "label_to_class", "make_label",
    "margin_label", "one_sided_label", "oracle_route", "preference_summary", "regression_label",
    "regression_targets", "route", "split_targets", "style_summary", "train_classifier", "train_regressor",
    "train_router", "two_sided_label", "user_principle_scores",
]
