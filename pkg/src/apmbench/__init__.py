"""Benchmark harness for history-based personalization under a hidden random attribute-to-principle mapping."""
from .core import (DEFAULT_TIE_EPSILON, MIDPOINT, AttributeVector, MappingKind, MappingMatrix, MetricsSummary,
                   compute_metrics, preference_vector, reward, reward_from_preference, sample_attribute_vector,
                   sample_mapping, sign_balanced_principle_score)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TIE_EPSILON", "MIDPOINT", "AttributeVector", "MappingKind", "MappingMatrix", "MetricsSummary",
    "compute_metrics", "preference_vector", "reward", "reward_from_preference", "sample_attribute_vector",
    "sample_mapping", "sign_balanced_principle_score",
]
