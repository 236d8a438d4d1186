from .moments import (MomentSet, DegenerateSeriesError, moments,
                      rolling_moments, correlation_values)
from .emd import emd1d_squared
from .networks import (CorrelationNetwork, bootstrap_network, plain_network,
                       jaccard, jaccard_curve)
from .scoring import (MEASURES, MetricTable, ScoreConfig, ReplaySampler,
                      score_model, score_model_over_seeds, combined_rank)

__all__ = [
    "MomentSet", "DegenerateSeriesError", "moments", "rolling_moments",
    "correlation_values", "emd1d_squared",
    "CorrelationNetwork", "bootstrap_network", "plain_network", "jaccard",
    "jaccard_curve",
    "MEASURES", "MetricTable", "ScoreConfig", "ReplaySampler", "score_model",
    "score_model_over_seeds", "combined_rank",
]
