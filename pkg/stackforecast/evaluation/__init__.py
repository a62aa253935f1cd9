from .extrapolation import ExtrapolationCounts, extrapolation_counts, head_to_head_on_extrapolations
from .metric import MetricsReport, base_model_metrics, percentage_errors, summarize, variant_mape_distribution
from .ranking import rank_models
from .significance import DmResult, dm_matrix, dm_test
