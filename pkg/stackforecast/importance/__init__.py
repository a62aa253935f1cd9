from .mrmr import equal_frequency_bins, mrmr_scores, mutual_information
from .rrelieff import RReliefF, rrelieff_scores
