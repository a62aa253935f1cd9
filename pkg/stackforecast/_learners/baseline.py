import numpy as np

from .._utils import as_query
from ..base import EmptyQuery


def _checked(query) -> np.ndarray:
    q = as_query(query)
    if q.size == 0:
        raise EmptyQuery("cannot combine an empty query pattern")
    return q


def combine_mean(query) -> float:
    return float(np.mean(_checked(query)))


def combine_median(query) -> float:
    # even n: mean of the two central order statistics
    return float(np.median(_checked(query)))
