from dataclasses import dataclass

import numpy as np

from .._utils import as_query, readonly
from ..base import EmptyTrainingSet, TrainingSet


@dataclass(frozen=True)
class LinearCoeffs:
    a0: float
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", readonly(self.a))

    def predict(self, query) -> float:
        return float(self.a0 + self.a @ as_query(query))


def lr_fit(train: TrainingSet) -> LinearCoeffs:
    """Minimum-norm least squares of ``targets`` on ``[1 | patterns]``.

    The SVD-based solve picks the minimum-norm member of the solution family when
    the design is rank deficient (collinear base forecasts, fewer rows than columns).
    """
    if len(train) == 0:
        raise EmptyTrainingSet("linear combiner needs at least one training pair")
    design = np.column_stack([np.ones(len(train)), train.patterns])
    coef, *_ = np.linalg.lstsq(design, train.targets, rcond=None)
    return LinearCoeffs(a0=float(coef[0]), a=coef[1:])


def lr_combine(train: TrainingSet, query) -> tuple[float, LinearCoeffs]:
    coeffs = lr_fit(train)
    return coeffs.predict(query), coeffs
