from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Standardizer:
    """Per-column affine map ``(x - shift) / scale``; identity by default."""

    shift: np.ndarray = 0.0
    scale: np.ndarray = 1.0

    @classmethod
    def fit(cls, values: np.ndarray) -> "Standardizer":
        values = np.asarray(values, dtype=float)
        shift = values.mean(axis=0)
        scale = values.std(axis=0)
        # zero spread: centre only
        scale = np.where(scale > 0, scale, 1.0)
        return cls(shift=shift, scale=scale)

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.shift) / self.scale

    def inverse(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=float) * self.scale + self.shift
