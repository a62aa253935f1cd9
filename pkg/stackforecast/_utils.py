import logging
from dataclasses import fields, is_dataclass
from typing import Any

import numpy as np

logger = logging.getLogger("stackforecast")

# Decimal digits needed to round-trip a float64 through text.
FLOAT_FORMAT = "%.17g"


def derive_seed(base_seed: int, *keys: int) -> int:
    """Derive an independent task seed from the experiment seed and task coordinates."""
    seq = np.random.SeedSequence([int(base_seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in keys]])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def readonly(array: Any, dtype=float) -> np.ndarray:
    """Copy into a contiguous array and freeze it."""
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def as_query(query: Any) -> np.ndarray:
    return np.asarray(query, dtype=float).reshape(-1)


def describe_params(obj: Any) -> str:
    """One `key = value` per line, used for DEBUG config dumps."""
    if is_dataclass(obj):
        items = [(f.name, getattr(obj, f.name)) for f in fields(obj)]
    elif hasattr(obj, "model_dump"):
        items = list(obj.model_dump().items())
    else:
        items = list(vars(obj).items())
    return ",\n  ".join(f"{k} = {v}" for k, v in items)
