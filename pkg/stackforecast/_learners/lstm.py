"""Recurrent combiner: one LSTM layer followed by an affine head.

Gate blocks are stacked in the order input, forget, output, candidate. The
network is trained by full backpropagation through the training sequence with
Adam steps and global gradient-norm clipping.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .._utils import as_query, readonly
from ..base import EmptyTrainingSet, TrainingSet
from ._scaling import Standardizer

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
CLIP_NORM = 1.0


@dataclass(frozen=True)
class LstmModel:
    m: int
    W: np.ndarray  # 4m x n input weights
    U: np.ndarray  # 4m x m recurrent weights
    b: np.ndarray  # 4m
    v: np.ndarray  # m
    v0: float
    x_scaler: Standardizer = field(default_factory=Standardizer)
    y_scaler: Standardizer = field(default_factory=Standardizer)
    # (c, h) after the last training step
    state_c: Optional[np.ndarray] = None
    state_h: Optional[np.ndarray] = None

    def __post_init__(self):
        m = self.m
        for name, shape in (("U", (4 * m, m)), ("b", (4 * m,)), ("v", (m,))):
            arr = readonly(getattr(self, name))
            if arr.shape != shape:
                raise ValueError(f"LSTM {name} has shape {arr.shape}, expected {shape}")
            object.__setattr__(self, name, arr)
        W = readonly(self.W)
        if W.ndim != 2 or W.shape[0] != 4 * m:
            raise ValueError(f"LSTM W has shape {W.shape}, expected (4m, n)")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "v0", float(self.v0))

    @property
    def n_inputs(self) -> int:
        return self.W.shape[1]

    @property
    def theta(self) -> np.ndarray:
        return pack_params(self.W, self.U, self.b, self.v, self.v0)

    @classmethod
    def zeros(cls, m: int, n: int, v0: float = 0.0) -> "LstmModel":
        return cls(m=m, W=np.zeros((4 * m, n)), U=np.zeros((4 * m, m)), b=np.zeros(4 * m), v=np.zeros(m), v0=v0)


def pack_params(W, U, b, v, v0) -> np.ndarray:
    return np.concatenate([np.ravel(W), np.ravel(U), np.ravel(b), np.ravel(v), [float(v0)]])


def unpack_params(theta: np.ndarray, m: int, n: int):
    sizes = [4 * m * n, 4 * m * m, 4 * m, m]
    parts = np.split(theta[:-1], np.cumsum(sizes)[:-1])
    W = parts[0].reshape(4 * m, n)
    U = parts[1].reshape(4 * m, m)
    return W, U, parts[2], parts[3], float(theta[-1])


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _run(theta, m, X, c0=None, h0=None):
    """Forward pass over X (L x n); returns outputs and the per-step cache."""
    W, U, b, v, v0 = unpack_params(theta, m, X.shape[1])
    L = X.shape[0]
    c = np.zeros(m) if c0 is None else c0
    h = np.zeros(m) if h0 is None else h0
    pre = X @ W.T + b
    cache = []
    out = np.empty(L)
    for t in range(L):
        a = pre[t] + U @ h
        i = _sigmoid(a[:m])
        f = _sigmoid(a[m : 2 * m])
        o = _sigmoid(a[2 * m : 3 * m])
        g = np.tanh(a[3 * m :])
        c_prev, h_prev = c, h
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        out[t] = v @ h + v0
        cache.append((i, f, o, g, c_prev, h_prev, tc, h))
    return out, cache, (c, h)


def lstm_sse(theta: np.ndarray, m: int, X: np.ndarray, y: np.ndarray) -> float:
    out, _, _ = _run(np.asarray(theta, dtype=float), m, np.asarray(X, dtype=float))
    return float(np.sum((out - y) ** 2))


def lstm_sse_gradient(theta: np.ndarray, m: int, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of the sequence SSE by backpropagation through time."""
    theta = np.asarray(theta, dtype=float)
    X = np.asarray(X, dtype=float)
    W, U, b, v, v0 = unpack_params(theta, m, X.shape[1])
    out, cache, _ = _run(theta, m, X)
    dW, dU, db = np.zeros_like(W), np.zeros_like(U), np.zeros_like(b)
    dv, dv0 = np.zeros_like(v), 0.0
    dh_next = np.zeros(m)
    dc_next = np.zeros(m)
    for t in range(len(out) - 1, -1, -1):
        i, f, o, g, c_prev, h_prev, tc, h = cache[t]
        dout = 2.0 * (out[t] - y[t])
        dv += dout * h
        dv0 += dout
        dh = dout * v + dh_next
        dc = dh * o * (1.0 - tc**2) + dc_next
        da = np.concatenate([
            dc * g * i * (1.0 - i),
            dc * c_prev * f * (1.0 - f),
            dh * tc * o * (1.0 - o),
            dc * i * (1.0 - g**2),
        ])
        dW += np.outer(da, X[t])
        dU += np.outer(da, h_prev)
        db += da
        dh_next = U.T @ da
        dc_next = dc * f
    return pack_params(dW, dU, db, dv, dv0)


def lstm_fit(
    train: TrainingSet,
    m: int = 8,
    epochs: int = 200,
    seed: int = 0,
    step: float = 0.01,
) -> LstmModel:
    """Fit on the training set read as one sequence in increasing time order."""
    if len(train) == 0:
        raise EmptyTrainingSet("LSTM combiner needs at least one training step")
    if m < 1:
        raise ValueError(f"LSTM needs m >= 1, got {m}")
    x_scaler = Standardizer.fit(train.patterns)
    y_scaler = Standardizer.fit(train.targets)
    X = x_scaler.transform(train.patterns)
    y = y_scaler.transform(train.targets)
    n = X.shape[1]

    rng = np.random.default_rng(seed)
    theta = rng.uniform(-0.5, 0.5, size=4 * m * n + 4 * m * m + 4 * m + m + 1)
    first = np.zeros_like(theta)
    second = np.zeros_like(theta)
    for epoch in range(1, epochs + 1):
        grad = lstm_sse_gradient(theta, m, X, y)
        norm = np.linalg.norm(grad)
        if norm > CLIP_NORM:
            grad = grad * (CLIP_NORM / norm)
        first = ADAM_BETA1 * first + (1.0 - ADAM_BETA1) * grad
        second = ADAM_BETA2 * second + (1.0 - ADAM_BETA2) * grad**2
        first_hat = first / (1.0 - ADAM_BETA1**epoch)
        second_hat = second / (1.0 - ADAM_BETA2**epoch)
        theta = theta - step * first_hat / (np.sqrt(second_hat) + ADAM_EPS)

    _, _, (c, h) = _run(theta, m, X)
    W, U, b, v, v0 = unpack_params(theta, m, n)
    return LstmModel(
        m=m, W=W, U=U, b=b, v=v, v0=v0,
        x_scaler=x_scaler, y_scaler=y_scaler,
        state_c=readonly(c), state_h=readonly(h),
    )


def lstm_predict(model: LstmModel, history, query) -> float:
    """Warm the state on ``history`` (oldest first), then forecast from ``query``."""
    q = model.x_scaler.transform(as_query(query)).reshape(1, -1)
    history = np.asarray(history, dtype=float).reshape(-1, model.n_inputs)
    X = np.vstack([model.x_scaler.transform(history), q]) if len(history) else q
    out, _, _ = _run(model.theta, model.m, X)
    return float(model.y_scaler.inverse(out[-1]))
