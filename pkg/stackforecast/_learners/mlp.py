"""Single-hidden-layer perceptron combiner trained with Levenberg-Marquardt.

Hidden units use the bipolar sigmoid ``2 / (1 + exp(-z)) - 1``, which equals
``tanh(z / 2)``; the output node is linear. Training minimises
``SSE + alpha * ||theta||^2`` on standardised inputs and targets.
"""

from dataclasses import dataclass, field

import numpy as np

from .._utils import as_query, logger, readonly
from ..base import EmptyTrainingSet, TrainingSet
from ._scaling import Standardizer

DAMPING_START = 1e-3
DAMPING_FACTOR = 10.0
DAMPING_MAX = 1e10
GRADIENT_TOL = 1e-8


@dataclass(frozen=True)
class MlpModel:
    m: int
    # w[j, 0] is the bias of hidden node j, w[j, 1:] its input weights
    w: np.ndarray
    # v[0] is the output bias
    v: np.ndarray
    alpha: float = 0.0
    x_scaler: Standardizer = field(default_factory=Standardizer)
    y_scaler: Standardizer = field(default_factory=Standardizer)

    def __post_init__(self):
        w = readonly(self.w)
        v = readonly(self.v)
        if self.m < 1 or w.shape[0] != self.m or v.shape != (self.m + 1,):
            raise ValueError(f"weights do not match m={self.m}: w{w.shape}, v{v.shape}")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "v", v)

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([self.w.ravel(), self.v])


def bipolar_sigmoid(z: np.ndarray) -> np.ndarray:
    return np.tanh(0.5 * z)


def _unpack(theta: np.ndarray, m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    split = m * (n + 1)
    return theta[:split].reshape(m, n + 1), theta[split:]


def _forward(theta: np.ndarray, m: int, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = _unpack(theta, m, X.shape[1])
    hidden = bipolar_sigmoid(X @ w[:, 1:].T + w[:, 0])
    return hidden @ v[1:] + v[0], hidden


def _jacobian(theta: np.ndarray, m: int, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Network outputs and their derivatives w.r.t. every parameter (N x P)."""
    N, n = X.shape
    w, v = _unpack(theta, m, n)
    out, hidden = _forward(theta, m, X)
    # d phi / dz = (1 - phi^2) / 2
    dz = 0.5 * (1.0 - hidden**2) * v[1:]
    dw = np.empty((N, m, n + 1))
    dw[:, :, 0] = dz
    dw[:, :, 1:] = dz[:, :, None] * X[:, None, :]
    J = np.concatenate([dw.reshape(N, -1), np.ones((N, 1)), hidden], axis=1)
    return out, J


def mlp_sse(theta: np.ndarray, m: int, X: np.ndarray, y: np.ndarray) -> float:
    out, _ = _forward(np.asarray(theta, dtype=float), m, np.asarray(X, dtype=float))
    return float(np.sum((out - y) ** 2))


def mlp_sse_gradient(theta: np.ndarray, m: int, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    out, J = _jacobian(np.asarray(theta, dtype=float), m, np.asarray(X, dtype=float))
    return 2.0 * J.T @ (out - y)


def mlp_fit(
    train: TrainingSet,
    m: int,
    epochs: int = 100,
    alpha: float = 0.01,
    seed: int = 0,
) -> MlpModel:
    if len(train) == 0:
        raise EmptyTrainingSet("MLP combiner needs at least one training pair")
    if m < 1 or epochs < 1:
        raise ValueError(f"need m >= 1 and epochs >= 1, got m={m}, epochs={epochs}")
    x_scaler = Standardizer.fit(train.patterns)
    y_scaler = Standardizer.fit(train.targets)
    X = x_scaler.transform(train.patterns)
    y = y_scaler.transform(train.targets)
    n = X.shape[1]

    rng = np.random.default_rng(seed)
    theta = rng.uniform(-0.5, 0.5, size=m * (n + 1) + m + 1)
    identity = np.eye(len(theta))

    def objective(params):
        out, _ = _forward(params, m, X)
        return float(np.sum((out - y) ** 2) + alpha * np.sum(params**2))

    loss = objective(theta)
    mu = DAMPING_START
    for epoch in range(epochs):
        out, J = _jacobian(theta, m, X)
        half_grad = J.T @ (out - y) + alpha * theta
        if np.linalg.norm(2.0 * half_grad) < GRADIENT_TOL:
            logger.debug(f"[MLP] gradient vanished after {epoch} iterations")
            break
        hessian = J.T @ J + alpha * identity
        try:
            step = np.linalg.solve(hessian + mu * identity, -half_grad)
        except np.linalg.LinAlgError:
            step = None
        candidate = None if step is None else theta + step
        new_loss = objective(candidate) if candidate is not None else np.inf
        if new_loss < loss:
            theta, loss = candidate, new_loss
            mu /= DAMPING_FACTOR
        else:
            mu *= DAMPING_FACTOR
            if mu > DAMPING_MAX:
                logger.debug(f"[MLP] damping exceeded {DAMPING_MAX:g} after {epoch + 1} iterations")
                break

    w, v = _unpack(theta, m, n)
    return MlpModel(m=m, w=w, v=v, alpha=alpha, x_scaler=x_scaler, y_scaler=y_scaler)


def mlp_predict(model: MlpModel, query) -> float:
    x = model.x_scaler.transform(as_query(query)).reshape(1, -1)
    out, _ = _forward(model.theta, model.m, x)
    return float(model.y_scaler.inverse(out[0]))
