"""One-hidden-layer network baseline: logistic hidden units, identity output,
trained by backpropagated gradient descent on z-scored data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AnnDivergenceError
from .svr import Scaler


@dataclass(frozen=True)
class AnnTrainConfig:
    learning_rate: float = 0.01
    epochs: int = 5000
    seed: int = 0
    init_scale: float = 1.0
    batch_size: int | None = None  # None trains full batch

    def validate(self) -> None:
        if not self.learning_rate >= 0:
            raise ValueError(f"learning rate must be non-negative, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class AnnModel:
    hidden_w: np.ndarray  # (n_inputs, hidden)
    hidden_b: np.ndarray  # (hidden,)
    out_w: np.ndarray  # (hidden,)
    out_b: float
    scaler: Scaler
    loss_history: np.ndarray | None = None

    @property
    def n_features(self) -> int:
        return self.hidden_w.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.hidden_w.shape[1]


@dataclass(frozen=True)
class AnnGradient:
    """Gradient of the half squared error of one sample, in scaled space."""

    hidden_w: np.ndarray
    hidden_b: np.ndarray
    out_w: np.ndarray
    out_b: float


def sigmoid(v):
    return 1.0 / (1.0 + np.exp(-v))


def _forward_scaled(model: AnnModel, xs: np.ndarray) -> np.ndarray:
    z = sigmoid(xs @ model.hidden_w + model.hidden_b)
    return z @ model.out_w + model.out_b


def ann_predict(model: AnnModel, x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {x.shape[1]}")
    xs = model.scaler.transform_x(x)
    return model.scaler.inverse_y(_forward_scaled(model, xs))


def ann_forward(model: AnnModel, x: np.ndarray) -> float:
    """Network output for one input vector, in original target units."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("ann_forward takes a single vector")
    return float(ann_predict(model, x)[0])


def ann_gradient(model: AnnModel, x: np.ndarray, y_target: float) -> AnnGradient:
    """Exact gradient of 0.5*(prediction - target)^2 for one sample.

    Both the prediction and the target are taken in scaled space, matching
    the loss the trainer descends.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_features,):
        raise ValueError(f"expected a vector of {model.n_features} features")
    xs = model.scaler.transform_x(x)
    ys = float(model.scaler.transform_y(np.asarray(y_target, dtype=float)))
    z = sigmoid(xs @ model.hidden_w + model.hidden_b)
    err = float(z @ model.out_w + model.out_b - ys)
    if not np.isfinite(err):
        raise AnnDivergenceError("non-finite network output", epoch=-1)
    g_pre = err * model.out_w * z * (1.0 - z)
    return AnnGradient(
        hidden_w=np.outer(xs, g_pre),
        hidden_b=g_pre,
        out_w=err * z,
        out_b=err,
    )


def ann_train(
    x: np.ndarray, y: np.ndarray, hidden: int = 2, config: AnnTrainConfig | None = None
) -> AnnModel:
    """Gradient descent on the mean half squared error, full batch by default."""
    config = config or AnnTrainConfig()
    config.validate()
    if hidden < 1:
        raise ValueError(f"hidden size must be >= 1, got {hidden}")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    n, m = x.shape
    if n < 1 or y.shape != (n,):
        raise ValueError(f"target shape {y.shape} does not match {n} rows")

    scaler = Scaler.fit(x, y)
    xs = scaler.transform_x(x)
    ys = scaler.transform_y(y)

    rng = np.random.default_rng(config.seed)
    w1 = rng.uniform(-0.5, 0.5, size=(m, hidden)) * config.init_scale
    b1 = rng.uniform(-0.5, 0.5, size=hidden) * config.init_scale
    w2 = rng.uniform(-0.5, 0.5, size=hidden) * config.init_scale
    b2 = float(rng.uniform(-0.5, 0.5)) * config.init_scale

    lr = config.learning_rate
    history = np.empty(config.epochs)
    for epoch in range(config.epochs):
        if config.batch_size is None or config.batch_size >= n:
            batches = [np.arange(n)]
        else:
            perm = rng.permutation(n)
            batches = [perm[i : i + config.batch_size] for i in range(0, n, config.batch_size)]

        z_all = sigmoid(xs @ w1 + b1)
        err_all = z_all @ w2 + b2 - ys
        loss = 0.5 * float(np.mean(err_all**2))
        if not np.isfinite(loss):
            raise AnnDivergenceError(f"training loss became non-finite at epoch {epoch}", epoch)
        history[epoch] = loss

        for batch in batches:
            xb, yb = xs[batch], ys[batch]
            z = sigmoid(xb @ w1 + b1)
            err = (z @ w2 + b2 - yb) / len(batch)
            g_pre = err[:, None] * (w2 * z * (1.0 - z))
            w2 = w2 - lr * (z.T @ err)
            b2 = b2 - lr * float(np.sum(err))
            w1 = w1 - lr * (xb.T @ g_pre)
            b1 = b1 - lr * np.sum(g_pre, axis=0)

    return AnnModel(
        hidden_w=w1, hidden_b=b1, out_w=w2, out_b=float(b2),
        scaler=scaler, loss_history=history,
    )
