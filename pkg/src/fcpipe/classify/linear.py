"""L2-regularised logistic regression and linear SVM, trained by full-batch
(sub)gradient descent from a zero initialisation on standardised features."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, DivergedLoss, SingleClassTraining

STD_FLOOR = 1e-12


def standardize_fit(x) -> tuple[np.ndarray, np.ndarray]:
    """Per-column sample mean and standard deviation (ddof=1), std floored."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] < 2:
        raise ValueError("standardisation needs at least 2 rows")
    mean = x.mean(axis=0)
    std = x.std(axis=0, ddof=1)
    return mean, np.maximum(std, STD_FLOOR)


def standardize_apply(x, mean, std) -> np.ndarray:
    z = (np.asarray(x, dtype=float) - mean) / std
    # a floored std on a constant column must yield exactly 0, not round-off/1e-12
    z[..., std <= STD_FLOOR] = 0.0
    return z


@dataclass(eq=False)
class LinearModel:
    kind: str
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    std: np.ndarray
    loss_trace: list = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def decision(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {x.shape[-1]}")
        return standardize_apply(x, self.mean, self.std) @ self.weights + self.bias

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "weights": self.weights.tolist(),
            "bias": float(self.bias),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
        }


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def logistic_loss(w, b, x, y, lam) -> float:
    z = x @ w + b
    # log(1 + e^z) - y z, computed stably
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * lam * (w @ w))


def logistic_grad(w, b, x, y, lam):
    p = _sigmoid(x @ w + b)
    r = p - y
    return x.T @ r / len(y) + lam * w, float(np.mean(r))


def hinge_loss(w, b, x, y_pm, lam) -> float:
    margin = y_pm * (x @ w + b)
    return float(np.mean(np.maximum(0.0, 1.0 - margin)) + 0.5 * lam * (w @ w))


def hinge_subgrad(w, b, x, y_pm, lam):
    margin = y_pm * (x @ w + b)
    # subgradient 0 exactly at the kink (margin == 1)
    active = (margin < 1.0).astype(float) * y_pm
    return -(x.T @ active) / len(y_pm) + lam * w, float(-np.mean(active))


def _check_two_classes(y):
    y = np.asarray(y)
    if np.unique(y).size < 2:
        raise SingleClassTraining("training labels contain a single class")


def _descend(loss_fn, grad_fn, x, y, cfg, kind):
    n, p = x.shape
    w = np.zeros(p)
    b = 0.0
    trace = []
    for _ in range(cfg.epochs):
        loss = loss_fn(w, b, x, y, cfg.l2_lambda)
        if not np.isfinite(loss):
            raise DivergedLoss(f"{kind}: loss became non-finite")
        trace.append(loss)
        gw, gb = grad_fn(w, b, x, y, cfg.l2_lambda)
        w = w - cfg.learning_rate * gw
        b = b - cfg.learning_rate * gb
    loss = loss_fn(w, b, x, y, cfg.l2_lambda)
    if not (np.isfinite(loss) and np.all(np.isfinite(w)) and np.isfinite(b)):
        raise DivergedLoss(f"{kind}: loss became non-finite")
    trace.append(loss)
    return w, b, trace


def train_logreg(x, y, cfg, standardize: bool = True) -> LinearModel:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_two_classes(y)
    if standardize:
        mean, std = standardize_fit(x)
    else:
        mean, std = np.zeros(x.shape[1]), np.ones(x.shape[1])
    xs = standardize_apply(x, mean, std)
    w, b, trace = _descend(logistic_loss, logistic_grad, xs, y, cfg, "logistic_regression")
    return LinearModel("logistic_regression", w, b, mean, std, trace)


def train_linear_svm(x, y, cfg, standardize: bool = True) -> LinearModel:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    _check_two_classes(y)
    y_pm = np.where(y == 1, 1.0, -1.0)
    if standardize:
        mean, std = standardize_fit(x)
    else:
        mean, std = np.zeros(x.shape[1]), np.ones(x.shape[1])
    xs = standardize_apply(x, mean, std)
    w, b, trace = _descend(hinge_loss, hinge_subgrad, xs, y_pm, cfg, "linear_svm")
    return LinearModel("linear_svm", w, b, mean, std, trace)
