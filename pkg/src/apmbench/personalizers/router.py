"""History-embedding router: multinomial logistic regression or least-squares regression."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatchError, InvalidConfigError, TrainingError
from ..records import dumps
from .labels import RoutingLabel, class_to_label, regression_label


@dataclass
class RouterModel:
    mode: str  # "classify" | "regress"
    weights: np.ndarray  # (d, outputs)
    bias: np.ndarray  # (outputs,)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[1],):
            raise DimensionMismatchError("router weights must be (d, C) with a length-C bias")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise TrainingError("router has non-finite weights", self.meta.get("loss_trace", []))

    @property
    def n_outputs(self) -> int:
        return self.weights.shape[1]

    def scores(self, features) -> np.ndarray:
        x = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if x.shape[1] != self.weights.shape[0]:
            raise DimensionMismatchError(f"feature dim {x.shape[1]} != router dim {self.weights.shape[0]}")
        return x @ self.weights + self.bias

    def predict(self, features) -> list[RoutingLabel]:
        out = self.scores(features)
        if self.mode == "regress":
            return [regression_label(row) for row in out]
        return [class_to_label(int(np.argmax(row))) for row in out]

    def to_record(self) -> dict:
        d, c = self.weights.shape
        return {"mode": self.mode, "dims": [d, c], "weights": self.weights.ravel().tolist(),
                "bias": self.bias.tolist(), "meta": self.meta}

    @classmethod
    def from_record(cls, rec: dict) -> "RouterModel":
        d, c = rec["dims"]
        return cls(rec["mode"], np.asarray(rec["weights"], dtype=np.float64).reshape(d, c), rec["bias"], rec["meta"])

    def save(self, path) -> None:
        Path(path).write_text(dumps(self.to_record()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "RouterModel":
        return cls.from_record(json.loads(Path(path).read_text(encoding="utf-8")))


def _softmax_loss(x, y, w, b, l2):
    z = x @ w + b
    z -= z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    n = x.shape[0]
    loss = -logp[np.arange(n), y].mean() + 0.5 * l2 * np.sum(w * w)
    g = np.exp(logp)
    g[np.arange(n), y] -= 1.0
    g /= n
    return loss, x.T @ g + l2 * w, g.sum(axis=0)


def train_classifier(features, classes, n_classes: int, *, lr: float = 1.0, epochs: int = 500, l2: float = 1e-4,
                     lr_floor: float = 1e-8) -> RouterModel:
    """Full-batch gradient descent on softmax cross-entropy.

    A step that would raise the loss is rejected and the learning rate
    halved, so the recorded loss trace never increases.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(classes, dtype=np.int64)
    if x.ndim != 2 or y.shape != (x.shape[0],) or x.shape[0] == 0:
        raise DimensionMismatchError("features must be (n, d) with n class labels")
    if y.min() < 0 or y.max() >= n_classes:
        raise InvalidConfigError(f"class labels must lie in [0, {n_classes})")
    w = np.zeros((x.shape[1], n_classes))
    b = np.zeros(n_classes)
    loss, gw, gb = _softmax_loss(x, y, w, b, l2)
    trace, halvings = [float(loss)], 0
    for _ in range(epochs):
        while True:
            w2, b2 = w - lr * gw, b - lr * gb
            loss2, gw2, gb2 = _softmax_loss(x, y, w2, b2, l2)
            if np.isfinite(loss2) and loss2 <= loss:
                break
            lr /= 2
            halvings += 1
            if lr < lr_floor:
                raise TrainingError("learning rate fell below floor without decreasing loss", trace)
        w, b, loss, gw, gb = w2, b2, loss2, gw2, gb2
        trace.append(float(loss))
    acc = float(np.mean(np.argmax(x @ w + b, axis=1) == y))
    meta = {"epochs": epochs, "final_lr": lr, "halvings": halvings, "final_loss": trace[-1],
            "train_accuracy": acc, "loss_trace": trace}
    return RouterModel("classify", w, b, meta)


def train_regressor(features, targets) -> RouterModel:
    """Linear least squares with an intercept, one output per target column."""
    x = np.asarray(features, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or t.ndim != 2 or t.shape[0] != x.shape[0] or x.shape[0] == 0:
        raise DimensionMismatchError("features (n, d) and targets (n, 2M) required")
    xa = np.hstack([x, np.ones((x.shape[0], 1))])
    coef, *_ = np.linalg.lstsq(xa, t, rcond=None)
    resid = float(np.max(np.abs(xa @ coef - t)))
    return RouterModel("regress", coef[:-1], coef[-1], {"max_residual": resid})


def train_router(features, labels, mode: str = "classify", n_classes: int | None = None, **hyper) -> RouterModel:
    """``labels``: RoutingLabel list (classify) or an ``(n, 2M)`` target array (regress)."""
    if mode == "classify":
        classes = [lab.class_index for lab in labels]
        if n_classes is None:
            raise InvalidConfigError("classify mode needs n_classes = 2M")
        return train_classifier(features, classes, n_classes, **hyper)
    if mode == "regress":
        return train_regressor(features, labels)
    raise InvalidConfigError(f"unknown router mode {mode!r}")
