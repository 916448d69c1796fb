"""Small from-scratch classifiers over dense feature vectors.

All four models share the fit/predict interface and operate on float
matrices. Training is deterministic given the seed; no external learning
library is involved so behavior is reproducible down to the arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingDivergedError


@dataclass
class Standardizer:
    """Per-column z-scoring with statistics frozen at fit time.

    Columns with zero variance scale by 1 so constant features pass through
    centered instead of dividing by zero.
    """

    mean: np.ndarray | None = None
    scale: np.ndarray | None = None

    def fit(self, x: np.ndarray) -> "Standardizer":
        self.mean = x.mean(axis=0)
        std = x.std(axis=0)
        self.scale = np.where(std > 0, std, 1.0)
        return self

    def transform(self, x: np.ndarray) -> np.ndarray:
        if self.mean is None or self.scale is None:
            raise RuntimeError("standardizer used before fit")
        return (x - self.mean) / self.scale


def _check_xy(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if x.ndim != 2:
        raise ValueError("x must be a 2d matrix")
    if y.shape != (x.shape[0],):
        raise ValueError("y must be a label per row of x")
    if not np.isfinite(x).all():
        raise ValueError("x contains non-finite values")
    if np.unique(y).size < 2:
        raise ValueError("training requires at least two classes")
    return x, y


class GaussianNaiveBayes:
    """Gaussian class-conditional model with a variance floor for stability."""

    VAR_FLOOR = 1e-9

    def __init__(self) -> None:
        self.classes_: np.ndarray | None = None
        self.priors_: np.ndarray | None = None
        self.means_: np.ndarray | None = None
        self.vars_: np.ndarray | None = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> "GaussianNaiveBayes":
        x, y = _check_xy(x, y)
        self.classes_ = np.unique(y)
        priors, means, variances = [], [], []
        for c in self.classes_:
            rows = x[y == c]
            priors.append(len(rows) / len(x))
            means.append(rows.mean(axis=0))
            variances.append(np.maximum(rows.var(axis=0), self.VAR_FLOOR))
        self.priors_ = np.array(priors)
        self.means_ = np.array(means)
        self.vars_ = np.array(variances)
        return self

    def _joint_log_likelihood(self, x: np.ndarray) -> np.ndarray:
        scores = []
        for i in range(len(self.classes_)):
            log_prior = np.log(self.priors_[i])
            ll = -0.5 * np.sum(
                np.log(2.0 * np.pi * self.vars_[i])
                + (x - self.means_[i]) ** 2 / self.vars_[i],
                axis=1,
            )
            scores.append(log_prior + ll)
        return np.stack(scores, axis=1)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """Class posteriors, one column per entry of classes_."""
        if self.classes_ is None:
            raise RuntimeError("model used before fit")
        jll = self._joint_log_likelihood(np.asarray(x, dtype=float))
        jll -= jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, x: np.ndarray) -> np.ndarray:
        if self.classes_ is None:
            raise RuntimeError("model used before fit")
        x = np.asarray(x, dtype=float)
        return self.classes_[np.argmax(self._joint_log_likelihood(x), axis=1)]


class LogisticRegression:
    """Binary logistic regression fit by full-batch gradient descent."""

    def __init__(
        self,
        learning_rate: float = 0.1,
        l2: float = 1e-3,
        max_epochs: int = 500,
        tol: float = 1e-6,
    ) -> None:
        self.learning_rate = learning_rate
        self.l2 = l2
        self.max_epochs = max_epochs
        self.tol = tol
        self.weights_: np.ndarray | None = None
        self.bias_: float = 0.0
        self.classes_: np.ndarray | None = None

    @staticmethod
    def _sigmoid(z: np.ndarray) -> np.ndarray:
        return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        if self.weights_ is None:
            raise RuntimeError("model used before fit")
        return np.asarray(x, dtype=float) @ self.weights_ + self.bias_

    def fit(self, x: np.ndarray, y: np.ndarray) -> "LogisticRegression":
        x, y = _check_xy(x, y)
        self.classes_ = np.unique(y)
        if len(self.classes_) > 2:
            raise ValueError("binary model: expected at most 2 classes")
        target = (y == self.classes_[-1]).astype(float)
        n, d = x.shape
        self.weights_ = np.zeros(d)
        self.bias_ = 0.0
        for _ in range(self.max_epochs):
            p = self._sigmoid(x @ self.weights_ + self.bias_)
            err = p - target
            grad_w = x.T @ err / n + self.l2 * self.weights_
            grad_b = float(err.mean())
            self.weights_ -= self.learning_rate * grad_w
            self.bias_ -= self.learning_rate * grad_b
            if not np.isfinite(self.weights_).all():
                raise TrainingDivergedError("logistic regression weights left float range")
            if np.sqrt(np.sum(grad_w**2) + grad_b**2) < self.tol:
                break
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        scores = self.decision_function(x)
        hi = self.classes_[-1]
        lo = self.classes_[0]
        return np.where(scores >= 0, hi, lo)


class MultiLayerPerceptron:
    """One tanh hidden layer trained with full-batch gradient descent."""

    def __init__(
        self,
        hidden: int = 32,
        learning_rate: float = 0.05,
        epochs: int = 300,
        seed: int = 0,
        l2: float = 0.0,
    ) -> None:
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed
        self.l2 = l2
        self.classes_: np.ndarray | None = None
        self.w1_: np.ndarray | None = None
        self.b1_: np.ndarray | None = None
        self.w2_: np.ndarray | None = None
        self.b2_: float = 0.0

    def fit(self, x: np.ndarray, y: np.ndarray) -> "MultiLayerPerceptron":
        x, y = _check_xy(x, y)
        self.classes_ = np.unique(y)
        if len(self.classes_) > 2:
            raise ValueError("binary model: expected at most 2 classes")
        target = (y == self.classes_[-1]).astype(float)
        n, d = x.shape
        rng = np.random.default_rng(self.seed)
        self.w1_ = rng.normal(0.0, 1.0 / max(np.sqrt(d), 1.0), size=(d, self.hidden))
        self.b1_ = np.zeros(self.hidden)
        self.w2_ = rng.normal(0.0, 1.0 / np.sqrt(self.hidden), size=self.hidden)
        self.b2_ = 0.0
        for _ in range(self.epochs):
            h = np.tanh(x @ self.w1_ + self.b1_)
            p = 1.0 / (1.0 + np.exp(-(h @ self.w2_ + self.b2_)))
            err = p - target  # n
            grad_w2 = h.T @ err / n + self.l2 * self.w2_
            grad_b2 = float(err.mean())
            back = np.outer(err, self.w2_) * (1.0 - h**2)  # n x hidden
            grad_w1 = x.T @ back / n + self.l2 * self.w1_
            grad_b1 = back.mean(axis=0)
            self.w2_ -= self.learning_rate * grad_w2
            self.b2_ -= self.learning_rate * grad_b2
            self.w1_ -= self.learning_rate * grad_w1
            self.b1_ -= self.learning_rate * grad_b1
            if not np.isfinite(self.w1_).all() or not np.isfinite(self.w2_).all():
                raise TrainingDivergedError("mlp weights left float range")
        return self

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        if self.w1_ is None:
            raise RuntimeError("model used before fit")
        h = np.tanh(np.asarray(x, dtype=float) @ self.w1_ + self.b1_)
        return h @ self.w2_ + self.b2_

    def predict(self, x: np.ndarray) -> np.ndarray:
        scores = self.decision_function(x)
        return np.where(scores >= 0, self.classes_[-1], self.classes_[0])


class LinearSVM:
    """Linear SVM trained with the Pegasos subgradient schedule."""

    def __init__(self, lam: float = 1e-3, epochs: int = 200, seed: int = 0) -> None:
        self.lam = lam
        self.epochs = epochs
        self.seed = seed
        self.weights_: np.ndarray | None = None
        self.bias_: float = 0.0
        self.classes_: np.ndarray | None = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> "LinearSVM":
        x, y = _check_xy(x, y)
        self.classes_ = np.unique(y)
        if len(self.classes_) > 2:
            raise ValueError("binary model: expected at most 2 classes")
        sign = np.where(y == self.classes_[-1], 1.0, -1.0)
        n, d = x.shape
        rng = np.random.default_rng(self.seed)
        w = np.zeros(d)
        b = 0.0
        t = 0
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for i in order:
                t += 1
                eta = 1.0 / (self.lam * t)
                margin = sign[i] * (x[i] @ w + b)
                w *= 1.0 - eta * self.lam
                if margin < 1.0:
                    w += eta * sign[i] * x[i]
                    b += eta * sign[i]
        self.weights_ = w
        self.bias_ = b
        return self

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        if self.weights_ is None:
            raise RuntimeError("model used before fit")
        return np.asarray(x, dtype=float) @ self.weights_ + self.bias_

    def predict(self, x: np.ndarray) -> np.ndarray:
        scores = self.decision_function(x)
        return np.where(scores >= 0, self.classes_[-1], self.classes_[0])


MODEL_BUILDERS = {
    "nb": GaussianNaiveBayes,
    "lr": LogisticRegression,
    "mlp": MultiLayerPerceptron,
    "svm": LinearSVM,
}


def make_model(name: str, seed: int = 0):
    """Instantiate a classifier by short name; seeded where training is stochastic."""
    if name not in MODEL_BUILDERS:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(MODEL_BUILDERS)}")
    if name in ("mlp", "svm"):
        return MODEL_BUILDERS[name](seed=seed)
    return MODEL_BUILDERS[name]()
