"""Maximum entropy (multiclass logistic) classification on sparse binary
features, with per-instance weights and a Gaussian prior on the weights.

The model is a dense (n_labels, n_features) weight matrix W. The penalized
objective maximized by `train` is

    -||W - M||^2 / (2 sigma2) + sum_n w_n (W[y_n] . x_n - logsumexp_y W[y] . x_n)

where M is the prior mean matrix (zeros by default) and w_n the instance
weights (ones by default).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Alphabet, Dataset, FeatureVector, design_matrix, label_vector
from .optim import LbfgsConfig, lbfgs_minimize


@dataclass
class MaxentTrainConfig:
    sigma2: float = 1.0
    weights: np.ndarray | None = None  # per-instance, aligned with dataset order
    prior_mean: np.ndarray | None = None  # (n_labels, n_features)
    optimizer: LbfgsConfig = field(default_factory=LbfgsConfig)

    def __post_init__(self):
        if self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be positive")


def log_softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise log softmax, max-shifted."""
    shifted = scores - scores.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def class_scores(weights: np.ndarray, fv: FeatureVector) -> np.ndarray:
    if len(fv) == 0:
        return np.zeros(weights.shape[0])
    return weights[:, list(fv)].sum(axis=1)


def class_distribution(weights: np.ndarray, fv: FeatureVector) -> np.ndarray:
    """p(y | x) for a single instance."""
    return np.exp(log_softmax(class_scores(weights, fv)))


def predict(weights: np.ndarray, fv: FeatureVector) -> int:
    """Most probable label; ties go to the lowest index."""
    return int(np.argmax(class_scores(weights, fv)))


def _prepared(dataset: Dataset, config: MaxentTrainConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    X = design_matrix(dataset)
    y = label_vector(dataset)
    n = len(dataset)
    if config.weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(config.weights, dtype=float)
        if w.shape != (n,):
            raise ValueError("instance weights misaligned with dataset")
        if np.any(w < 0.0):
            raise ValueError("instance weights must be nonnegative")
    shape = (dataset.n_labels, dataset.n_features)
    if config.prior_mean is None:
        mean = np.zeros(shape)
    else:
        mean = np.asarray(config.prior_mean, dtype=float)
        if mean.shape != shape:
            raise ValueError(f"prior mean shape {mean.shape} != {shape}")
    return X, y, w, mean


def log_posterior(weights: np.ndarray, dataset: Dataset, config: MaxentTrainConfig | None = None) -> float:
    cfg = config or MaxentTrainConfig()
    X, y, w, mean = _prepared(dataset, cfg)
    return _objective_value(weights, X, y, w, mean, cfg.sigma2)


def log_posterior_gradient(weights: np.ndarray, dataset: Dataset, config: MaxentTrainConfig | None = None) -> np.ndarray:
    cfg = config or MaxentTrainConfig()
    X, y, w, mean = _prepared(dataset, cfg)
    return _objective_gradient(weights, X, y, w, mean, cfg.sigma2)


def _objective_value(W, X, y, w, mean, sigma2) -> float:
    diff = W - mean
    value = -0.5 / sigma2 * float(np.sum(diff * diff))
    if len(y):
        scores = X @ W.T
        logp = log_softmax(scores)
        value += float(np.dot(w, logp[np.arange(len(y)), y]))
    return value


def _objective_gradient(W, X, y, w, mean, sigma2) -> np.ndarray:
    grad = -(W - mean) / sigma2
    if len(y):
        scores = X @ W.T
        p = np.exp(log_softmax(scores))
        target = np.zeros_like(p)
        target[np.arange(len(y)), y] = w
        grad += (target - p * w[:, None]).T @ X
    return grad


def train(
    dataset: Dataset,
    config: MaxentTrainConfig | None = None,
    start: np.ndarray | None = None,
) -> np.ndarray:
    """Penalized weighted fit; deterministic given dataset, config, start."""
    cfg = config or MaxentTrainConfig()
    X, y, w, mean = _prepared(dataset, cfg)
    shape = (dataset.n_labels, dataset.n_features)
    x0 = np.zeros(shape) if start is None else np.asarray(start, dtype=float)
    if x0.shape != shape:
        raise ValueError(f"start shape {x0.shape} != {shape}")

    def objective(vec: np.ndarray):
        W = vec.reshape(shape)
        value = _objective_value(W, X, y, w, mean, cfg.sigma2)
        grad = _objective_gradient(W, X, y, w, mean, cfg.sigma2)
        return -value, -grad.ravel()

    solution, _ = lbfgs_minimize(objective, x0.ravel(), cfg.optimizer)
    return solution.reshape(shape)


@dataclass(frozen=True)
class MaxentModel:
    """Trained weights bundled with the alphabets they index."""

    weights: np.ndarray
    feature_alphabet: Alphabet
    label_alphabet: Alphabet

    def predict(self, fv: FeatureVector) -> int:
        return predict(self.weights, fv)

    def distribution(self, fv: FeatureVector) -> np.ndarray:
        return class_distribution(self.weights, fv)


def fit_model(dataset: Dataset, config: MaxentTrainConfig | None = None, start: np.ndarray | None = None) -> MaxentModel:
    return MaxentModel(train(dataset, config, start), dataset.feature_alphabet, dataset.label_alphabet)
