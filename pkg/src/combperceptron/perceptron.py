"""Single-neuron logistic perceptron trained by full-batch gradient descent.

The estimator follows the scikit-learn fit/predict convention.  Training
minimizes binary cross-entropy; in "nonnegative" weight mode the weight
vector is projected onto w >= 0 after every step so the learned model can
be carried by optical line powers, while the bias stays signed and is
applied after detection.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from . import jsonio
from .errors import DomainError, EmptySelectionError, TrainingDivergedError
from .validation import as_binary_labels, as_feature_matrix

WEIGHT_MODES = ("unconstrained", "nonnegative")


def sigmoid(z):
    """Numerically stable logistic function 1 / (1 + exp(-z))."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def bce_loss(z, y):
    """Mean binary cross-entropy of logits z against 0/1 labels y.

    Uses log(1 + e^z) - y*z, which never evaluates log(0).  A non-finite
    return value signals divergence; callers check for it, so the inf - inf
    warning on already-diverged inputs is suppressed here.
    """
    with np.errstate(invalid="ignore"):
        return float(np.mean(np.logaddexp(0.0, z) - y * z))


class PerceptronClassifier(BaseEstimator, ClassifierMixin):
    """Logistic regression on a single neuron, full-batch gradient descent.

    Parameters
    ----------
    learning_rate : step size for gradient descent.
    epochs : number of full-batch steps; 0 leaves the initialization as-is.
    seed : RNG seed for weight initialization.
    weight_mode : "unconstrained" or "nonnegative" (project w >= 0 each step).
    init_scale : weights start uniform in [0, init_scale), bias at 0.
    """

    def __init__(self, learning_rate=0.5, epochs=2000, seed=0,
                 weight_mode="unconstrained", init_scale=0.01):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed
        self.weight_mode = weight_mode
        self.init_scale = init_scale

    def fit(self, X, y):
        if self.weight_mode not in WEIGHT_MODES:
            raise DomainError(
                f"weight_mode must be one of {WEIGHT_MODES}, got {self.weight_mode!r}"
            )
        if self.epochs < 0:
            raise DomainError(f"epochs must be >= 0, got {self.epochs}")
        if not self.learning_rate > 0:
            raise DomainError(f"learning_rate must be positive, got {self.learning_rate}")
        X = as_feature_matrix(X)
        y = as_binary_labels(y, n_expected=X.shape[0]).astype(np.float64)
        m, n = X.shape
        if m == 0:
            raise EmptySelectionError("cannot fit on an empty sample set")

        rng = np.random.default_rng(self.seed)
        w = rng.uniform(0.0, self.init_scale, size=n)
        b = 0.0

        # einsum keeps the reduction order fixed regardless of BLAS threading,
        # so refits are bit-identical everywhere
        losses = []
        for epoch in range(1, self.epochs + 1):
            z = np.einsum("ij,j->i", X, w) + b
            loss = bce_loss(z, y)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch)
            losses.append(loss)
            residual = sigmoid(z) - y
            grad_w = np.einsum("ij,i->j", X, residual) / m
            grad_b = float(np.mean(residual))
            w = w - self.learning_rate * grad_w
            b = b - self.learning_rate * grad_b
            if self.weight_mode == "nonnegative":
                w = np.maximum(w, 0.0)

        final_loss = bce_loss(np.einsum("ij,j->i", X, w) + b, y)
        if not np.isfinite(final_loss):
            raise TrainingDivergedError(self.epochs)

        self.n_features_in_ = n
        self.classes_ = np.array([0, 1])
        self.weights_ = w
        self.bias_ = float(b)
        self.final_loss_ = final_loss
        self.loss_curve_ = losses
        return self

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("this PerceptronClassifier has not been fitted")

    def decision_function(self, X):
        """Full-precision scores X @ w + b."""
        self._check_fitted()
        X = as_feature_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise DomainError(
                f"X has {X.shape[1]} features, model expects {self.n_features_in_}"
            )
        return np.einsum("ij,j->i", X, self.weights_) + self.bias_

    def predict(self, X):
        """Class 1 when the score is strictly positive, else class 0."""
        return (self.decision_function(X) > 0.0).astype(np.int64)

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])


@dataclass
class EvalReport:
    accuracy: float
    confusion: np.ndarray  # confusion[true][predicted]
    n_samples: int

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "n_samples": self.n_samples,
        }


def evaluate(predicted, labels):
    """Accuracy and 2x2 confusion matrix of predicted classes vs labels."""
    predicted = np.asarray(predicted, dtype=np.int64)
    labels = as_binary_labels(labels)
    if predicted.shape != labels.shape:
        raise DomainError(
            f"predicted has shape {predicted.shape}, labels {labels.shape}"
        )
    if predicted.size == 0:
        raise EmptySelectionError("cannot evaluate an empty sample set")
    confusion = np.zeros((2, 2), dtype=np.int64)
    for t, p in zip(labels, predicted):
        confusion[t, p] += 1
    accuracy = float(np.trace(confusion) / predicted.size)
    return EvalReport(accuracy=accuracy, confusion=confusion, n_samples=predicted.size)


def evaluate_model(model, X, y):
    """Evaluate a fitted model's digital predictions on (X, y)."""
    return evaluate(model.predict(X), y)


def model_to_dict(model, train_meta=None):
    """JSON-ready view of a fitted model, weights at full precision."""
    model._check_fitted()
    meta = {
        "seed": model.seed,
        "epochs": model.epochs,
        "learning_rate": model.learning_rate,
        "final_loss": model.final_loss_,
    }
    if train_meta:
        meta.update(train_meta)
    return {
        "n": int(model.n_features_in_),
        "weights": [float(w) for w in model.weights_],
        "bias": model.bias_,
        "weight_mode": model.weight_mode,
        "train_meta": meta,
    }


def model_from_dict(doc):
    """Rebuild a fitted PerceptronClassifier from model_to_dict output."""
    meta = doc.get("train_meta", {})
    model = PerceptronClassifier(
        learning_rate=meta.get("learning_rate", 0.5),
        epochs=meta.get("epochs", 0),
        seed=meta.get("seed", 0),
        weight_mode=doc["weight_mode"],
    )
    weights = np.asarray(doc["weights"], dtype=np.float64)
    if weights.shape[0] != doc["n"]:
        raise DomainError(
            f"model file claims n = {doc['n']} but holds {weights.shape[0]} weights"
        )
    model.n_features_in_ = int(doc["n"])
    model.classes_ = np.array([0, 1])
    model.weights_ = weights
    model.bias_ = float(doc["bias"])
    model.final_loss_ = float(meta.get("final_loss", float("nan")))
    model.loss_curve_ = []
    return model


def save_model(model, path, train_meta=None):
    jsonio.dump(model_to_dict(model, train_meta=train_meta), path)


def load_model(path):
    return model_from_dict(jsonio.load(path))
