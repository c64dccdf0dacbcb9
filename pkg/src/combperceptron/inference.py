"""End-to-end photonic classifier with the scikit-learn estimator surface.

fit() trains the digital perceptron (nonnegative weights by default, since
line powers cannot go negative), shapes and calibrates the comb to carry
the weights, and predict() then pushes each sample through the simulated
optical chain instead of computing the dot product digitally.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.exceptions import NotFittedError

from .errors import DomainError
from .perceptron import PerceptronClassifier
from .photonics import CombSpec, ShaperConfig, shape_for_model
from .signalchain import (
    FiberSpec,
    ImpairmentConfig,
    WaveformSpec,
    run_perceptron,
)
from .validation import as_feature_matrix


class PhotonicPerceptron(BaseEstimator, ClassifierMixin):
    """Meta-estimator: digital training, optical inference.

    Parameters mirror the physical setup; None picks the defaults.  The
    estimator parameter is the digital model to train (cloned on fit).
    """

    def __init__(self, estimator=None, comb=None, shaper=None, waveform=None,
                 fiber=None, impairments=None, calibration_seed=0):
        self.estimator = estimator
        self.comb = comb
        self.shaper = shaper
        self.waveform = waveform
        self.fiber = fiber
        self.impairments = impairments
        self.calibration_seed = calibration_seed

    # -- setup ---------------------------------------------------------

    def _resolved(self):
        return (
            self.waveform if self.waveform is not None else WaveformSpec(),
            self.fiber if self.fiber is not None else FiberSpec(),
            self.impairments if self.impairments is not None else ImpairmentConfig(),
        )

    def _deploy(self, model):
        n = model.n_features_in_
        comb = self.comb if self.comb is not None else CombSpec(n_lines=n)
        if comb.n_lines != n:
            raise DomainError(
                f"comb has {comb.n_lines} lines but the model needs {n}"
            )
        shaper = self.shaper if self.shaper is not None else ShaperConfig()
        self.model_ = model
        self.shaped_ = shape_for_model(
            model.weights_, comb=comb, shaper=shaper,
            calibration_seed=self.calibration_seed,
        )
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = n
        return self

    def fit(self, X, y):
        base = self.estimator if self.estimator is not None else \
            PerceptronClassifier(weight_mode="nonnegative")
        model = clone(base).fit(X, y)
        return self._deploy(model)

    @classmethod
    def from_model(cls, model, **params):
        """Wrap an already fitted digital model without retraining."""
        return cls(**params)._deploy(model)

    # -- inference -----------------------------------------------------

    def _check_deployed(self):
        if not hasattr(self, "shaped_"):
            raise NotFittedError("this PhotonicPerceptron has not been fitted")

    def simulate(self, X, sample_index_offset=0):
        """Run every row through the chain; returns PhotonicPrediction list.

        Sample i uses the RNG stream derived from the impairment seed and
        (sample_index_offset + i), so batch splitting cannot change results.
        """
        self._check_deployed()
        X = as_feature_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise DomainError(
                f"X has {X.shape[1]} features, model expects {self.n_features_in_}"
            )
        waveform, fiber, impairments = self._resolved()
        return [
            run_perceptron(
                X[i], self.model_.bias_, self.shaped_, waveform, fiber,
                impairments, sample_index=sample_index_offset + i,
            )
            for i in range(X.shape[0])
        ]

    def decision_function(self, X):
        return np.array([p.score for p in self.simulate(X)])

    def predict(self, X):
        return np.array([p.predicted_class for p in self.simulate(X)],
                        dtype=np.int64)
