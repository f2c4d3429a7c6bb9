"""Thin scikit-learn wrapper: rows of rapidities in, form factor values out."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .config import FFConfig
from .formfactors import ChargeSignature, FormFactorEvaluator


class FormFactorTransformer(TransformerMixin, BaseEstimator):
    """Maps rows ``(re1, im1, ..., re2n, im2n)`` to ``(Re F, Im F)``.

    ``fit`` only validates the input width against ``signature`` and
    builds the solver configuration; there is nothing to learn.
    """

    def __init__(self, xi=1.0, a_over_beta=1.0, signature="--++", NN=1, Na=12, Ni=2000,
                 epsilon=1e-3, shift_floor=5.0):
        self.xi = xi
        self.a_over_beta = a_over_beta
        self.signature = signature
        self.NN = NN
        self.Na = Na
        self.Ni = Ni
        self.epsilon = epsilon
        self.shift_floor = shift_floor

    def fit(self, X, y=None):
        sig = ChargeSignature(self.signature)
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 2 * len(sig):
            raise ValueError(f"expected {2 * len(sig)} columns for signature {sig}, got {X.shape[1]}")
        self.signature_ = sig
        self.config_ = FFConfig(self.xi, a_over_beta=self.a_over_beta, NN=self.NN, Na=self.Na,
                                Ni=self.Ni, epsilon=self.epsilon, shift_floor=self.shift_floor)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        out = np.empty((X.shape[0], 2))
        for i, row in enumerate(X):
            thetas = row[0::2] + 1j * row[1::2]
            val = FormFactorEvaluator(thetas, self.config_).evaluate(self.signature_).value
            out[i] = (val.real, val.imag)
        return out
