"""Class-weighted linear max-margin classifier trained by stochastic subgradient descent.

The objective over ``N`` rows with labels ``y in {-1, +1}`` is::

    J(w, b) = 1/2 ||w||^2 + C * sum_i pi[y_i] * max(0, 1 - y_i (w . x_i + b))

split into per-row terms ``||w||^2 / (2N) + C pi_i hinge_i`` for the stochastic
updates. Features are z-scored with training statistics before fitting.
"""
from __future__ import annotations

import json
import math

import numba
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.preprocessing import PolynomialFeatures
from sklearn.utils.validation import check_array, check_is_fitted


class TrainingError(ValueError):
    pass


@numba.njit(cache=True, nogil=True)
def _row_grad(w, b, x, y, pi, C, n_rows, gw):
    """Subgradient of one row's share of the objective; writes into ``gw``, returns d/db."""
    d = w.shape[0]
    score = b
    for j in range(d):
        score += w[j] * x[j]
    for j in range(d):
        gw[j] = w[j] / n_rows
    if y * score < 1.0:
        scale = C * pi * y
        for j in range(d):
            gw[j] -= scale * x[j]
        return -scale
    return 0.0


@numba.njit(cache=True, nogil=True)
def _sgd_epoch(X, y, pi, w, b, order, C, lr, t, batch_size):
    n_rows, d = X.shape
    gw = np.empty(d)
    acc = np.empty(d)
    i = 0
    while i < n_rows:
        stop = min(i + batch_size, n_rows)
        for j in range(d):
            acc[j] = 0.0
        acc_b = 0.0
        for k in range(i, stop):
            r = order[k]
            acc_b += _row_grad(w, b, X[r], y[r], pi[r], C, n_rows, gw)
            for j in range(d):
                acc[j] += gw[j]
        t += 1
        step = lr / math.sqrt(t) / (stop - i)
        for j in range(d):
            w[j] -= step * acc[j]
        b -= step * acc_b
        i = stop
    return b, t


@numba.njit(cache=True, nogil=True)
def _sgd_epoch_scaled(X, y, pi, w, b, order, C, lr, t):
    """Row-at-a-time version of :func:`_sgd_epoch` with ``w`` stored as ``scale * v``.

    The L2 shrink then costs O(1) per row, so rows outside the margin only pay
    for the dot product.
    """
    n_rows, d = X.shape
    v = w.copy()
    scale = 1.0
    for k in range(n_rows):
        r = order[k]
        dot = 0.0
        for j in range(d):
            dot += v[j] * X[r, j]
        score = scale * dot + b
        t += 1
        step = lr / math.sqrt(t)
        scale *= 1.0 - step / n_rows
        if y[r] * score < 1.0:
            s = step * C * pi[r] * y[r]
            for j in range(d):
                v[j] += s * X[r, j] / scale
            b += s
        if scale < 1e-9:
            for j in range(d):
                v[j] *= scale
            scale = 1.0
    for j in range(d):
        w[j] = scale * v[j]
    return b, t


@numba.njit(cache=True)
def _full_subgradient(w, b, X, y, pi, C):
    n_rows, d = X.shape
    gw = np.empty(d)
    total = np.zeros(d)
    total_b = 0.0
    for r in range(n_rows):
        total_b += _row_grad(w, b, X[r], y[r], pi[r], C, n_rows, gw)
        for j in range(d):
            total[j] += gw[j]
    return total, total_b


def objective(w, b, X, y_signed, pi, C=1.0):
    """Regularised class-weighted hinge loss on already-standardised ``X``."""
    margins = y_signed * (X @ w + b)
    return 0.5 * float(w @ w) + C * float(np.sum(pi * np.maximum(0.0, 1.0 - margins)))


def subgradient(w, b, X, y_signed, pi, C=1.0):
    """Gradient of :func:`objective` as ``(d/dw, d/db)``, using the training kernel's row rule."""
    gw, gb = _full_subgradient(np.asarray(w, np.float64), float(b),
                               np.ascontiguousarray(X, np.float64),
                               np.asarray(y_signed, np.float64), np.asarray(pi, np.float64), float(C))
    return gw, gb


def class_penalties(y, class_weight="balanced"):
    """Per-row penalty ``pi``; balanced weighting equalises the two classes' totals."""
    y = np.asarray(y)
    n = len(y)
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = n - n_pos
    if class_weight in (None, "none"):
        return np.ones(n)
    if class_weight != "balanced":
        raise ValueError(f"unknown class_weight {class_weight!r}")
    pi_pos = 2.0 * n_neg / n
    pi_neg = 2.0 * n_pos / n
    return np.where(y == 1, pi_pos, pi_neg)


class ClassWeightedLinearSVM(ClassifierMixin, BaseEstimator):
    """Linear SVM for heavily unbalanced binary data.

    Parameters
    ----------
    C : float
        Weight of the hinge term against the L2 penalty.
    epochs : int
        Passes over the shuffled training rows.
    learning_rate : float
        Initial step size; step ``t`` uses ``learning_rate / sqrt(t)``.
    class_weight : {"balanced", "none"}
    batch_size : int
        Rows averaged per update. 1 is plain stochastic subgradient descent.
    poly_degree : int
        2 expands features with all degree-2 monomials before scaling.
    random_state : int
        Seed for the per-epoch shuffles.
    """

    def __init__(self, C=1.0, epochs=50, learning_rate=0.1, class_weight="balanced",
                 batch_size=1, poly_degree=1, random_state=0):
        self.C = C
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.class_weight = class_weight
        self.batch_size = batch_size
        self.poly_degree = poly_degree
        self.random_state = random_state

    def _check_params(self):
        if not self.C > 0:
            raise ValueError("C must be > 0")
        if int(self.epochs) < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if int(self.batch_size) < 1:
            raise ValueError("batch_size must be >= 1")
        if self.poly_degree not in (1, 2):
            raise ValueError("poly_degree must be 1 or 2")

    def _expand(self, X):
        if self.poly_degree == 2:
            return PolynomialFeatures(degree=2, include_bias=False).fit_transform(X)
        return X

    def fit(self, X, y, feature_names=None):
        self._check_params()
        X = check_array(X, dtype=np.float64, ensure_all_finite=False)
        bad = np.argwhere(~np.isfinite(X))
        if len(bad):
            raise TrainingError(f"non-finite feature value in row {int(bad[0, 0])}")
        y = np.asarray(y).ravel()
        if len(y) != len(X):
            raise TrainingError(f"{len(X)} rows but {len(y)} labels")
        if not np.all(np.isin(y, (0, 1))):
            raise TrainingError("labels must be 0 or 1")
        if len(np.unique(y)) < 2:
            raise TrainingError("training data contains a single class")

        self.n_features_in_ = X.shape[1]
        if feature_names is not None:
            self.feature_names_ = list(feature_names)
        Z = self._expand(X)
        self.mean_ = Z.mean(axis=0)
        std = Z.std(axis=0)
        self.scale_ = np.where(std > 0, std, 1.0)
        Z = np.ascontiguousarray((Z - self.mean_) / self.scale_)

        y_signed = np.where(y == 1, 1.0, -1.0)
        pi = class_penalties(y, self.class_weight)
        rng = np.random.default_rng(self.random_state)
        w = np.zeros(Z.shape[1])
        b, t = 0.0, 0
        for _ in range(int(self.epochs)):
            order = rng.permutation(len(Z))
            if self.batch_size == 1:
                b, t = _sgd_epoch_scaled(Z, y_signed, pi, w, b, order, float(self.C),
                                         float(self.learning_rate), t)
            else:
                b, t = _sgd_epoch(Z, y_signed, pi, w, b, order, float(self.C),
                                  float(self.learning_rate), t, int(self.batch_size))
        self.coef_ = w
        self.intercept_ = float(b)
        self.classes_ = np.array([0, 1])
        self.n_updates_ = t
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        Z = (self._expand(X) - self.mean_) / self.scale_
        return Z @ self.coef_ + self.intercept_

    def predict(self, X):
        # a score of exactly 0 is a negative
        return (self.decision_function(X) > 0).astype(np.int64)

    def to_dict(self):
        check_is_fitted(self, "coef_")
        return {
            "schema": getattr(self, "feature_names_", None),
            "n_features": self.n_features_in_,
            "weights": self.coef_.tolist(),
            "bias": self.intercept_,
            "standardization": {"mean": self.mean_.tolist(), "scale": self.scale_.tolist()},
            "config": self.get_params(),
        }

    @classmethod
    def from_dict(cls, data):
        model = cls(**data["config"])
        model.n_features_in_ = data["n_features"]
        if data.get("schema") is not None:
            model.feature_names_ = list(data["schema"])
        model.coef_ = np.asarray(data["weights"], dtype=np.float64)
        model.intercept_ = float(data["bias"])
        model.mean_ = np.asarray(data["standardization"]["mean"], dtype=np.float64)
        model.scale_ = np.asarray(data["standardization"]["scale"], dtype=np.float64)
        model.classes_ = np.array([0, 1])
        return model

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def train(data, config=None, y=None):
    """Fit on a :class:`~rpmlink.rate_features.PairDataset` (or ``X`` with ``y``)."""
    params = dict(config or {})
    model = ClassWeightedLinearSVM(**params)
    if y is None:
        return model.fit(data.X, data.y, feature_names=data.feature_names)
    return model.fit(data, y)


def decision_score(model, features):
    f = np.asarray(features, dtype=np.float64)
    return float(model.decision_function(f.reshape(1, -1))[0])


def predict(model, features):
    return int(decision_score(model, features) > 0)
