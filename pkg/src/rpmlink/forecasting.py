"""One-step-ahead forecasters: simple mean, moving average, weighted moving
average and exponential smoothing.

Every model is a fixed linear combination of the observations, so besides the
direct :meth:`forecast` each model exposes :meth:`weights` for a given series
length. The dataset builder uses the weights to forecast millions of pair
series at once without materialising them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class ForecastError(ValueError):
    pass


def _check_series(series):
    arr = np.asarray(series, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ForecastError("cannot forecast an empty series")
    if not np.all(np.isfinite(arr)):
        raise ForecastError("series contains non-finite values")
    return arr


@dataclass(frozen=True)
class SimpleMean:
    def forecast(self, series):
        arr = _check_series(series)
        return float(arr.sum() / arr.size)

    def weights(self, length):
        return np.full(length, 1.0 / length)

    def spec(self):
        return "mean"


@dataclass(frozen=True)
class MovingAverage:
    n: int = 3

    def __post_init__(self):
        if self.n < 1:
            raise ForecastError("moving average window must be >= 1")

    def forecast(self, series):
        arr = _check_series(series)
        if arr.size < self.n:
            return SimpleMean().forecast(arr)
        return float(arr[-self.n:].sum() / self.n)

    def weights(self, length):
        if length < self.n:
            return SimpleMean().weights(length)
        w = np.zeros(length)
        w[-self.n:] = 1.0 / self.n
        return w

    def spec(self):
        return f"ma:{self.n}"


@dataclass(frozen=True)
class WeightedMovingAverage:
    """Weights apply oldest to newest over the last ``len(weights)`` values."""

    weights_: tuple = (0.2, 0.3, 0.5)

    def __post_init__(self):
        w = tuple(float(c) for c in self.weights_)
        object.__setattr__(self, "weights_", w)
        if not w:
            raise ForecastError("weighted moving average needs at least one weight")
        if any(c < 0 or not math.isfinite(c) for c in w):
            raise ForecastError(f"weights must be finite and nonnegative: {w}")
        if abs(math.fsum(w) - 1.0) > 1e-9:
            raise ForecastError(f"weights must sum to 1, got {math.fsum(w)}")

    @property
    def n(self):
        return len(self.weights_)

    def forecast(self, series):
        arr = _check_series(series)
        if arr.size < self.n:
            return SimpleMean().forecast(arr)
        return float(math.fsum(c * a for c, a in zip(self.weights_, arr[-self.n:])))

    def weights(self, length):
        if length < self.n:
            return SimpleMean().weights(length)
        w = np.zeros(length)
        w[-self.n:] = self.weights_
        return w

    def spec(self):
        return "wma:" + ",".join(f"{c:g}" for c in self.weights_)


@dataclass(frozen=True)
class ExponentialSmoothing:
    """Seeded with the first observation, F_1 = A_1."""

    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ForecastError(f"alpha must lie in [0, 1], got {self.alpha}")

    def forecast(self, series):
        arr = _check_series(series)
        level = arr[0]
        for a in arr:
            level = self.alpha * a + (1.0 - self.alpha) * level
        return float(level)

    def weights(self, length):
        a = self.alpha
        ages = np.arange(length - 1, -1, -1)  # 0 for the newest observation
        w = a * (1.0 - a) ** ages
        w[0] = (1.0 - a) ** (length - 1)
        return w

    def spec(self):
        return f"ema:{self.alpha:g}"


ForecastModel = SimpleMean | MovingAverage | WeightedMovingAverage | ExponentialSmoothing

DEFAULT_MODEL = WeightedMovingAverage((0.2, 0.3, 0.5))


def parse_model(spec):
    """Parse ``mean``, ``ma:3``, ``wma:0.2,0.3,0.5`` or ``ema:0.5``."""
    if not isinstance(spec, str):
        return spec
    name, _, args = spec.strip().lower().partition(":")
    try:
        if name in ("mean", "sm"):
            return SimpleMean()
        if name == "ma":
            return MovingAverage(int(args))
        if name == "wma":
            return WeightedMovingAverage(tuple(float(v) for v in args.split(",")))
        if name in ("ema", "es"):
            return ExponentialSmoothing(float(args))
    except ValueError as exc:
        raise ForecastError(f"bad forecast model spec {spec!r}: {exc}") from None
    raise ForecastError(f"unknown forecast model {spec!r}")


def default_candidates():
    return [
        SimpleMean(),
        MovingAverage(2), MovingAverage(3), MovingAverage(5),
        WeightedMovingAverage((0.2, 0.3, 0.5)),
        ExponentialSmoothing(0.3), ExponentialSmoothing(0.5), ExponentialSmoothing(0.8),
    ]


def forecast(model, series):
    return parse_model(model).forecast(series)


def forecast_stack(model, observations):
    """Forecast many series at once; ``observations`` has time on axis 0."""
    obs = np.asarray(observations, dtype=np.float64)
    if obs.shape[0] == 0:
        raise ForecastError("cannot forecast an empty series")
    w = parse_model(model).weights(obs.shape[0])
    return np.tensordot(w, obs, axes=(0, 0))


def select_model(candidates: Sequence, score: Callable[[object], float]):
    """Candidate with the highest ``score(model)``; earlier candidates win ties."""
    candidates = [parse_model(c) for c in candidates]
    if not candidates:
        raise ValueError("need at least one candidate model")
    best, best_score = None, -math.inf
    for model in candidates:
        s = score(model)
        if s > best_score:
            best, best_score = model, s
    return best
