"""One-pass per-feature moments and the online input standardizer."""

from __future__ import annotations

import numpy as np


class RunningMoments:
    """Welford mean/variance plus running min/max, one entry per feature."""

    def __init__(self, d: int):
        self.n = 0
        self.mean = np.zeros(d)
        self._m2 = np.zeros(d)
        self.min = np.full(d, np.inf)
        self.max = np.full(d, -np.inf)

    def update(self, x: np.ndarray) -> None:
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self._m2 += delta * (x - self.mean)
        np.minimum(self.min, x, out=self.min)
        np.maximum(self.max, x, out=self.max)

    @property
    def var(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros_like(self.mean)
        return np.maximum(self._m2 / self.n, 0.0)

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.var)


class Standardizer:
    """Online z-scoring of inputs.

    :meth:`update_transform` folds the instance into the running moments and
    then scales it, so the very first instance maps to the zero vector.
    """

    def __init__(self, d: int, min_std: float = 1e-12):
        self.moments = RunningMoments(d)
        self.min_std = min_std

    @property
    def n(self) -> int:
        return self.moments.n

    def transform(self, x: np.ndarray) -> np.ndarray:
        if self.moments.n == 0:
            return np.zeros_like(x)
        return (x - self.moments.mean) / np.maximum(self.moments.std, self.min_std)

    def update_transform(self, x: np.ndarray) -> np.ndarray:
        self.moments.update(x)
        return self.transform(x)

    def to_dict(self) -> dict:
        return {"n": self.n, "mean": self.moments.mean.tolist(), "std": self.moments.std.tolist()}


def standardize(stats: Standardizer, x) -> np.ndarray:
    return stats.update_transform(np.asarray(x, dtype=float))
