"""Training loss (MSE), evaluation loss (Huber) and Monte-Carlo true risk."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .linalg import DimensionError
from .network import Params, forward_batch


@dataclass(frozen=True, eq=False)
class Dataset:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=np.float64)
        if xs.ndim == 1:
            xs = xs[:, None]
        ys = np.array(self.ys, dtype=np.float64).ravel()
        if xs.ndim != 2 or xs.shape[0] != ys.shape[0]:
            raise DimensionError(f"xs{xs.shape} and ys{ys.shape} disagree")
        if xs.shape[0] < 1:
            raise ValueError("dataset must contain at least one sample")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("dataset has non-finite entries")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def N(self) -> int:
        return self.xs.shape[0]

    @property
    def d(self) -> int:
        return self.xs.shape[1]

    def permuted(self, perm) -> "Dataset":
        return Dataset(self.xs[perm], self.ys[perm])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x_{i}" for i in range(self.d)] + ["y"])
            for x, y in zip(self.xs, self.ys):
                w.writerow([repr(float(v)) for v in x] + [repr(float(y))])

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(Path(path), newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ValueError(f"{path}: empty dataset file")
        header = rows[0]
        if not header or header[-1] != "y" or header[:-1] != [f"x_{i}" for i in range(len(header) - 1)]:
            raise ValueError(f"{path}: header must be x_0,...,x_(d-1),y")
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=np.float64)
        if data.size == 0:
            raise ValueError(f"{path}: no samples")
        return cls(data[:, :-1], data[:, -1])


@dataclass(frozen=True)
class LossConfig:
    huber_delta: float = 1.0

    def __post_init__(self):
        if not self.huber_delta > 0:
            raise ValueError("huber_delta must be > 0")


def huber(yhat, y, delta: float = 1.0):
    """Quadratic within ``delta`` of the target, linear (slope ``delta``) outside."""
    if not delta > 0:
        raise ValueError("delta must be > 0")
    r = np.abs(np.asarray(yhat, dtype=np.float64) - np.asarray(y, dtype=np.float64))
    out = np.where(r <= delta, 0.5 * r * r, delta * (r - 0.5 * delta))
    return float(out) if out.ndim == 0 else out


def mse_risk(theta: Params, act, data: Dataset) -> float:
    """Mean of squared residuals (no 1/2 factor)."""
    res = forward_batch(theta, act, data.xs) - data.ys
    return float(np.mean(res * res))


def huber_risk(theta: Params, act, data: Dataset, delta: float = 1.0) -> float:
    return float(np.mean(huber(forward_batch(theta, act, data.xs), data.ys, delta)))


Sampler = Callable[[int, np.random.Generator], tuple[np.ndarray, np.ndarray]]


def true_risk_mc(theta: Params, act, sampler: Sampler, m_samples: int,
                 rng: np.random.Generator, delta: float = 1.0) -> tuple[float, float]:
    """Monte-Carlo estimate of the expected Huber loss, returned as ``(mean, stderr)``.

    ``sampler(m, rng)`` must return ``m`` fresh draws ``(xs, ys)``.
    """
    if m_samples < 1:
        raise ValueError("m_samples must be >= 1")
    xs, ys = sampler(m_samples, rng)
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[:, None]
    losses = huber(forward_batch(theta, act, xs), np.asarray(ys, dtype=np.float64).ravel(), delta)
    losses = np.atleast_1d(losses)
    se = float(np.std(losses, ddof=1) / math.sqrt(losses.size)) if losses.size > 1 else 0.0
    return float(np.mean(losses)), se
