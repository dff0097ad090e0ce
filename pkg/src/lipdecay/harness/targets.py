"""Toy regression tasks ``Y = f(X) + beta * eps`` with ``X, eps ~ N(0, 1)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..losses import Dataset

RECIPROCAL_GUARD = 1e-3

_BUILTIN = {
    "cubic_sqrt": lambda x: x ** 3 + np.sqrt(np.abs(x)),
    "sine": np.sin,
    "reciprocal": lambda x: 1.0 / x,
}

# names usable inside custom expressions
_EXPR_NS = {name: getattr(np, name) for name in
            ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "arctan", "pi", "sign")}


@dataclass(frozen=True)
class TargetFunction:
    """Univariate target. ``kind='custom'`` evaluates ``expr`` as a numpy expression in ``x``."""

    kind: str = "cubic_sqrt"
    expr: str | None = None

    def __post_init__(self):
        if self.kind == "custom":
            if not self.expr:
                raise ValueError("custom target needs an expression")
            compile(self.expr, "<target>", "eval")
        elif self.kind not in _BUILTIN:
            raise ValueError(f"unknown target {self.kind!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "custom":
            return np.broadcast_to(eval(self.expr, {"__builtins__": {}, **_EXPR_NS}, {"x": x}), x.shape) * 1.0
        return _BUILTIN[self.kind](x)

    def sample_inputs(self, n: int, rng: np.random.Generator) -> np.ndarray:
        x = rng.standard_normal(n)
        if self.kind == "reciprocal":
            bad = np.abs(x) < RECIPROCAL_GUARD
            while np.any(bad):
                x[bad] = rng.standard_normal(int(bad.sum()))
                bad = np.abs(x) < RECIPROCAL_GUARD
        return x


@dataclass(frozen=True)
class NoiseModel:
    beta: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError("beta must be finite and >= 0")


def generate_dataset(target: TargetFunction, noise: NoiseModel, N: int, rng: np.random.Generator) -> Dataset:
    if N < 1:
        raise ValueError("N must be >= 1")
    x = target.sample_inputs(N, rng)
    eps = rng.standard_normal(N)
    return Dataset(x[:, None], target(x) + noise.beta * eps)


def make_sampler(target: TargetFunction, noise: NoiseModel, box: float | None = None):
    """Sampler ``(m, rng) -> (xs, ys)`` for Monte-Carlo risk; ``box`` truncates X to ``[-box, box]``."""
    def sampler(m, rng):
        if box is None:
            x = target.sample_inputs(m, rng)
        else:
            x = truncated_normal(m, box, rng)
        return x[:, None], target(x) + noise.beta * rng.standard_normal(m)
    return sampler


def truncated_normal(n: int, box: float, rng: np.random.Generator) -> np.ndarray:
    """Standard normal draws conditioned on ``|x| <= box`` (rejection sampling)."""
    out = np.empty(0)
    while out.size < n:
        x = rng.standard_normal(2 * (n - out.size) + 8)
        out = np.concatenate([out, x[np.abs(x) <= box]])
    return out[:n]
