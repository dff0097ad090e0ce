"""Two-layer MLP ``x -> B . sigma(W x + b) + c`` and its Lipschitz measures."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .linalg import DimensionError, euclidean_norm, gaussian_matrix, operator_norm


def swish(x):
    return x * expit(x)


def swish_d1(x):
    s = expit(x)
    return s + x * s * (1.0 - s)


def swish_d2(x):
    s = expit(x)
    return s * (1.0 - s) * (2.0 + x * (1.0 - 2.0 * s))


@lru_cache(maxsize=None)
def _swish_lipschitz() -> float:
    # sup |swish'| is attained where swish'' vanishes, near x = 2.4
    x_star = brentq(swish_d2, 1.0, 4.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return float(swish_d1(x_star))


def _identity(x):
    return np.asarray(x, dtype=np.float64) * 1.0


def _ones(x):
    return np.ones_like(np.asarray(x, dtype=np.float64))


def _zeros(x):
    return np.zeros_like(np.asarray(x, dtype=np.float64))


def _tanh_d1(x):
    return 1.0 - np.tanh(x) ** 2


def _tanh_d2(x):
    t = np.tanh(x)
    return -2.0 * t * (1.0 - t * t)


_KINDS = {
    "swish": (swish, swish_d1, swish_d2),
    "identity": (_identity, _ones, _zeros),
    "tanh": (np.tanh, _tanh_d1, _tanh_d2),
}


@dataclass(frozen=True)
class Activation:
    """Componentwise activation with closed-form first and second derivatives."""

    kind: str = "swish"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown activation {self.kind!r}; choose from {sorted(_KINDS)}")

    def __call__(self, x):
        return _KINDS[self.kind][0](x)

    def d1(self, x):
        return _KINDS[self.kind][1](x)

    def d2(self, x):
        return _KINDS[self.kind][2](x)

    @property
    def L_sigma(self) -> float:
        """Global Lipschitz constant, i.e. ``sup |sigma'|``."""
        if self.kind == "swish":
            return _swish_lipschitz()
        return 1.0

    def bounds_on(self, lo: float, hi: float, n_grid: int = 200_001) -> tuple[float, float, float]:
        """Grid maxima of ``|sigma|``, ``|sigma'|``, ``|sigma''|`` on ``[lo, hi]``."""
        if not hi > lo:
            raise ValueError("interval must satisfy lo < hi")
        xs = np.linspace(lo, hi, n_grid)
        return (
            float(np.max(np.abs(self(xs)))),
            float(np.max(np.abs(self.d1(xs)))),
            float(np.max(np.abs(self.d2(xs)))),
        )


def get_activation(act) -> Activation:
    return act if isinstance(act, Activation) else Activation(str(act))


@dataclass(frozen=True)
class NetworkShape:
    d: int
    p: int

    def __post_init__(self):
        if self.d < 1 or self.p < 1:
            raise ValueError(f"need d >= 1 and p >= 1, got d={self.d}, p={self.p}")

    @property
    def P(self) -> int:
        """Nominal parameter-space dimension ``(1 + d)(p + 1)`` used in the bounds."""
        return (1 + self.d) * (self.p + 1)

    @property
    def n_params(self) -> int:
        """Actual number of scalars in (W, B, b, c), i.e. ``(d + 2) p + 1``."""
        return (self.d + 2) * self.p + 1


@dataclass(frozen=True, eq=False)
class Params:
    """Network parameters. ``W`` is p x d, ``B`` and ``b`` have length p, ``c`` is scalar."""

    W: np.ndarray
    B: np.ndarray
    b: np.ndarray
    c: float
    shape: NetworkShape = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        W = np.array(self.W, dtype=np.float64, ndmin=2)
        B = np.array(self.B, dtype=np.float64).ravel()
        b = np.array(self.b, dtype=np.float64).ravel()
        c = float(self.c)
        if W.ndim != 2 or B.shape[0] != W.shape[0] or b.shape[0] != W.shape[0]:
            raise DimensionError(
                f"inconsistent shapes W{W.shape}, B{B.shape}, b{b.shape}"
            )
        for arr in (W, B, b):
            arr.setflags(write=False)
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(B)) and np.all(np.isfinite(b)) and np.isfinite(c)):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "shape", NetworkShape(d=W.shape[1], p=W.shape[0]))

    def replace(self, **kw) -> "Params":
        vals = {"W": self.W, "B": self.B, "b": self.b, "c": self.c}
        vals.update(kw)
        return Params(**vals)

    def flatten(self) -> np.ndarray:
        """Flat vector in the order (W row-major, B, b, c)."""
        return np.concatenate([self.W.ravel(), self.B, self.b, [self.c]])

    @classmethod
    def unflatten(cls, flat, shape: NetworkShape) -> "Params":
        flat = np.asarray(flat, dtype=np.float64).ravel()
        if flat.size != shape.n_params:
            raise DimensionError(f"expected {shape.n_params} values, got {flat.size}")
        d, p = shape.d, shape.p
        i = 0
        W = flat[i:i + p * d].reshape(p, d)
        i += p * d
        B = flat[i:i + p]
        i += p
        b = flat[i:i + p]
        i += p
        return cls(W=W, B=B, b=b, c=flat[i])

    def to_json(self) -> str:
        return json.dumps(self.flatten().tolist())

    @classmethod
    def from_json(cls, text: str, shape: NetworkShape) -> "Params":
        return cls.unflatten(json.loads(text), shape)

    def __eq__(self, other):
        if not isinstance(other, Params):
            return NotImplemented
        return self.W.shape == other.W.shape and np.array_equal(self.flatten(), other.flatten())


def zero_params(shape: NetworkShape) -> Params:
    return Params(W=np.zeros((shape.p, shape.d)), B=np.zeros(shape.p), b=np.zeros(shape.p), c=0.0)


INIT_SCALES = ("unit", "fan_in")


def init_params(shape: NetworkShape, rng: np.random.Generator, bias_init: str = "zero",
                init_scale: str = "unit") -> Params:
    """Gaussian ``W`` and ``B``; biases zero unless ``bias_init='gaussian'``.

    ``init_scale='unit'`` draws standard normal entries. ``'fan_in'`` divides
    each weight by the square root of its layer's input width (``d`` for
    ``W``, ``p`` for ``B``); the underlying draws are identical.
    """
    if init_scale not in INIT_SCALES:
        raise ValueError(f"unknown init_scale {init_scale!r}")
    W = gaussian_matrix(shape.p, shape.d, rng)
    B = gaussian_matrix(shape.p, 1, rng).ravel()
    if init_scale == "fan_in":
        W = W / np.sqrt(shape.d)
        B = B / np.sqrt(shape.p)
    if bias_init == "zero":
        b, c = np.zeros(shape.p), 0.0
    elif bias_init == "gaussian":
        b = rng.standard_normal(shape.p)
        c = float(rng.standard_normal())
    else:
        raise ValueError(f"unknown bias_init {bias_init!r}")
    return Params(W=W, B=B, b=b, c=c)


def _check_inputs(theta: Params, xs: np.ndarray) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[None, :]
    if xs.shape[1] != theta.W.shape[1]:
        raise DimensionError(f"input dimension {xs.shape[1]} != d={theta.W.shape[1]}")
    return xs


def forward_batch(theta: Params, act, xs) -> np.ndarray:
    act = get_activation(act)
    xs = _check_inputs(theta, xs)
    return act(xs @ theta.W.T + theta.b) @ theta.B + theta.c


def forward(theta: Params, act, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError("forward expects a single input vector")
    return float(forward_batch(theta, act, x)[0])


def input_gradient(theta: Params, act, xs) -> np.ndarray:
    """Rows are ``grad_x f(x) = W^T (B * sigma'(W x + b))`` for each input row."""
    act = get_activation(act)
    xs = _check_inputs(theta, xs)
    return (act.d1(xs @ theta.W.T + theta.b) * theta.B) @ theta.W


def lipschitz_upper_bound(theta: Params, act) -> float:
    """Product bound ``L_sigma * ||B|| * ||W||_op``."""
    return get_activation(act).L_sigma * euclidean_norm(theta.B) * operator_norm(theta.W)


def empirical_lipschitz(theta: Params, act, lo, hi, n_samples: int, rng: np.random.Generator) -> float:
    """Largest input-gradient norm over ``n_samples`` uniform points of the box ``[lo, hi]``.

    A lower estimate of the true Lipschitz constant on the box.
    """
    d = theta.W.shape[1]
    lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), (d,))
    hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), (d,))
    if np.any(hi < lo):
        raise ValueError("empty box: need lo <= hi componentwise")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    xs = lo + (hi - lo) * rng.random((n_samples, d))
    g = input_gradient(theta, act, xs)
    return float(np.max(np.sqrt(np.sum(g * g, axis=1))))
