"""Data-dependent learning-rate caps and the effective per-block learning rates.

Each cap divides ``C * g(s)`` by a data-dependent denominator evaluated on a
specific parameter snapshot. In the sequential update the snapshot for a block
is simply the in-progress state at the moment that block is updated:

====== ==============================================
block  snapshot (W, b, B, c)
====== ==============================================
W      (W_{s-1}, b_{s-1}, B_{s-1}, c_{s-1})
b      (W_s,     b_{s-1}, B_{s-1}, c_{s-1})
B      (W_s,     b_s,     B_{s-1}, c_{s-1})
c      (W_s,     b_s,     B_s,     c_{s-1})
====== ==============================================
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .linalg import DimensionError
from .network import get_activation
from .rates import RateFunction

BLOCKS = ("W", "b", "B", "c")
MODES = ("decay_cap", "constant", "hybrid_min", "backtracking")
DEGENERATE_DENOM = 1e-300


class Snapshot(NamedTuple):
    W: np.ndarray
    B: np.ndarray
    b: np.ndarray
    c: float


@dataclass(frozen=True)
class SchedulerConfig:
    C_W: float = 1.0
    C_B: float = 1.0
    C_b: float = 1.0
    C_c: float = 1.0
    rate: RateFunction = field(default_factory=RateFunction)
    mode: str = "decay_cap"
    alpha_const: float = 0.01
    enforce_caps: bool = False
    alpha_max: float = 1.0
    lip_RS: float | None = None
    lip_probes: int = 256
    lip_safety: float = 1.5
    bt_alpha0: float = 1.0
    bt_shrink: float = 0.5
    bt_armijo_c: float = 1e-4

    def __post_init__(self):
        for name in ("C_W", "C_B", "C_b", "C_c", "alpha_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if self.mode == "constant" and not self.alpha_const >= 0:
            raise ValueError("alpha_const must be >= 0")
        if self.lip_RS is not None and not self.lip_RS > 0:
            raise ValueError("lip_RS must be > 0")

    def C(self, block: str) -> float:
        return {"W": self.C_W, "B": self.C_B, "b": self.C_b, "c": self.C_c}[block]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rate"] = self.rate.to_dict()
        return out

    @classmethod
    def from_dict(cls, cfg: dict) -> "SchedulerConfig":
        cfg = dict(cfg)
        unknown = set(cfg) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown scheduler keys: {sorted(unknown)}")
        if "rate" in cfg:
            cfg["rate"] = RateFunction.from_dict(cfg["rate"])
        return cls(**cfg)


@dataclass(frozen=True)
class LRVector:
    alpha_W: float = 0.0
    alpha_B: float = 0.0
    alpha_b: float = 0.0
    alpha_c: float = 0.0
    cap_W: float = 0.0
    cap_B: float = 0.0
    cap_b: float = 0.0
    cap_c: float = 0.0

    def alpha(self, block: str) -> float:
        return getattr(self, f"alpha_{block}")

    def cap(self, block: str) -> float:
        return getattr(self, f"cap_{block}")

    @classmethod
    def uniform(cls, alpha: float) -> "LRVector":
        return cls(alpha, alpha, alpha, alpha, math.inf, math.inf, math.inf, math.inf)


def _hidden_norms(state, data, act, hidden=None) -> np.ndarray:
    """``||sigma(W x_n + b)||`` for every sample; ``hidden`` may carry a precomputed ``sigma(W x + b)``."""
    if data.xs.shape[1] != state.W.shape[1]:
        raise DimensionError(f"data has d={data.xs.shape[1]}, W has d={state.W.shape[1]}")
    h = act(data.xs @ state.W.T + state.b) if hidden is None else hidden
    return np.sqrt(np.sum(h * h, axis=1))


def _ratio(num: float, denom: float, alpha_max: float) -> float:
    if denom < DEGENERATE_DENOM:
        return alpha_max
    return num / denom


def _residual_bounds(state, data, act, hidden=None):
    hn = _hidden_norms(state, data, act, hidden)
    nB = float(np.sqrt(state.B @ state.B))
    return hn, nB, nB * hn + abs(state.c) + np.abs(data.ys)


def cap_W(state, data, act, C_W: float, g_s: float, alpha_max: float = 1.0,
          hidden=None) -> float:
    """Cap for the hidden weights; ``state`` is (W_{s-1}, b_{s-1}, B_{s-1}, c_{s-1})."""
    act = get_activation(act)
    _, nB, bracket = _residual_bounds(state, data, act, hidden)
    xnorm = np.sqrt(np.sum(data.xs * data.xs, axis=1))
    denom = act.L_sigma * nB * float(np.sum(bracket * xnorm))
    return _ratio(C_W * g_s, denom, alpha_max)


def cap_B(state, data, act, C_B: float, g_s: float, alpha_max: float = 1.0,
          hidden=None) -> float:
    """Cap for the output weights; ``state`` is (W_s, b_s, B_{s-1}, c_{s-1})."""
    act = get_activation(act)
    hn, _, bracket = _residual_bounds(state, data, act, hidden)
    return _ratio(C_B * g_s, float(np.sum(bracket * hn)), alpha_max)


def cap_b(state, data, act, C_b: float, g_s: float, alpha_max: float = 1.0,
          hidden=None) -> float:
    """Cap for the hidden bias; ``state`` is (W_s, b_{s-1}, B_{s-1}, c_{s-1}).

    Follows the displayed condition, which has no ``L_sigma`` factor.
    """
    act = get_activation(act)
    _, nB, bracket = _residual_bounds(state, data, act, hidden)
    return _ratio(C_b * g_s, nB * float(np.sum(bracket)), alpha_max)


def cap_c(state, data, act, C_c: float, g_s: float, alpha_max: float = 1.0,
          hidden=None) -> float:
    """Cap for the output bias; ``state`` is (W_s, b_s, B_s, c_{s-1})."""
    act = get_activation(act)
    _, _, bracket = _residual_bounds(state, data, act, hidden)
    return _ratio(C_c * g_s, float(np.sum(bracket)), alpha_max)


CAP_FUNCS = {"W": cap_W, "B": cap_B, "b": cap_b, "c": cap_c}


def effective_alpha(cap: float, config: SchedulerConfig, lip_RS: float | None = None) -> float:
    """Learning rate actually used for one block given its cap."""
    if config.mode == "decay_cap":
        return cap
    if config.mode == "constant":
        return min(config.alpha_const, cap) if config.enforce_caps else config.alpha_const
    if config.mode == "hybrid_min":
        if lip_RS is None:
            raise ValueError("hybrid_min mode needs a Lip(R_S) estimate")
        return min(1.0 / lip_RS, cap)
    raise ValueError(f"mode {config.mode!r} does not derive rates from caps")


def effective_lr(caps, config: SchedulerConfig, lip_RS: float | None = None) -> LRVector:
    """Combine the four caps (mapping block -> cap, or an LRVector) into an LRVector."""
    if isinstance(caps, LRVector):
        caps = {k: caps.cap(k) for k in BLOCKS}
    alphas = {k: effective_alpha(caps[k], config, lip_RS) for k in BLOCKS}
    return LRVector(
        alpha_W=alphas["W"], alpha_B=alphas["B"], alpha_b=alphas["b"], alpha_c=alphas["c"],
        cap_W=caps["W"], cap_B=caps["B"], cap_b=caps["b"], cap_c=caps["c"],
    )


class Scheduler:
    """Per-step rate provider: ``scheduler.at(s)`` is a callable ``(block, state, hidden=None) -> (alpha, cap)``."""

    def __init__(self, config: SchedulerConfig, data, act, lip_RS: float | None = None):
        self.config = config
        self.data = data
        self.act = get_activation(act)
        self.lip_RS = lip_RS if lip_RS is not None else config.lip_RS
        if config.mode == "hybrid_min" and self.lip_RS is None:
            raise ValueError("hybrid_min mode needs a Lip(R_S) estimate")

    def cap(self, block: str, s: int, state, hidden=None) -> float:
        g_s = self.config.rate.g(s)
        return CAP_FUNCS[block](state, self.data, self.act, self.config.C(block), g_s,
                                self.config.alpha_max, hidden)

    def at(self, s: int):
        def provider(block: str, state, hidden=None):
            cap = self.cap(block, s, state, hidden)
            return effective_alpha(cap, self.config, self.lip_RS), cap
        return provider
