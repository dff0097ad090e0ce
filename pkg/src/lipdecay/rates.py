"""Rate functions ``G`` and their derivatives ``g`` used to shape learning-rate caps.

Three decaying families plus a constant-``g`` variant for vanilla comparisons:

* ``exponential``: ``g(t) = lam*r*exp(-r t)``, ``G(t) = lam*(1 - exp(-r t))``
* ``polynomial``: ``g(t) = lam*t**(-r)``, ``G(t) = lam*(1 - t**(1-r)/(1-r))`` with ``r > 1``.
  Note this closed form has derivative ``-g`` and decreases to ``lam``; it is kept
  as written, and ``G*`` is its value at ``t = 1``.
* ``hybrid``: ``g`` equals ``lam`` up to ``tau`` then decays like ``lam*exp(-r(t-tau))``;
  ``G(t) = lam + int_0^t g``
* ``constant``: ``g(t) = lam``; unbounded ``G``, so ``G* = inf``
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

KINDS = ("exponential", "polynomial", "hybrid", "constant")


@dataclass(frozen=True)
class RateFunction:
    kind: str = "hybrid"
    lam: float = 1.0
    r: float = 1.0
    tau: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown rate kind {self.kind!r}")
        if not self.lam > 0:
            raise ValueError("lambda must be > 0")
        if self.kind == "polynomial" and not self.r > 1:
            raise ValueError("polynomial rate needs r > 1 (G is unbounded otherwise)")
        if self.kind in ("exponential", "hybrid") and not self.r > 0:
            raise ValueError("r must be > 0")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out

    @classmethod
    def from_dict(cls, cfg: dict) -> "RateFunction":
        cfg = dict(cfg)
        lam = cfg.pop("lambda", cfg.pop("lam", 1.0))
        return cls(kind=cfg.get("kind", "hybrid"), lam=float(lam),
                   r=float(cfg.get("r", 1.0)), tau=float(cfg.get("tau", 0.0)))

    def g(self, t: float) -> float:
        return eval_g(self, t)

    def G(self, t: float) -> float:
        return eval_G(self, t)


def eval_g(rf: RateFunction, t: float) -> float:
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"t must be finite and >= 0, got {t}")
    if rf.kind == "exponential":
        return rf.lam * rf.r * math.exp(-rf.r * t)
    if rf.kind == "polynomial":
        if t == 0:
            raise ValueError("polynomial g is singular at t = 0")
        return rf.lam * t ** (-rf.r)
    if rf.kind == "hybrid":
        return rf.lam if t <= rf.tau else rf.lam * math.exp(-rf.r * (t - rf.tau))
    return rf.lam


def eval_G(rf: RateFunction, t: float) -> float:
    if math.isnan(t) or t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if rf.kind == "exponential":
        return rf.lam * (1.0 - math.exp(-rf.r * t))
    if rf.kind == "polynomial":
        if t == 0:
            raise ValueError("polynomial G is defined for t > 0")
        if math.isinf(t):
            return rf.lam
        return rf.lam * (1.0 - t ** (1.0 - rf.r) / (1.0 - rf.r))
    if rf.kind == "hybrid":
        out = rf.lam + rf.lam * min(t, rf.tau)
        if t > rf.tau:
            out += (rf.lam / rf.r) * -math.expm1(-rf.r * (t - rf.tau))
        return out
    return rf.lam * t


def G_star(rf: RateFunction) -> float:
    """``sup_{t >= 1} G(t)``."""
    if rf.kind == "exponential":
        return rf.lam
    if rf.kind == "polynomial":
        # the closed form decreases from G(1) = lam*r/(r-1) towards lam
        return max(rf.lam, eval_G(rf, 1.0))
    if rf.kind == "hybrid":
        return rf.lam * (1.0 + rf.tau + 1.0 / rf.r)
    return math.inf


def g_sup_bound(rf: RateFunction) -> tuple[float, float]:
    """``(G*, g(1))``, the two rate constants every bound formula consumes."""
    return G_star(rf), eval_g(rf, 1.0)
