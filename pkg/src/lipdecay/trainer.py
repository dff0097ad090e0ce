"""Gradient descent on the MSE empirical risk with per-block learning rates.

The default update is sequential (Gauss-Seidel): blocks are updated in the
order W, b, B, c and each block's gradient is taken at the state left by the
blocks before it. ``simultaneous=True`` evaluates all four gradients at the
previous iterate instead. ``grad_norm`` always reports the simultaneous
gradient of the empirical risk at a single parameter point.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .bounds import cube_radius
from .linalg import DimensionError, euclidean_norm, make_rng, operator_norm
from .losses import Dataset, LossConfig, huber_risk, mse_risk
from .network import (Activation, NetworkShape, Params, empirical_lipschitz, get_activation,
                      init_params, lipschitz_upper_bound)
from .rates import g_sup_bound
from .scheduler import BLOCKS, LRVector, Scheduler, SchedulerConfig, Snapshot

# independent RNG substreams per run
STREAM_INIT, STREAM_DATA, STREAM_LIP, STREAM_PROBE = 0, 1, 2, 3


# -- gradients -----------------------------------------------------------------

def _forward_parts(W, B, b, c, xs, act):
    z = xs @ W.T + b
    h = act(z)
    return z, h, h @ B + c


def block_gradient(block: str, state, data: Dataset, act, _zh=None) -> np.ndarray | float:
    """Gradient of the MSE risk w.r.t. one block, at the given state."""
    act = get_activation(act)
    W, B, b, c = state.W, state.B, state.b, state.c
    N = data.N
    if _zh is None:
        z, h, f = _forward_parts(W, B, b, c, data.xs, act)
    else:
        z, h = _zh
        f = h @ B + c
    r = f - data.ys
    if block == "c":
        return float(2.0 / N * np.sum(r))
    if block == "B":
        return 2.0 / N * (r @ h)
    u = act.d1(z) * B * r[:, None]
    if block == "b":
        return 2.0 / N * np.sum(u, axis=0)
    if block == "W":
        return 2.0 / N * (u.T @ data.xs)
    raise ValueError(f"unknown block {block!r}")


def full_gradient(theta, data: Dataset, act) -> Snapshot:
    """All four block gradients at the same point."""
    act = get_activation(act)
    W, B, b, c = theta.W, theta.B, theta.b, theta.c
    N = data.N
    z, h, f = _forward_parts(W, B, b, c, data.xs, act)
    r = f - data.ys
    u = act.d1(z) * B * r[:, None]
    return Snapshot(W=2.0 / N * (u.T @ data.xs), B=2.0 / N * (r @ h),
                    b=2.0 / N * np.sum(u, axis=0), c=float(2.0 / N * np.sum(r)))


def grad_norm(theta, data: Dataset, act) -> float:
    g = full_gradient(theta, data, act)
    return euclidean_norm(np.concatenate([g.W.ravel(), g.B, g.b, [g.c]]))


# -- one GD step -----------------------------------------------------------------

RateProvider = Callable[..., "tuple[float, float]"]


class TraceEntry(NamedTuple):
    block: str
    snapshot: Snapshot
    gradient: np.ndarray | float
    alpha: float


def _as_provider(lrs) -> RateProvider:
    if isinstance(lrs, LRVector):
        return lambda block, state, hidden=None: (lrs.alpha(block), lrs.cap(block))
    if isinstance(lrs, (int, float)):
        return lambda block, state, hidden=None: (float(lrs), math.inf)
    return lrs


def _check_finite(block: str, value, t) -> None:
    if not np.all(np.isfinite(value)):
        raise FloatingPointError(f"non-finite {block} update at step {t}; reduce the learning rate")


def gd_step(theta: Params, data: Dataset, act, lrs, *, simultaneous: bool = False,
            trace: list | None = None, t: int | None = None) -> tuple[Params, LRVector]:
    """One gradient-descent iteration ``theta_{t-1} -> theta_t``.

    ``lrs`` is an :class:`LRVector`, a scalar, or a provider
    ``(block, snapshot, hidden) -> (alpha, cap)`` called with the exact
    snapshot the block's update reads (``hidden`` is ``sigma(W x + b)`` at
    that snapshot, passed so caps need not recompute it). If ``trace`` is a list, one :class:`TraceEntry` per
    block is appended.
    """
    if data.d != theta.W.shape[1]:
        raise DimensionError(f"data has d={data.d}, network has d={theta.W.shape[1]}")
    act = get_activation(act)
    provider = _as_provider(lrs)
    W, B, b, c = theta.W, theta.B, theta.b, theta.c
    alphas, caps = {}, {}

    if simultaneous:
        snap = Snapshot(W, B, b, c)
        grads = full_gradient(snap, data, act)
        hidden = act(data.xs @ W.T + b)
        new = {}
        for blk in BLOCKS:
            alphas[blk], caps[blk] = provider(blk, snap, hidden)
            new[blk] = getattr(snap, blk) - alphas[blk] * getattr(grads, blk)
            _check_finite(blk, new[blk], t)
            if trace is not None:
                trace.append(TraceEntry(blk, snap, getattr(grads, blk), alphas[blk]))
        W, B, b, c = new["W"], new["B"], new["b"], new["c"]
    else:
        state = {"W": W, "B": B, "b": b, "c": c}
        for blk in BLOCKS:
            snap = Snapshot(state["W"], state["B"], state["b"], state["c"])
            z = data.xs @ snap.W.T + snap.b
            h = act(z)
            alphas[blk], caps[blk] = provider(blk, snap, h)
            grad = block_gradient(blk, snap, data, act, (z, h))
            state[blk] = state[blk] - alphas[blk] * grad
            _check_finite(blk, state[blk], t)
            if trace is not None:
                trace.append(TraceEntry(blk, snap, grad, alphas[blk]))
        W, B, b, c = state["W"], state["B"], state["b"], state["c"]

    lr = LRVector(alpha_W=alphas["W"], alpha_B=alphas["B"], alpha_b=alphas["b"], alpha_c=alphas["c"],
                  cap_W=caps["W"], cap_B=caps["B"], cap_b=caps["b"], cap_c=caps["c"])
    return Params(W=W, B=B, b=b, c=c), lr


# -- line search and Lip(R_S) --------------------------------------------------------

class BacktrackResult(NamedTuple):
    theta: Params
    alpha: float
    accepted: bool


def backtracking_step(theta: Params, data: Dataset, act, alpha0: float = 1.0,
                      shrink: float = 0.5, armijo_c: float = 1e-4, max_shrinks: int = 60) -> BacktrackResult:
    """Armijo backtracking along the simultaneous negative gradient of the MSE risk.

    After ``max_shrinks`` rejected trials the step is abandoned and ``theta``
    is returned unchanged with ``accepted=False``.
    """
    if not alpha0 > 0 or not 0 < shrink < 1 or not 0 < armijo_c < 1:
        raise ValueError("need alpha0 > 0, 0 < shrink < 1 and 0 < armijo_c < 1")
    act = get_activation(act)
    g = full_gradient(theta, data, act)
    flat_g = np.concatenate([g.W.ravel(), g.B, g.b, [g.c]])
    gsq = float(flat_g @ flat_g)
    r0 = mse_risk(theta, act, data)
    flat = theta.flatten()
    alpha = alpha0
    for _ in range(max_shrinks + 1):
        cand = flat - alpha * flat_g
        if np.all(np.isfinite(cand)):
            new = Params.unflatten(cand, theta.shape)
            if mse_risk(new, act, data) <= r0 - armijo_c * alpha * gsq:
                return BacktrackResult(new, alpha, True)
        alpha *= shrink
    return BacktrackResult(theta, 0.0, False)


def estimate_lip_RS(data: Dataset, act, shape: NetworkShape, cube_M: float, n_probe: int,
                    rng: np.random.Generator, safety: float = 1.5) -> float:
    """``safety`` times the largest gradient norm of the MSE risk over uniform probes of ``[-M, M]^P``."""
    if not cube_M > 0:
        raise ValueError("cube_M must be > 0")
    if n_probe < 1:
        raise ValueError("n_probe must be >= 1")
    act = get_activation(act)
    best = 0.0
    for _ in range(n_probe):
        flat = cube_M * (2.0 * rng.random(shape.n_params) - 1.0)
        best = max(best, grad_norm(Params.unflatten(flat, shape), data, act))
    return safety * best


# -- training loop ------------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    d: int = 1
    p: int = 50
    activation: str = "swish"
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    T: int = 100
    seed: int = 0
    loss: LossConfig = field(default_factory=LossConfig)
    log_every: int = 1
    lip_domain: tuple[float, float] | None = None
    lip_samples: int = 512
    bias_init: str = "zero"
    init_scale: str = "unit"
    simultaneous: bool = False
    kappa: float = 1.0
    eta: float = 2.0

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("T must be >= 0")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")
        NetworkShape(self.d, self.p)
        Activation(self.activation)

    @property
    def shape(self) -> NetworkShape:
        return NetworkShape(self.d, self.p)

    def replace(self, **kw) -> "TrainConfig":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(kw)
        return TrainConfig(**vals)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["scheduler"] = self.scheduler.to_dict()
        out["loss"] = asdict(self.loss)
        out["lip_domain"] = list(self.lip_domain) if self.lip_domain is not None else None
        return out

    @classmethod
    def from_dict(cls, cfg: dict) -> "TrainConfig":
        cfg = dict(cfg)
        unknown = set(cfg) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown train keys: {sorted(unknown)}")
        if "scheduler" in cfg:
            cfg["scheduler"] = SchedulerConfig.from_dict(cfg["scheduler"])
        if "loss" in cfg:
            cfg["loss"] = LossConfig(**cfg["loss"])
        if cfg.get("lip_domain") is not None:
            cfg["lip_domain"] = tuple(float(v) for v in cfg["lip_domain"])
        return cls(**cfg)


@dataclass(frozen=True)
class IterationRecord:
    t: int
    alpha_W: float
    alpha_B: float
    alpha_b: float
    alpha_c: float
    cap_W: float
    cap_B: float
    cap_b: float
    cap_c: float
    norm_W_op: float
    norm_B: float
    norm_b: float
    abs_c: float
    lip_bound: float
    lip_empirical: float
    mse_risk: float
    huber_risk: float
    grad_norm: float
    wallclock_ns: int


RECORD_COLUMNS = tuple(f.name for f in fields(IterationRecord))
NUMERIC_COLUMNS = tuple(c for c in RECORD_COLUMNS if c not in ("t", "wallclock_ns"))


@dataclass
class TrainLog:
    config: TrainConfig
    records: list[IterationRecord]
    final_params: Params
    init_params: Params
    N: int
    L_sigma: float
    lip_RS: float | None = None
    cube_M: float | None = None

    def columns(self) -> dict[str, np.ndarray]:
        return {c: np.array([getattr(r, c) for r in self.records]) for c in RECORD_COLUMNS}

    def sidecar(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "N": self.N,
            "L_sigma": self.L_sigma,
            "lip_RS": self.lip_RS,
            "cube_M": self.cube_M,
            "init_params": self.init_params.flatten().tolist(),
            "final_params": self.final_params.flatten().tolist(),
        }

    def write(self, csv_path, json_path=None) -> None:
        csv_path = Path(csv_path)
        write_records_csv(self.records, csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        json_path.write_text(json.dumps(self.sidecar(), indent=2))


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow([repr(getattr(r, c)) for c in RECORD_COLUMNS])


def read_log_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty log")
    header = rows[0]
    data = [[float(v) for v in r] for r in rows[1:] if r]
    arr = np.array(data, dtype=np.float64).reshape(len(data), len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def default_lip_domain(data: Dataset, inflate: float = 0.2) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = data.xs.min(axis=0), data.xs.max(axis=0)
    pad = inflate * 0.5 * (hi - lo)
    pad = np.where(pad > 0, pad, inflate)
    return lo - pad, hi + pad


def _record(t, theta, lr, act, data, config, lo, hi, lip_rng, t0) -> IterationRecord:
    lip_emp = (empirical_lipschitz(theta, act, lo, hi, config.lip_samples, lip_rng)
               if config.lip_samples >= 2 else math.nan)
    risk, gnorm = mse_risk(theta, act, data), grad_norm(theta, data, act)
    # parameters can stay finite while the residuals overflow
    if not (math.isfinite(risk) and math.isfinite(gnorm)):
        raise FloatingPointError(f"training diverged by step {t}: risk={risk}, grad_norm={gnorm}")
    return IterationRecord(
        t=t,
        alpha_W=lr.alpha_W, alpha_B=lr.alpha_B, alpha_b=lr.alpha_b, alpha_c=lr.alpha_c,
        cap_W=lr.cap_W, cap_B=lr.cap_B, cap_b=lr.cap_b, cap_c=lr.cap_c,
        norm_W_op=operator_norm(theta.W), norm_B=euclidean_norm(theta.B),
        norm_b=euclidean_norm(theta.b), abs_c=abs(theta.c),
        lip_bound=lipschitz_upper_bound(theta, act),
        lip_empirical=lip_emp,
        mse_risk=risk,
        huber_risk=huber_risk(theta, act, data, config.loss.huber_delta),
        grad_norm=gnorm,
        wallclock_ns=time.perf_counter_ns() - t0,
    )


def initial_params(config: TrainConfig) -> Params:
    """Initialization drawn from the run seed only, so it is shared across datasets."""
    return init_params(config.shape, make_rng(config.seed, STREAM_INIT), config.bias_init, config.init_scale)


def train(config: TrainConfig, data: Dataset, theta0: Params | None = None) -> TrainLog:
    """Run ``config.T`` GD iterations and log every ``config.log_every``-th iterate.

    Rates and caps at step ``s`` use ``g(s)``. In ``backtracking`` mode each
    step is an Armijo line search on the simultaneous gradient; the logged
    caps are then evaluated at the pre-step iterate and are not enforced.
    """
    if data.d != config.d:
        raise DimensionError(f"data has d={data.d}, config has d={config.d}")
    act = get_activation(config.activation)
    sch = config.scheduler
    theta = theta0 if theta0 is not None else initial_params(config)
    if theta.shape != config.shape:
        raise DimensionError("theta0 does not match the configured shape")
    lo, hi = config.lip_domain if config.lip_domain is not None else default_lip_domain(data)
    lip_rng = make_rng(config.seed, STREAM_LIP)

    G_star, g_1 = g_sup_bound(sch.rate)
    norms0 = (operator_norm(theta.W), euclidean_norm(theta.B), euclidean_norm(theta.b), abs(theta.c))
    cube_M = cube_radius(norms0, (sch.C_W, sch.C_B, sch.C_b, sch.C_c), data.N, G_star, g_1)

    lip_RS = sch.lip_RS
    if sch.mode == "hybrid_min" and lip_RS is None:
        if not math.isfinite(cube_M):
            raise ValueError("hybrid_min needs a bounded rate function to size the probe cube")
        lip_RS = estimate_lip_RS(data, act, config.shape, cube_M, sch.lip_probes,
                                 make_rng(config.seed, STREAM_PROBE), sch.lip_safety)
    scheduler = Scheduler(sch, data, act, lip_RS)

    t0 = time.perf_counter_ns()
    records = [_record(0, theta, LRVector(), act, data, config, lo, hi, lip_rng, t0)]
    init = theta
    for t in range(1, config.T + 1):
        if sch.mode == "backtracking":
            caps = [scheduler.cap(blk, t, theta) for blk in ("W", "B", "b", "c")]
            res = backtracking_step(theta, data, act, sch.bt_alpha0, sch.bt_shrink, sch.bt_armijo_c)
            theta = res.theta
            lr = LRVector(*(4 * (res.alpha,)), *caps)
        else:
            theta, lr = gd_step(theta, data, act, scheduler.at(t), simultaneous=config.simultaneous, t=t)
        if t % config.log_every == 0:
            records.append(_record(t, theta, lr, act, data, config, lo, hi, lip_rng, t0))
    return TrainLog(config=config, records=records, final_params=theta, init_params=init,
                    N=data.N, L_sigma=act.L_sigma, lip_RS=lip_RS, cube_M=cube_M)
