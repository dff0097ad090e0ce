"""Closed-form Lipschitz, norm-growth and generalization bounds, plus trajectory audits."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .rates import RateFunction, g_sup_bound

SLACK_TOL = 1e-9


@dataclass(frozen=True)
class BoundInputs:
    L_sigma: float
    p: int
    d: int
    C_W: float
    C_B: float
    N: int
    G_T: float
    g_1: float
    kappa: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        for k, v in asdict(self).items():
            if v < 0:
                raise ValueError(f"{k} must be nonnegative")


@dataclass(frozen=True)
class GenBoundInputs:
    diam_Q: float
    delta: float
    d: int
    D: int
    N: int
    Lambda: float

    def __post_init__(self):
        if self.d + self.D <= 2:
            raise ValueError("need d + D > 2")
        if not self.diam_Q > 0:
            raise ValueError("diam_Q must be > 0")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.N < 1:
            raise ValueError("N must be >= 1")


def lipschitz_bound_rhs(inp: BoundInputs) -> float:
    """High-probability bound on ``max_t Lip(f_t)`` for Gaussian-type initializations."""
    growth = 2.0 * max(inp.C_W, inp.C_B) * (inp.G_T + inp.g_1) / inp.N
    base = math.sqrt(inp.p) + inp.kappa * (math.sqrt(max(inp.p, inp.d)) + inp.eta)
    return inp.L_sigma * (base + growth) ** 2


def bound_failure_probability(eta: float) -> float:
    """``4 exp(-eta^2)``; the bound above fails with at most this probability."""
    return 4.0 * math.exp(-eta * eta)


def norm_growth_rhs(norm0: float, C: float, N: int, G_t: float, g_1: float) -> float:
    return norm0 + (2.0 * C / N) * (G_t + g_1)


def per_omega_lip_bound(norm_W0_op: float, norm_B0: float, C_W: float, C_B: float,
                        N: int, G_t: float, g_1: float, L_sigma: float) -> float:
    """Seed-wise Lipschitz bound from the realized initial norms."""
    return L_sigma * norm_growth_rhs(norm_W0_op, C_W, N, G_t, g_1) * norm_growth_rhs(norm_B0, C_B, N, G_t, g_1)


def param_cube_M(norms0_inf, C, N: int, d: int, G_star: float, g_1: float) -> float:
    """Cube radius from entrywise init magnitudes: ``max_i sqrt(d)*n_i + 2 C_i (G*+g(1))/N``.

    ``norms0_inf`` and ``C`` are 4-sequences ordered (W, B, b, c). The
    ``sqrt(d)`` relaxation only dominates the block norms when each block has
    at most ``d`` entries per row; :func:`cube_radius` is the form used for
    auditing.
    """
    return max(math.sqrt(d) * n + 2.0 * c * (G_star + g_1) / N for n, c in zip(norms0_inf, C))


def cube_radius(norms0, C, N: int, G_star: float, g_1: float) -> float:
    """Cube radius from the initial block norms ``(||W0||_op, ||B0||, ||b0||, |c0|)``.

    Every entry of a block is bounded by its norm, so the trajectory stays in
    ``[-M, M]^P`` whenever the norm-growth bounds hold.
    """
    return max(norm_growth_rhs(n, c, N, G_star, g_1) for n, c in zip(norms0, C))


def dimensional_constant(k: int) -> float:
    """Dimensional constant for the empirical-Wasserstein rate in dimension ``k = d + D``."""
    if k <= 2:
        raise ValueError("dimensional constant needs d + D > 2")
    h = k / 2.0 - 1.0
    return 2.0 * (h / (2.0 * (1.0 - 2.0 ** (1.0 - k / 2.0)))) ** (2.0 / k) * (1.0 + 1.0 / (2.0 * h)) * math.sqrt(k)


def concentration_term(d: int, D: int, N: int, delta: float) -> float:
    """``C_{d+D} / N^(1/d) + sqrt(ln(8/delta)) / sqrt(2N)``."""
    if not delta > 0:
        raise ValueError("delta must be > 0")
    return dimensional_constant(d + D) / N ** (1.0 / d) + math.sqrt(math.log(8.0 / delta)) / math.sqrt(2.0 * N)


def generalization_eta(diam_Q: float, N: int) -> float:
    return diam_Q / math.sqrt(2.0 * N)


def generalization_lambda(L_sigma: float, p: int, d: int, C_W: float, C_B: float, N: int,
                          G_T: float, g_1: float, diam_Q: float, kappa: float = 1.0) -> float:
    """Lipschitz bound evaluated at ``eta = diam_Q / sqrt(2N)``."""
    return lipschitz_bound_rhs(BoundInputs(L_sigma=L_sigma, p=p, d=d, C_W=C_W, C_B=C_B, N=N,
                                           G_T=G_T, g_1=g_1, kappa=kappa,
                                           eta=generalization_eta(diam_Q, N)))


def generalization_bound(gin: GenBoundInputs) -> float:
    return gin.Lambda * gin.diam_Q * concentration_term(gin.d, gin.D, gin.N, gin.delta)


# -- trajectory audit ----------------------------------------------------------

AUDIT_FAMILIES = ("norm_W", "norm_B", "norm_b", "abs_c", "per_omega_lip", "cube", "alpha_le_cap")
REQUIRED_COLUMNS = ("t", "norm_W_op", "norm_B", "norm_b", "abs_c", "lip_bound",
                    "alpha_W", "alpha_B", "alpha_b", "alpha_c", "cap_W", "cap_B", "cap_b", "cap_c")


@dataclass
class FamilyResult:
    passed: bool
    worst_slack: float
    worst_t: int | None
    failing_t: list[int] = field(default_factory=list)


@dataclass
class BoundReport:
    families: dict[str, FamilyResult]
    rhs: dict[str, list[float]]
    t: list[int]
    cube_M: float
    lip_bound_rhs: float | None = None

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.families.values())

    def summary_lines(self) -> list[str]:
        return [
            f"{name:<14} {'PASS' if f.passed else 'FAIL'}  worst_slack={f.worst_slack:.3e}"
            + ("" if f.passed else f"  first_fail_t={f.failing_t[0]}")
            for name, f in self.families.items()
        ]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "cube_M": self.cube_M,
            "lip_bound_rhs": self.lip_bound_rhs,
            "families": {k: asdict(v) for k, v in self.families.items()},
            "t": self.t,
            "rhs": self.rhs,
        }


def _family(slack: np.ndarray, ts: np.ndarray) -> FamilyResult:
    if slack.size == 0:
        return FamilyResult(True, math.inf, None)
    bad = ts[slack < -SLACK_TOL]
    i = int(np.argmin(slack))
    return FamilyResult(bool(bad.size == 0), float(slack[i]), int(ts[i]), [int(t) for t in bad])


def audit_columns(cols: dict, *, C_W: float, C_B: float, C_b: float, C_c: float,
                  rate: RateFunction, N: int, L_sigma: float) -> BoundReport:
    """Check a recorded trajectory (dict of column arrays) against every deterministic bound.

    The initial norms are read from the ``t = 0`` row, which must be present.
    """
    missing = [c for c in REQUIRED_COLUMNS if c not in cols]
    if missing:
        raise KeyError(f"log is missing columns: {missing}")
    col = {k: np.asarray(cols[k], dtype=np.float64) for k in REQUIRED_COLUMNS}
    ts = col["t"].astype(int)
    if ts.size == 0 or ts[0] != 0:
        raise ValueError("audit needs the initialization (t = 0) record")

    W0, B0, b0, c0 = (float(col[k][0]) for k in ("norm_W_op", "norm_B", "norm_b", "abs_c"))
    G_star, g_1 = g_sup_bound(rate)
    G_t = np.array([rate.G(max(float(t), 1.0)) if t > 0 else 0.0 for t in ts])
    # at t = 0 nothing has moved yet
    growth = np.where(ts > 0, G_t + g_1, 0.0)

    rhs = {
        "norm_W": W0 + 2.0 * C_W / N * growth,
        "norm_B": B0 + 2.0 * C_B / N * growth,
        "norm_b": b0 + 2.0 * C_b / N * growth,
        "abs_c": c0 + 2.0 * C_c / N * growth,
    }
    rhs["per_omega_lip"] = L_sigma * rhs["norm_W"] * rhs["norm_B"]
    M = cube_radius((W0, B0, b0, c0), (C_W, C_B, C_b, C_c), N, G_star, g_1)

    families = {
        "norm_W": _family(rhs["norm_W"] - col["norm_W_op"], ts),
        "norm_B": _family(rhs["norm_B"] - col["norm_B"], ts),
        "norm_b": _family(rhs["norm_b"] - col["norm_b"], ts),
        "abs_c": _family(rhs["abs_c"] - col["abs_c"], ts),
        "per_omega_lip": _family(rhs["per_omega_lip"] - col["lip_bound"], ts),
        "cube": _family(M - np.max(np.stack([col[k] for k in ("norm_W_op", "norm_B", "norm_b", "abs_c")]), axis=0), ts),
    }
    step = ts > 0
    cap_slack = np.min(np.stack([col[f"cap_{k}"] - col[f"alpha_{k}"] for k in ("W", "B", "b", "c")]), axis=0)
    families["alpha_le_cap"] = _family(cap_slack[step], ts[step])

    return BoundReport(
        families=families,
        rhs={k: v.tolist() for k, v in rhs.items()},
        t=ts.tolist(),
        cube_M=M,
    )


def audit_trajectory(log, config=None) -> BoundReport:
    """Audit a :class:`~lipdecay.trainer.TrainLog` against its own scheduler configuration."""
    config = config if config is not None else log.config
    sch = config.scheduler
    if sch.mode not in ("decay_cap", "hybrid_min"):
        raise ValueError(f"audit needs a decay_cap or hybrid_min log, got mode {sch.mode!r}")
    report = audit_columns(
        log.columns(), C_W=sch.C_W, C_B=sch.C_B, C_b=sch.C_b, C_c=sch.C_c,
        rate=sch.rate, N=log.N, L_sigma=log.L_sigma,
    )
    T = int(report.t[-1]) if report.t else 0
    report.lip_bound_rhs = lipschitz_bound_rhs(BoundInputs(
        L_sigma=log.L_sigma, p=config.p, d=config.d, C_W=sch.C_W, C_B=sch.C_B, N=log.N,
        G_T=sch.rate.G(max(T, 1)), g_1=sch.rate.g(1), kappa=config.kappa, eta=config.eta,
    ))
    return report


# -- convergence rate ------------------------------------------------------------

@dataclass
class RateCheck:
    T1: int
    T2: int
    m1: float
    m2: float
    ratio: float | None
    predicted_ratio: float
    converged: bool
    non_increasing: bool
    within_factor: bool

    def to_dict(self) -> dict:
        return asdict(self)


def running_min(series) -> float:
    return float(np.min(np.asarray(series, dtype=np.float64)))


def convergence_rate_check(series_by_T: dict, factor: float = 4.0, zero_tol: float = 1e-14) -> list[RateCheck]:
    """Compare ``m(T) = min_{t <= T} ||grad R_S||`` across budgets against ``1/sqrt(T+1)``.

    ``series_by_T`` maps a budget ``T`` to the gradient-norm series of a run
    with that budget. Consecutive budgets are compared pairwise.
    """
    if len(series_by_T) < 2:
        raise ValueError("need at least two budgets")
    Ts = sorted(series_by_T)
    out = []
    for T1, T2 in zip(Ts, Ts[1:]):
        m1 = running_min(series_by_T[T1])
        m2 = running_min(series_by_T[T2])
        pred = math.sqrt((T1 + 1) / (T2 + 1))
        if m1 <= zero_tol or m2 <= zero_tol:
            out.append(RateCheck(T1, T2, m1, m2, None, pred, True, m2 <= m1, True))
            continue
        ratio = m2 / m1
        out.append(RateCheck(T1, T2, m1, m2, ratio, pred, False, ratio <= 1.0,
                             pred / factor <= ratio <= pred * factor))
    return out
