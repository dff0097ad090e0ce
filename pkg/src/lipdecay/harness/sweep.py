"""Multi-seed sweeps over N, width or noise, with paired decay / constant arms."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..linalg import make_rng
from ..losses import true_risk_mc
from ..rates import RateFunction
from ..scheduler import SchedulerConfig
from ..trainer import RECORD_COLUMNS, STREAM_DATA, TrainConfig, TrainLog, train
from .targets import NoiseModel, TargetFunction, generate_dataset, make_sampler

AXES = ("N", "p", "P", "beta")
STREAM_TEST = 4
AGG_COLUMNS = tuple(c for c in RECORD_COLUMNS if c != "t")
KEY_COLUMNS = ("arm", "axis", "value", "N", "p", "P", "n_params", "beta", "t", "n_seeds", "n_failed")

# defaults for the toy experiments
DEFAULT_P = 200
DEFAULT_N = 100
DEFAULT_BETA = 0.03
DEFAULT_SEEDS = 20
DEFAULT_T = 100
CONSTANT_ALPHA = 0.01


def default_arms() -> dict[str, SchedulerConfig]:
    """Decay arm (caps with a constant-then-exponential rate) and the constant 0.01 arm."""
    return {
        "decay": SchedulerConfig(C_W=10.0, C_B=10.0, C_b=10.0, C_c=10.0,
                                 rate=RateFunction("hybrid", lam=1.0, r=0.1, tau=50.0),
                                 mode="decay_cap"),
        "constant": SchedulerConfig(mode="constant", alpha_const=CONSTANT_ALPHA),
    }


def default_base() -> TrainConfig:
    return TrainConfig(d=1, p=DEFAULT_P, T=DEFAULT_T, init_scale="fan_in")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    n_seeds: int = DEFAULT_SEEDS
    base: TrainConfig = field(default_factory=default_base)
    target: TargetFunction = field(default_factory=TargetFunction)
    N: int = DEFAULT_N
    beta: float = DEFAULT_BETA
    arms: dict = field(default_factory=default_arms)
    seed0: int = 0
    test_samples: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if len(self.values) == 0:
            raise ValueError("values must be nonempty")
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")
        if not self.arms:
            raise ValueError("need at least one arm")
        if self.base.d != 1:
            raise ValueError("sweeps use univariate inputs (d = 1)")
        object.__setattr__(self, "values", tuple(self.values))
        for v in self.values:
            self.cell_setup(v)

    def cell_setup(self, value) -> tuple[int, int, float]:
        """``(N, p, beta)`` for one axis value."""
        N, p, beta = self.N, self.base.p, self.beta
        if self.axis == "N":
            N = int(value)
            if N != value or N < 1:
                raise ValueError(f"N must be a positive integer, got {value!r}")
        elif self.axis == "p":
            p = int(value)
            if p != value or p < 1:
                raise ValueError(f"p must be a positive integer, got {value!r}")
        elif self.axis == "P":
            d = self.base.d
            if value % (1 + d) != 0 or value // (1 + d) - 1 < 1:
                raise ValueError(f"P={value!r} is not (1 + d)(p + 1) for an integer width p >= 1")
            p = int(value // (1 + d) - 1)
        else:
            beta = float(value)
            NoiseModel(beta)
        return N, p, beta

    def seeds(self) -> range:
        return range(self.seed0, self.seed0 + self.n_seeds)

    def to_dict(self) -> dict:
        return {
            "axis": self.axis, "values": list(self.values), "n_seeds": self.n_seeds,
            "base": self.base.to_dict(),
            "target": {"kind": self.target.kind, "expr": self.target.expr},
            "N": self.N, "beta": self.beta,
            "arms": {k: v.to_dict() for k, v in self.arms.items()},
            "seed0": self.seed0, "test_samples": self.test_samples, "n_jobs": self.n_jobs,
        }

    @classmethod
    def from_dict(cls, cfg: dict) -> "SweepSpec":
        cfg = dict(cfg)
        unknown = set(cfg) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown sweep keys: {sorted(unknown)}")
        if "base" in cfg:
            cfg["base"] = TrainConfig.from_dict(cfg["base"])
        if "target" in cfg:
            t = cfg["target"]
            cfg["target"] = TargetFunction(**t) if isinstance(t, dict) else TargetFunction(t)
        if "arms" in cfg:
            cfg["arms"] = {k: SchedulerConfig.from_dict(v) for k, v in cfg["arms"].items()}
        return cls(**cfg)


@dataclass
class CellResult:
    arm: str
    value: object
    seed: int
    log: TrainLog | None
    error: str | None = None
    test_risk: float = math.nan
    test_risk_se: float = math.nan

    @property
    def ok(self) -> bool:
        return self.log is not None


def _run_cell(spec: SweepSpec, arm: str, value, seed: int) -> CellResult:
    N, p, beta = spec.cell_setup(value)
    noise = NoiseModel(beta)
    # data and init depend on the seed only, so arms are paired
    data = generate_dataset(spec.target, noise, N, make_rng(seed, STREAM_DATA))
    cfg = spec.base.replace(p=p, seed=seed, scheduler=spec.arms[arm])
    try:
        log = train(cfg, data)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return CellResult(arm, value, seed, None, f"{type(exc).__name__}: {exc}")
    res = CellResult(arm, value, seed, log)
    if spec.test_samples > 0:
        res.test_risk, res.test_risk_se = true_risk_mc(
            log.final_params, cfg.activation, make_sampler(spec.target, noise),
            spec.test_samples, make_rng(seed, STREAM_TEST), cfg.loss.huber_delta)
    return res


def _run_cell_args(args):
    return _run_cell(*args)


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: list[CellResult]

    def cells_for(self, arm: str, value) -> list[CellResult]:
        return [c for c in self.cells if c.arm == arm and c.value == value]

    def final(self, arm: str, value, column: str = "lip_bound") -> np.ndarray:
        """Final-iterate ``column`` for every successful seed of one cell group."""
        return np.array([getattr(c.log.records[-1], column) for c in self.cells_for(arm, value) if c.ok])

    def test_risks(self, arm: str, value) -> np.ndarray:
        return np.array([c.test_risk for c in self.cells_for(arm, value) if c.ok])

    @property
    def failed(self) -> list[CellResult]:
        return [c for c in self.cells if not c.ok]

    def aggregate_rows(self) -> list[dict]:
        return aggregate(self.spec, self.cells)

    def write(self, out_dir) -> Path:
        """Write per-seed logs, ``aggregate.csv``, ``summary.csv`` and ``sweep.json``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for c in self.cells:
            if c.ok:
                d = out / c.arm / f"{self.spec.axis}={c.value}"
                d.mkdir(parents=True, exist_ok=True)
                c.log.write(d / f"log_seed{c.seed}.csv")
        write_aggregate(self.aggregate_rows(), out / "aggregate.csv")
        with open(out / "summary.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["arm", "axis", "value", "seed", "ok", "final_lip_bound", "final_lip_empirical",
                        "final_mse_risk", "final_huber_risk", "test_huber_risk", "test_huber_risk_se", "error"])
            for c in self.cells:
                last = c.log.records[-1] if c.ok else None
                w.writerow([c.arm, self.spec.axis, c.value, c.seed, int(c.ok),
                            *(repr(getattr(last, k)) if last else "" for k in
                              ("lip_bound", "lip_empirical", "mse_risk", "huber_risk")),
                            repr(c.test_risk), repr(c.test_risk_se), c.error or ""])
        (out / "sweep.json").write_text(json.dumps(self.spec.to_dict(), indent=2))
        return out / "aggregate.csv"


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Train every (axis value, seed, arm) cell; failures are recorded per cell."""
    jobs = [(spec, arm, v, s) for v in spec.values for s in spec.seeds() for arm in spec.arms]
    if spec.n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.n_jobs) as pool:
            cells = list(pool.map(_run_cell_args, jobs))
    else:
        cells = [_run_cell(*j) for j in jobs]
    return SweepResult(spec, cells)


def aggregate(spec: SweepSpec, cells: list[CellResult]) -> list[dict]:
    """One row per (arm, axis value, t): across-seed mean and population std of each column."""
    rows = []
    for arm in spec.arms:
        for v in spec.values:
            group = [c for c in cells if c.arm == arm and c.value == v]
            ok = [c for c in group if c.ok]
            if not ok:
                continue
            N, p, beta = spec.cell_setup(v)
            shape = ok[0].log.config.shape
            stacks = {k: np.array([[getattr(r, k) for r in c.log.records] for c in ok], dtype=np.float64)
                      for k in AGG_COLUMNS}
            ts = [r.t for r in ok[0].log.records]
            for i, t in enumerate(ts):
                row = {"arm": arm, "axis": spec.axis, "value": v, "N": N, "p": p, "P": shape.P,
                       "n_params": shape.n_params, "beta": beta, "t": t,
                       "n_seeds": len(ok), "n_failed": len(group) - len(ok)}
                for k, arr in stacks.items():
                    row[f"{k}_mean"] = float(np.mean(arr[:, i]))
                    row[f"{k}_std"] = float(np.std(arr[:, i]))
                rows.append(row)
    return rows


def aggregate_header() -> list[str]:
    return list(KEY_COLUMNS) + [f"{k}_{s}" for k in AGG_COLUMNS for s in ("mean", "std")]


def write_aggregate(rows: list[dict], path) -> None:
    header = aggregate_header()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(row[h]) if isinstance(row[h], float) else row[h] for h in header])


def read_aggregate(path) -> list[dict]:
    """Parse ``aggregate.csv``; raises ``ValueError`` if key columns are missing."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file")
        missing = [k for k in ("arm", "axis", "value", "t") if k not in reader.fieldnames]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        rows = []
        for raw in reader:
            row = {}
            for k, v in raw.items():
                if k in ("arm", "axis"):
                    row[k] = v
                elif v is None or v == "":
                    row[k] = math.nan
                else:
                    try:
                        row[k] = float(v)
                    except ValueError as exc:
                        raise ValueError(f"{path}: bad value {v!r} in column {k}") from exc
            rows.append(row)
    return rows
