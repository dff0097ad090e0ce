"""JSON run configuration.

A config file is one JSON object::

    {
      "name": "quickstart",
      "data":  {"target": "cubic_sqrt", "beta": 0.03, "N": 50},
      "train": {"p": 50, "T": 200, "seed": 0, "scheduler": {...}},
      "sweep": {"axis": "N", "values": [25, 100, 400], "n_seeds": 20, "arms": {...}}
    }

``data`` and ``train`` are used by ``train``; ``sweep`` additionally by
``sweep``, where ``train`` overrides the sweep defaults and ``data`` supplies
the fixed N and beta of the non-swept axes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..trainer import TrainConfig
from .sweep import SweepSpec, default_base
from .targets import NoiseModel, TargetFunction

TOP_KEYS = {"name", "data", "train", "sweep"}
DATA_KEYS = {"target", "expr", "beta", "N"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DataSpec:
    target: TargetFunction
    noise: NoiseModel
    N: int


@dataclass(frozen=True)
class RunConfig:
    name: str
    data: DataSpec
    train: TrainConfig
    raw: dict

    def sweep_spec(self) -> SweepSpec:
        sw = self.raw.get("sweep")
        if not isinstance(sw, dict):
            raise ConfigError("config has no 'sweep' section")
        base = default_base().to_dict()
        base.update(self.raw.get("train", {}))
        try:
            return SweepSpec.from_dict({**sw, "base": base, "target": _target_dict(self.data.target),
                                        "N": self.data.N, "beta": self.data.noise.beta})
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"sweep: {exc}") from exc


def _target_dict(t: TargetFunction) -> dict:
    return {"kind": t.kind, "expr": t.expr}


def parse_config(raw: dict, default_name: str = "run") -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    data = raw.get("data", {})
    if set(data) - DATA_KEYS:
        raise ConfigError(f"unknown data keys: {sorted(set(data) - DATA_KEYS)}")
    try:
        ds = DataSpec(
            target=TargetFunction(data.get("target", "cubic_sqrt"), data.get("expr")),
            noise=NoiseModel(float(data.get("beta", 0.03))),
            N=int(data.get("N", 100)),
        )
        if ds.N < 1:
            raise ValueError("N must be >= 1")
        train = TrainConfig.from_dict(raw.get("train", {}))
    except (TypeError, ValueError, KeyError, SyntaxError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(name=str(raw.get("name", default_name)), data=ds, train=train, raw=raw)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(raw, default_name=path.stem)
