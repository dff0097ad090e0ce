"""Render ``aggregate.csv`` as SVG figures."""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np

from .svg import Series, line_plot
from .sweep import read_aggregate

PLOT_METRICS = ("lip_bound", "lip_empirical", "mse_risk", "huber_risk", "grad_norm", "norm_W_op", "norm_B")
LABELS = {
    "lip_bound": "Lipschitz bound L_sigma |B| |W|_op",
    "lip_empirical": "empirical Lipschitz constant",
    "mse_risk": "training MSE",
    "huber_risk": "training Huber risk",
    "grad_norm": "gradient norm",
    "norm_W_op": "|W|_op",
    "norm_B": "|B|",
}


def _fmt(v: float) -> str:
    return f"{int(v)}" if float(v).is_integer() else f"{v:g}"


def _series(rows, metric, label) -> Series | None:
    rows = sorted(rows, key=lambda r: r["t"])
    mean = np.array([r.get(f"{metric}_mean", np.nan) for r in rows], dtype=np.float64)
    if not np.any(np.isfinite(mean)):
        return None
    std = np.array([r.get(f"{metric}_std", np.nan) for r in rows], dtype=np.float64)
    return Series(label, np.array([r["t"] for r in rows], dtype=np.float64), mean, std)


def emit_plots(csv_path, out_dir, metrics=PLOT_METRICS) -> list[Path]:
    """Write SVG plots and return their paths.

    For each metric and axis value, one plot overlays the arms. For each metric
    and arm, one plot overlays the axis values. Metrics without finite data are
    skipped with a ``RuntimeWarning``.
    """
    rows = read_aggregate(csv_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not rows:
        warnings.warn(f"{csv_path}: no data rows, nothing plotted", RuntimeWarning, stacklevel=2)
        return []
    axis = rows[0]["axis"]
    arms = list(dict.fromkeys(r["arm"] for r in rows))
    values = list(dict.fromkeys(r["value"] for r in rows))
    written = []
    for metric in metrics:
        if not any(np.isfinite(r.get(f"{metric}_mean", np.nan)) for r in rows):
            warnings.warn(f"metric {metric!r} has no finite values; plot skipped", RuntimeWarning, stacklevel=2)
            continue
        for v in values:
            series = [s for arm in arms
                      if (s := _series([r for r in rows if r["arm"] == arm and r["value"] == v], metric, arm))]
            path = out / f"{metric}__{axis}={_fmt(v)}.svg"
            path.write_text(line_plot(series, title=f"{LABELS.get(metric, metric)}, {axis} = {_fmt(v)}",
                                      xlabel="iteration t", ylabel=metric))
            written.append(path)
        if len(values) > 1:
            for arm in arms:
                series = [s for v in values
                          if (s := _series([r for r in rows if r["arm"] == arm and r["value"] == v],
                                           metric, f"{axis} = {_fmt(v)}"))]
                path = out / f"{metric}__{arm}__by_{axis}.svg"
                path.write_text(line_plot(series, title=f"{LABELS.get(metric, metric)}, {arm} arm",
                                          xlabel="iteration t", ylabel=metric))
                written.append(path)
    return written
