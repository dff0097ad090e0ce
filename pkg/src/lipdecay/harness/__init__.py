"""Toy-experiment harness: targets, sweeps, SVG plots and the command line tool."""

from .plots import emit_plots
from .sweep import SweepResult, SweepSpec, default_arms, run_sweep
from .targets import NoiseModel, TargetFunction, generate_dataset, make_sampler

__all__ = ["NoiseModel", "SweepResult", "SweepSpec", "TargetFunction", "default_arms",
           "emit_plots", "generate_dataset", "make_sampler", "run_sweep"]
