"""Gradient descent for two-layer networks with learning-rate decay caps and Lipschitz audits."""

from .bounds import audit_trajectory, generalization_bound, lipschitz_bound_rhs
from .losses import Dataset, huber
from .network import Activation, NetworkShape, Params, forward, init_params
from .rates import RateFunction
from .scheduler import LRVector, SchedulerConfig
from .trainer import TrainConfig, TrainLog, gd_step, train

__version__ = "0.1.0"

__all__ = ["Activation", "Dataset", "LRVector", "NetworkShape", "Params", "RateFunction",
           "SchedulerConfig", "TrainConfig", "TrainLog", "audit_trajectory", "forward",
           "gd_step", "generalization_bound", "huber", "init_params", "lipschitz_bound_rhs",
           "train"]
