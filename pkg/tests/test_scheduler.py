import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_data, random_params
from lipdecay.linalg import DimensionError, make_rng, operator_norm
from lipdecay.losses import Dataset
from lipdecay.network import Activation, Params
from lipdecay.rates import RateFunction
from lipdecay.scheduler import (BLOCKS, LRVector, Scheduler, SchedulerConfig, Snapshot, cap_B, cap_W,
                                cap_b, cap_c, effective_alpha, effective_lr)
from lipdecay.trainer import gd_step

ONE = Dataset([[1.0]], [0.0])
UNIT = Params(W=[[1.0]], B=[1.0], b=[0.0], c=0.0)
CAPS = {"W": cap_W, "B": cap_B, "b": cap_b, "c": cap_c}
seeds = st.integers(0, 2**32 - 1)


def test_cap_W_examples():
    assert cap_W(UNIT, ONE, "identity", 1.0, 1.0) == 1.0
    assert cap_W(UNIT, Dataset([[1.0]], [1.0]), "identity", 1.0, 1.0) == 0.5


def test_cap_W_degenerate_B():
    assert cap_W(UNIT.replace(B=[0.0]), ONE, "identity", 1.0, 1.0, alpha_max=0.7) == 0.7


def test_cap_B_examples():
    assert cap_B(UNIT, ONE, "identity", 1.0, 1.0) == 1.0
    dead = UNIT.replace(W=[[0.0]])
    assert cap_B(dead, ONE, "identity", 1.0, 1.0, alpha_max=0.3) == 0.3
    assert cap_B(UNIT, ONE, "identity", 1.0, 2.0) == 2 * cap_B(UNIT, ONE, "identity", 1.0, 1.0)


def test_cap_b_and_c_examples():
    assert cap_b(UNIT, ONE, "identity", 1.0, 1.0) == 1.0
    assert cap_c(UNIT, ONE, "identity", 1.0, 1.0) == 1.0


def test_zero_B_cases():
    zB = UNIT.replace(B=[0.0])
    assert cap_b(zB, ONE, "identity", 1.0, 1.0, alpha_max=0.9) == 0.9
    # cap_c keeps the |y_n| terms
    assert cap_c(zB, Dataset([[1.0]], [4.0]), "identity", 1.0, 1.0) == 0.25


def test_cap_W_uses_L_sigma():
    data = Dataset([[1.0]], [0.0])
    ratio = cap_W(UNIT, data, "identity", 1.0, 1.0) / cap_W(UNIT, data, "swish", 1.0, 1.0)
    # identity hidden norm is 1, swish hidden norm is swish(1)
    swish1 = 1 / (1 + math.exp(-1))
    assert ratio == pytest.approx(Activation("swish").L_sigma * swish1 / 1.0, rel=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        cap_W(UNIT, Dataset(np.ones((1, 2)), [0.0]), "identity", 1.0, 1.0)


@pytest.mark.parametrize("block", BLOCKS)
@given(seed=seeds, k=st.floats(0.1, 10))
def test_caps_homogeneous_in_g_and_C(block, seed, k):
    rng = make_rng(seed)
    theta, data = random_params(rng, 2, 4), random_data(rng, 5, 2)
    base = CAPS[block](theta, data, "swish", 1.3, 0.7)
    assert CAPS[block](theta, data, "swish", 1.3, 0.7 * k) == pytest.approx(k * base, rel=1e-12)
    assert CAPS[block](theta, data, "swish", 1.3 * k, 0.7) == pytest.approx(k * base, rel=1e-12)


@pytest.mark.parametrize("block", BLOCKS)
@given(seed=seeds)
def test_caps_permutation_invariant(block, seed):
    rng = make_rng(seed)
    theta, data = random_params(rng, 2, 4), random_data(rng, 6, 2)
    perm = rng.permutation(6)
    a = CAPS[block](theta, data, "swish", 1.0, 1.0)
    b = CAPS[block](theta, data.permuted(perm), "swish", 1.0, 1.0)
    assert a == pytest.approx(b, rel=1e-12)


def test_effective_lr_examples():
    cfg = SchedulerConfig(mode="decay_cap")
    lr = effective_lr({"W": 0.3, "B": 0.2, "b": 0.1, "c": 0.4}, cfg)
    assert lr.alpha_W == 0.3 and lr.cap_W == 0.3
    hyb = SchedulerConfig(mode="hybrid_min")
    assert effective_alpha(1.0, hyb, lip_RS=4.0) == 0.25
    assert effective_alpha(1.0, hyb, lip_RS=0.5) == 1.0
    with pytest.raises(ValueError):
        effective_alpha(1.0, hyb)


def test_constant_mode():
    free = SchedulerConfig(mode="constant", alpha_const=0.01)
    capped = SchedulerConfig(mode="constant", alpha_const=0.01, enforce_caps=True)
    assert effective_alpha(0.001, free) == 0.01
    assert effective_alpha(0.001, capped) == 0.001
    assert effective_alpha(0.5, capped) == 0.01


def test_effective_lr_accepts_lrvector():
    caps = LRVector(cap_W=0.1, cap_B=0.2, cap_b=0.3, cap_c=0.4)
    lr = effective_lr(caps, SchedulerConfig(mode="hybrid_min"), lip_RS=5.0)
    assert (lr.alpha_W, lr.alpha_B, lr.alpha_b, lr.alpha_c) == (0.1, 0.2, 0.2, 0.2)


def test_config_validation_and_roundtrip():
    with pytest.raises(ValueError):
        SchedulerConfig(C_W=0.0)
    with pytest.raises(ValueError):
        SchedulerConfig(alpha_max=-1.0)
    with pytest.raises(ValueError):
        SchedulerConfig(mode="adam")
    with pytest.raises(ValueError):
        SchedulerConfig.from_dict({"C_W": 1.0, "bogus": 2})
    cfg = SchedulerConfig(C_W=2.0, rate=RateFunction("exponential", 0.5, 0.2), mode="hybrid_min", lip_RS=3.0)
    assert SchedulerConfig.from_dict(cfg.to_dict()) == cfg


def test_scheduler_needs_lip_estimate_in_hybrid_min():
    with pytest.raises(ValueError):
        Scheduler(SchedulerConfig(mode="hybrid_min"), ONE, "swish")


def test_provider_uses_snapshot_passed_in():
    data = Dataset([[1.0], [2.0]], [0.5, -1.0])
    sch = Scheduler(SchedulerConfig(), data, "swish")
    snap = Snapshot(np.array([[0.3]]), np.array([1.2]), np.array([0.1]), 0.2)
    alpha, cap = sch.at(3)("B", snap)
    assert alpha == cap == cap_B(snap, data, "swish", 1.0, sch.config.rate.g(3))


def _increments(act, seed, C, t):
    rng = make_rng(seed)
    d, p, N = int(rng.integers(1, 4)), int(rng.integers(1, 7)), int(rng.integers(1, 8))
    theta, data = random_params(rng, d, p), random_data(rng, N, d)
    rate = RateFunction("hybrid", lam=0.8, r=0.3, tau=2.0)
    sch = Scheduler(SchedulerConfig(C_W=C, C_B=C, C_b=C, C_c=C, rate=rate), data, act)
    new, _ = gd_step(theta, data, act, sch.at(t))
    bound = 2 * C * rate.g(t) / N
    return {
        "W": operator_norm(new.W - theta.W), "B": np.linalg.norm(new.B - theta.B),
        "b": np.linalg.norm(new.b - theta.b), "c": abs(new.c - theta.c),
    }, bound


@pytest.mark.parametrize("act", ["identity", "tanh"])
@given(seed=seeds, C=st.floats(0.1, 5), t=st.integers(1, 10))
def test_per_step_increments_within_bounds(act, seed, C, t):
    inc, bound = _increments(act, seed, C, t)
    for blk in BLOCKS:
        assert inc[blk] <= bound + 1e-9


@given(seed=seeds, C=st.floats(0.1, 5), t=st.integers(1, 10))
def test_per_step_increments_swish(seed, C, t):
    inc, bound = _increments("swish", seed, C, t)
    for blk in ("W", "B", "c"):
        assert inc[blk] <= bound + 1e-9
    # the displayed bias cap omits L_sigma, so only the inflated bound is guaranteed
    assert inc["b"] <= Activation("swish").L_sigma * bound + 1e-9


def test_bias_cap_without_L_sigma_can_be_exceeded_by_swish():
    # hidden unit parked at the maximiser of swish' and a residual dominated by |y|
    theta = Params(W=[[0.0]], B=[1.0], b=[2.399357280515467], c=0.0)
    data = Dataset([[0.3]], [-1e6])
    sch = Scheduler(SchedulerConfig(rate=RateFunction("constant", 1.0)), data, "swish")
    new, _ = gd_step(theta, data, "swish", sch.at(1))
    step = abs(new.b[0] - theta.b[0])
    assert step > 2.0
    assert step <= 2.0 * Activation("swish").L_sigma
