import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from lipdecay.rates import G_star, RateFunction, eval_G, eval_g, g_sup_bound

HYB = RateFunction("hybrid", lam=1.0, r=1.0, tau=5.0)


def test_hybrid_g_before_horizon():
    assert eval_g(HYB, 3) == 1.0


def test_hybrid_g_after_horizon():
    assert eval_g(HYB, 6) == pytest.approx(math.exp(-1), rel=1e-12)


def test_exponential_g_at_zero():
    assert eval_g(RateFunction("exponential", lam=2.0, r=1.0), 0) == 2.0


def test_exponential_G_limit():
    rf = RateFunction("exponential", lam=2.0, r=1.0)
    assert eval_G(rf, 1e6) == pytest.approx(2.0, rel=1e-12)
    assert G_star(rf) == 2.0


def test_hybrid_G_after_horizon():
    assert eval_G(HYB, 6) == pytest.approx(1 + 5 + (1 - math.exp(-1)), rel=1e-12)


def test_polynomial_G_at_one():
    assert eval_G(RateFunction("polynomial", lam=1.0, r=2.0), 1) == pytest.approx(2.0, rel=1e-12)


def test_sup_bound_exponential():
    G, g1 = g_sup_bound(RateFunction("exponential", lam=1.0, r=1.0))
    assert G == 1.0
    assert g1 == pytest.approx(math.exp(-1), rel=1e-12)


def test_sup_bound_hybrid():
    assert g_sup_bound(HYB)[0] == pytest.approx(7.0, rel=1e-12)


def test_polynomial_closed_form_limit_and_supremum():
    rf = RateFunction("polynomial", lam=1.0, r=2.0)
    # the closed form tends to lam ...
    assert eval_G(rf, 1e9) == pytest.approx(1.0, abs=1e-8)
    # ... but decreases from G(1), so its supremum over t >= 1 is G(1) = lam r / (r - 1)
    assert G_star(rf) == pytest.approx(2.0, rel=1e-12)
    ts = np.linspace(1, 1e4, 2000)
    assert max(eval_G(rf, t) for t in ts) <= G_star(rf)


@pytest.mark.parametrize("kind, kw", [("exponential", {}), ("hybrid", {"tau": 3.0}), ("constant", {})])
@given(lam=st.floats(0.01, 10), r=st.floats(0.05, 3), t1=st.floats(0, 40), dt=st.floats(0, 40))
def test_fundamental_theorem(kind, kw, lam, r, t1, dt):
    rf = RateFunction(kind, lam=lam, r=r, **kw)
    t2 = t1 + dt
    integral = quad(lambda s: eval_g(rf, s), t1, t2, points=[kw.get("tau", 0.0)], epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    assert eval_G(rf, t2) - eval_G(rf, t1) == pytest.approx(integral, rel=1e-6, abs=1e-10)


@given(lam=st.floats(0.01, 10), r=st.floats(1.05, 4), t1=st.floats(1, 40), dt=st.floats(0, 40))
def test_polynomial_closed_form_has_derivative_minus_g(lam, r, t1, dt):
    rf = RateFunction("polynomial", lam=lam, r=r)
    t2 = t1 + dt
    integral = quad(lambda s: eval_g(rf, s), t1, t2, epsabs=1e-13, epsrel=1e-12)[0]
    assert eval_G(rf, t2) - eval_G(rf, t1) == pytest.approx(-integral, rel=1e-6, abs=1e-10)


@pytest.mark.parametrize("rf", [RateFunction("exponential", 1.5, 0.3), RateFunction("hybrid", 0.7, 0.2, 10.0),
                                RateFunction("constant", 0.5)])
def test_G_non_decreasing_and_bounded(rf):
    ts = np.linspace(0, 200, 4001)
    vals = np.array([eval_G(rf, t) for t in ts])
    assert np.all(np.diff(vals) >= -1e-12)
    assert np.all(vals <= G_star(rf) * (1 + 1e-12))


@given(lam=st.floats(0.01, 10), r=st.floats(0.05, 5), tau=st.floats(0, 100))
def test_hybrid_g_continuous_at_horizon(lam, r, tau):
    rf = RateFunction("hybrid", lam=lam, r=r, tau=tau)
    assert eval_g(rf, tau) == lam
    assert eval_g(rf, tau + 1e-12) == pytest.approx(lam, rel=1e-9)


@given(kind=st.sampled_from(["exponential", "polynomial", "hybrid", "constant"]),
       t=st.floats(1, 1e4), lam=st.floats(0.01, 10), r=st.floats(1.01, 5))
def test_g_nonnegative(kind, t, lam, r):
    assert eval_g(RateFunction(kind, lam=lam, r=r, tau=3.0), t) >= 0


def test_parameter_validation():
    with pytest.raises(ValueError):
        RateFunction("polynomial", lam=1.0, r=1.0)
    with pytest.raises(ValueError):
        RateFunction("exponential", lam=0.0, r=1.0)
    with pytest.raises(ValueError):
        RateFunction("hybrid", lam=1.0, r=1.0, tau=-1.0)
    with pytest.raises(ValueError):
        RateFunction("cosine")
    with pytest.raises(ValueError):
        eval_g(HYB, -1.0)
    with pytest.raises(ValueError):
        eval_G(HYB, -1.0)


def test_constant_rate_is_unbounded():
    rf = RateFunction("constant", lam=0.01)
    assert eval_G(rf, 10) == pytest.approx(0.1)
    assert G_star(rf) == math.inf


def test_json_fragment_roundtrip():
    frag = {"kind": "hybrid", "lambda": 1.0, "r": 1.0, "tau": 50}
    rf = RateFunction.from_dict(frag)
    assert rf == RateFunction("hybrid", 1.0, 1.0, 50.0)
    assert RateFunction.from_dict(rf.to_dict()) == rf
    assert rf.to_dict()["lambda"] == 1.0
