# coding: utf-8

# # Auditing a trajectory against the closed-form bounds
#
# In decay_cap mode the per-block step caps make the growth of every weight
# block deterministic: each block norm can move at most 2 C (G(t) + g(1)) / N
# away from its initial value. This notebook trains one network, audits every
# logged iterate, and evaluates the high-probability Lipschitz bound and the
# generalization bound for the same run.

# In[1]:

from lipdecay.bounds import (BoundInputs, GenBoundInputs, audit_trajectory, concentration_term,
                             dimensional_constant,
                             generalization_bound, generalization_lambda, lipschitz_bound_rhs)
from lipdecay.harness import NoiseModel, TargetFunction, generate_dataset
from lipdecay.linalg import make_rng
from lipdecay.rates import RateFunction
from lipdecay.scheduler import SchedulerConfig
from lipdecay.trainer import STREAM_DATA, TrainConfig, train


# In[2]:

sch = SchedulerConfig(C_W=1.0, C_B=1.0, C_b=1.0, C_c=1.0,
                      rate=RateFunction("hybrid", lam=0.01, r=0.1, tau=50.0))
cfg = TrainConfig(d=1, p=50, T=200, seed=3, lip_samples=0, scheduler=sch)
data = generate_dataset(TargetFunction("cubic_sqrt"), NoiseModel(0.03), 50, make_rng(3, STREAM_DATA))
log = train(cfg, data)


# Every family should print PASS; worst_slack is the smallest margin seen
# over all 201 iterates.

# In[3]:

report = audit_trajectory(log)
print("\n".join(report.summary_lines()))
print("cube radius M =", round(report.cube_M, 4))


# The probabilistic bound with kappa = 1 and eta = 2 holds with probability
# at least 1 - 4 exp(-4). Compare it with the largest product bound seen.

# In[4]:

T = cfg.T
rhs = lipschitz_bound_rhs(BoundInputs(L_sigma=log.L_sigma, p=cfg.p, d=1, C_W=1.0, C_B=1.0, N=data.N,
                                      G_T=sch.rate.G(T), g_1=sch.rate.g(1), kappa=1.0, eta=2.0))
print(f"max_t lip_bound = {max(r.lip_bound for r in log.records):.2f}  <=  {rhs:.2f}")


# The generalization bound needs d + D > 2, so the dimensional constant is
# evaluated at k = 3 (inputs plus a duplicated target coordinate).

# In[5]:

print("C_3 =", dimensional_constant(3), " C_4 =", dimensional_constant(4))
diam = 20.0  # diameter of the data support, assumed here
Lam = generalization_lambda(log.L_sigma, cfg.p, 1, 1.0, 1.0, data.N, sch.rate.G(T), sch.rate.g(1), diam)
gb = generalization_bound(GenBoundInputs(diam_Q=diam, delta=0.05, d=1, D=2, N=data.N, Lambda=Lam))
print(f"Lambda = {Lam:.2f}, bound on |R - R_S| = {gb:.2f}")


# The data-dependent factor decays with N while Lambda stays put.

# In[6]:

for N in (100, 10_000, 1_000_000):
    print(f"N = {N:>9}: concentration term {concentration_term(1, 2, N, 0.05):.5f}")
