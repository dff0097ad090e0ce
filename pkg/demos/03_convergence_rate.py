# coding: utf-8

# # Gradient-norm rate under the capped schedule
#
# With hybrid_min every step is min(cap, 1 / Lip(grad R_S)), where the
# Lipschitz constant of the risk gradient is estimated by probing the
# parameter cube. The smallest gradient norm seen up to T should shrink
# roughly like 1 / sqrt(T + 1). We check this on a width-5 network for T = 100
# and T = 400, with the rate horizon tau at T / 2.

# In[1]:

import math

import numpy as np

from lipdecay.bounds import convergence_rate_check
from lipdecay.harness import NoiseModel, TargetFunction, generate_dataset
from lipdecay.linalg import make_rng
from lipdecay.rates import RateFunction
from lipdecay.scheduler import SchedulerConfig
from lipdecay.trainer import STREAM_DATA, TrainConfig, train


# In[2]:

def grad_series(seed, T, lam=0.2):
    data = generate_dataset(TargetFunction("sine"), NoiseModel(0.05), 50, make_rng(seed, STREAM_DATA))
    sch = SchedulerConfig(mode="hybrid_min", rate=RateFunction("hybrid", lam=lam, r=0.1, tau=T / 2))
    log = train(TrainConfig(d=1, p=5, T=T, seed=seed, lip_samples=0, scheduler=sch), data)
    return [r.grad_norm for r in log.records], log.lip_RS


# In[3]:

ratios = []
for seed in range(5):
    g100, lip100 = grad_series(seed, 100)
    g400, lip400 = grad_series(seed, 400)
    (rc,) = convergence_rate_check({100: g100, 400: g400})
    ratios.append(rc.ratio)
    print(f"seed {seed}: m(100)={rc.m1:.4f}  m(400)={rc.m2:.4f}  ratio={rc.ratio:.3f}  "
          f"Lip estimates {lip100:.1f} / {lip400:.1f}")
print("median ratio", np.median(ratios), " 1/sqrt(T) prediction", math.sqrt(101 / 401))


# Note the second Lipschitz estimate. The probe cube grows with the horizon,
# so the T = 400 run sees a larger Lip(grad R_S) and takes smaller steps. With
# a large lam the 1 / Lip limit binds for the whole run and the longer budget
# can end up with a larger minimum.

# In[4]:

g100, _ = grad_series(0, 100, lam=1.0)
g400, _ = grad_series(0, 400, lam=1.0)
(rc,) = convergence_rate_check({100: g100, 400: g400})
print(f"lam = 1: ratio {rc.ratio:.3f}, non-increasing: {rc.non_increasing}")
