"""Walk through the stable example: exponent, transforms, moments, samples.

Run with ``python demos/stable_factorization.py``.  Takes a few seconds.
"""

import math

import numpy as np

from expfun import families, moments
from expfun.levy import eval_phi, eval_psi
from expfun.samplers import PathConfig, sample_sn_expfun, sample_subordinator_expfun
from expfun.samplers.rng import RngState
from expfun.transforms import prop1_transform, theorem1_forward

alpha = 0.5
phi = families.stable_example(alpha)
print(f"phi = {phi.name}")
for u in (0.5, 1.0, 2.0, 5.0):
    closed = math.gamma(alpha * u + 1) / math.gamma(alpha * (u - 1) + 1)
    print(f"  phi({u}) quadrature {eval_phi(phi, u):.12f}   Gamma ratio {closed:.12f}")

# psi1(u) = u phi(u + 1) and its Esscher-type companion
psi1 = theorem1_forward(phi)
psi2 = prop1_transform(psi1)
print(f"psi1(1) = {eval_psi(psi1, 1.0):.10f}   (2/sqrt(pi) = {2 / math.sqrt(math.pi):.10f})")
print(f"psi2(1) = {eval_psi(psi2, 1.0):.10f}   (Gamma(5/2) = {math.gamma(2.5):.10f})")

pos = moments.expfun_pos_moments(phi, 4)
neg = moments.expfun_neg_moments(psi1, 4)
print("E[I_phi^n]       ", np.round(pos.values, 6))
print("E[I_psi1^-n]     ", np.round(neg.values, 6))
print("product (= n!)   ", np.round(moments.ratio_targets(pos, neg), 12))

# sample both functionals and check the ratio is standard exponential
n, rs, cfg = 20_000, RngState(1729), PathConfig()
a = sample_subordinator_expfun(phi, cfg, rs.child("demo-sub"), n).values
b = sample_sn_expfun(psi1, cfg, rs.child("demo-sn"), n).values
ratio = a / b
se = ratio.std(ddof=1) / math.sqrt(n)
print(f"mean of I_phi / I_psi1 over {n} draws: {ratio.mean():.4f} +- {se:.4f} (exact 1)")
print(f"second moment: {np.mean(ratio**2):.4f} (exact 2)")
