"""
Checking the closed forms against brute force
=============================================

For small baths we can build the full 2^N density matrix, evolve it with
the conditional propagators and take the trace. The closed-form products
should agree to rounding error.
"""

import numpy as np

from nvpol import delta_rho, oracle_delta
from nvpol.validation import random_environment, run_validation

rng = np.random.default_rng(3)
for _ in range(5):
    env = random_environment(rng, 6)
    tau, t = rng.uniform(0.0, 200.0, 2)
    closed, dense = delta_rho(env, tau, t), oracle_delta(env, tau, t)
    print(f"N={len(env)}  B={env.b_gauss:6.1f} G  |closed - dense| = {abs(closed - dense):.1e}")

print()
for result in run_validation(max_n=5, cases=40, seed=1):
    print(result.line())
