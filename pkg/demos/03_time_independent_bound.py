"""
A bound that ignores timing
===========================

Every single-spin factor has modulus at most one and every preparation
kernel at most two, so max |drho| / N can never exceed the mean
polarization. We look at how that bound degrades as the bath grows.
"""

import numpy as np

from nvpol import Method, Uniform, delta_surface, estimate, load_table1, per_tau_curve, set_polarization

grid = np.linspace(0.0, 100.0, 512)
for n in (1, 5, 10, 15):
    env = set_polarization(load_table1(n).with_field(25.0), Uniform(1.0))
    b = estimate(env, Method.TIME_INDEPENDENT, grid, grid)
    print(f"N={n:2d}: p >= {b.value:.4f}   (at tau={b.argmax_tau:.1f}, t={b.argmax_t:.1f} us)")

# the per-tau curve takes the max over t at each preparation time
env = set_polarization(load_table1(5).with_field(25.0), Uniform(1.0))
curve = per_tau_curve(delta_surface(env, grid, grid), 5)
for tau, value in zip(grid[::64], curve[::64]):
    print(f"tau = {tau:5.1f} us  bound {value:.3f}")
