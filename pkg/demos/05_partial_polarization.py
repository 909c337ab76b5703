"""
Partially polarized baths
=========================

The bound is meant for baths that are only partly polarized. We compare
a uniform profile with a graded one of the same mean, where the strongest
coupled spins receive the largest polarization.
"""

import numpy as np

from nvpol import Graded, Uniform, bound_vs_polarization, estimate, load_table1, set_polarization

base = load_table1(5).with_field(100.0)
for profile in (Uniform(0.5), Graded(0.5, 0.261, seed=7)):
    env = set_polarization(base, profile)
    b = estimate(env)
    print(f"{type(profile).__name__:8s} p = {np.round(env.polarizations, 3)}  mean {env.mean_polarization:.3f}  bound {b.value:.3f}")

print("\nbound against true polarization")
for p, bound in bound_vs_polarization(base, np.linspace(0.0, 1.0, 11)):
    print(f"  p = {p:.1f}  bound {bound:.3f}  " + "#" * int(40 * bound))
