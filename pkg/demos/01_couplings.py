"""
Hyperfine couplings of the reference bath
=========================================

Each 13C nucleus couples to the qubit through a row (ax, ay, az) of the
dipolar tensor. For a nucleus at distance r the row norm must sit between
C(r) and 2 C(r). We print the reference rows next to that interval.
"""

import numpy as np

from nvpol import DEFAULT_CONSTANTS, audit_rows, generate_environment, load_table1

env = load_table1()
print(f"dipolar prefactor: {DEFAULT_CONSTANTS.dipolar_prefactor:.6f} rad/us nm^3")
print(f"Larmor frequency at 100 G: {env.with_field(100).omega:.4f} rad/us\n")

print(" k   r (nm)    |A| (rad/us)   C(r)      2C(r)    in range")
for row in audit_rows(env):
    print(f"{row['k']:2d}  {row['r_nm']:.5f}   {row['norm']:.6f}     {row['lo']:.5f}  {row['hi']:.5f}  {row['ok']}")

# rows built from actual lattice positions always land inside the interval
lattice = generate_environment(seed=1, n_spins=15, r_min=0.3, r_max=2.5)
print("\nlattice sample passes:", all(r["ok"] for r in audit_rows(lattice)))
print("nearest lattice spin at r =", np.round(lattice.spins[0].r_nm, 4), "nm")
