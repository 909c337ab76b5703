"""
The coherence difference surface
================================

Prepare the qubit in |0> or |1> for a time tau, then open a superposition
and watch its coherence for a time t. With a polarized bath the two
histories differ, and |drho(tau, t)| is the witness of that difference.
"""

import numpy as np

from nvpol import Uniform, delta_rho, delta_surface, load_table1, set_polarization

env = set_polarization(load_table1(5).with_field(25.0), Uniform(1.0))
grid = np.linspace(0.0, 100.0, 256)
surface = delta_surface(env, grid, grid)

i, j = np.unravel_index(np.argmax(surface.abs), surface.abs.shape)
print(f"max |drho| = {surface.abs[i, j]:.4f} at tau = {grid[i]:.1f} us, t = {grid[j]:.1f} us")
print("tau = 0 row is identically zero:", bool(np.all(surface.values[0] == 0)))

# the telescoped sum and the direct branch difference agree to rounding
direct = delta_rho(env, grid[:, None], grid[None, :], method="difference")
print(f"sum vs difference: {np.abs(surface.values - direct).max():.2e}")

# an unpolarized bath carries no signal at all
blank = set_polarization(env, Uniform(0.0))
print("unpolarized max |drho| =", delta_surface(blank, grid, grid).abs.max())

# coarse picture: rows are tau, columns are t
shades = " .:-=+*#%@"
coarse = surface.abs[::16, ::8] / surface.abs.max()
for line in coarse:
    print("".join(shades[min(int(v * 10), 9)] for v in line))
