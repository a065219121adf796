"""How rough is a random walk?

Take one Brownian-like path on a fine grid and measure it two ways: the
exact r-variation (a dynamic program over all partitions) and a Besov norm
(an average of increments over dyadic offsets).  The variation blows up as r
drops towards 2; the Besov norm with alpha = 1/r stays comparable to it.
"""

import math

import numpy as np

from roughkit import GridPath, TimeGrid
from roughkit.besov import besov_norm_path
from roughkit.variation import var_exact

rng = np.random.default_rng(7)
grid = TimeGrid.uniform(1024)
X = GridPath(grid, np.cumsum(np.r_[0.0, rng.standard_normal(1024) * math.sqrt(grid.mesh())])[:, None])
chi = X.distance_field()

print(f"{'r':>5} {'V^r':>10} {'pieces':>7} {'Besov(1/r, r, inf)':>20}")
for r in (1.0, 1.5, 2.0, 2.5, 3.0, 4.0):
    res = var_exact(chi, r)
    B = besov_norm_path(X, (1 / r, r, math.inf))
    print(f"{r:5.1f} {res.value:10.4f} {len(res.optimal_partition.indices) - 1:7d} {B:20.4f}")

# r = 1 is the plain length and uses every cell; larger r merges many cells into
# a few long pieces, which is where the optimal partition gets interesting.
res = var_exact(chi, 2.5)
print("optimal partition for r=2.5 starts with", res.optimal_partition.indices[:8], "...")
