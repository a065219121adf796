"""A Young equation driven by a rough but not too rough signal.

dY = phi(Y) dX with X a fractional Brownian motion of Hurst index 0.7 (scaled by 1/2), so X
has finite r-variation for r around 1.5.  The solver splits the horizon into
windows short enough for the Picard map to contract, and logs each window.
"""

import numpy as np

from roughkit import GridPath
from roughkit.functions import builtin
from roughkit.verify import PathGenerator, gen_path
from roughkit.young import YoungConfig, apriori_check, young_solve

X = gen_path(PathGenerator("fbm_cholesky", seed=3, dim=1, n=512, H=0.7, scale=0.5))
phi = builtin("sin:a=1")
cfg = YoungConfig(r=1.5, alpha=1.0)
S = young_solve(phi, X, [0.4], cfg)

print("smallness eps = %.4g, windows = %d" % (S.eps, len(S.windows)))
for w in S.windows[:5]:
    print(f"  [{w.start:4d}, {w.end:4d}]  iterations {w.iterations:2d}  worst contraction {w.max_contraction:.3f}")
if len(S.windows) > 5:
    print("  ...")
print("Y(1) =", float(S.path.values[-1, 0]))

# halving the driver should roughly halve how far Y travels
S2 = young_solve(phi, GridPath(X.grid, X.values * 0.5), [0.4], cfg)
print("travel at full / half amplitude: %.4f / %.4f" % (np.ptp(S.path.values), np.ptp(S2.path.values)))
rep = apriori_check(S.path, X, 1.5, phi.Phi0)
print("a priori bound V(Y) <= 2 Phi0 V(X): worst ratio %.3f, violations %d" % (rep["max_ratio"], rep["violations"]))
