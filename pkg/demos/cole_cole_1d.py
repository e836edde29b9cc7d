"""A square pulse in a 1D Cole-Cole medium.

The pulse on [0.9, 1.1] splits into two fronts travelling left and right at
unit speed.  They reflect off the walls at x = 0 and x = 2 and lose energy to
the medium's fractional relaxation memory.  Field snapshots, E and the
energy trace are written to ``out_1d/``.  Pass a different directory as the
first argument.
"""

import sys

import numpy as np

from colecole import driver as dv

out = sys.argv[1] if len(sys.argv) > 1 else "out_1d"
coeffs = dv.direct_coefficients(c=1.0, d=74 / 75, lam=1.0, alpha=0.6)
spec = dv.RunSpec(dim=1, spatial_n=200, T=1.5, intervals=5, colloc=20, dense_output=4)
res = dv.run_simulation(coeffs, spec)
dv.export_simulation(res, out, {"c": 1.0, "d": 74 / 75, "lam": 1.0, "alpha": 0.6})

x = res.grid[0]
for n, t in enumerate(res.times):
    u = res.u[n]
    print(f"t={t:.3f}  l2={res.energy.l2_norm[n]:.4f}  max|u|={np.abs(u).max():.3f} at x={x[np.argmax(np.abs(u))]:.3f}")
print(f"files written to {out}/")
