"""
Bilinear fractional integrals on a grid
=======================================

J_alpha pairs f1(x+y) with f2(x-y) under |y|^(alpha-n); I_alpha integrates
f1(y1) f2(y2) against (|x-y1| + |x-y2|)^(alpha-2n).  Both act on step
functions with exact cell weights.
"""
import math

import numpy as np

from dyadmorrey import DyadicCube, i_alpha, indicator, j_alpha
from dyadmorrey.oracles import j_alpha_indicator_1d, linf_relative_error, refined_at_centers

f = indicator(DyadicCube(0, (0,)), n=1, J0=1, j_max=10)
x = f.centers()
g = j_alpha(f, f, 0.5)
i = int(np.argmin(np.abs(x - 0.5)))
print(f"J_1/2[chi, chi] near x=1/2: {g.values[i]:.6f}   2*sqrt(2) = {2 * math.sqrt(2):.6f}")
print(f"exact value at the cell centre {x[i]}: {j_alpha_indicator_1d(0, 1, 0.5, x[i]):.6f}")

# the profile peaks at the midpoint and falls off like a power at both ends
for xv in (-0.25, 0.1, 0.25, 0.5, 0.9, 1.2):
    k = int(np.argmin(np.abs(x - xv)))
    print(f"  x={x[k]:+.4f}  J={g.values[k]:.5f}")

# refining the grid twice barely moves the result
h = indicator(DyadicCube(2, (1,)), n=1, J0=1, j_max=8)
err = linf_relative_error(j_alpha(f.coarsen(2), h, 0.5), refined_at_centers(j_alpha, f.coarsen(2), h, P=0.5))
print(f"\nrefined-grid relative error: {err:.2e}")

# I_alpha is a dense double sum, so grids stay small
fs = indicator(DyadicCube(0, (0,)), n=1, J0=1, j_max=6)
I = i_alpha(fs, fs, 1.5)
print(f"I_3/2[chi, chi]: max {I.values.max():.4f} at x={fs.centers()[I.values.argmax()]:.4f}")
