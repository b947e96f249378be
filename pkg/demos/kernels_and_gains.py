"""
Observer kernels and gains
==========================

Evaluate the transformation kernels on the triangle, the injection gains
on a 3 m column, and check that the two transformations invert each other.
"""

import numpy as np

from icestate.kernels import (GainParams, VolterraPair, chebyshev_nodes, gains, kernel_q,
                              kernel_r)
from icestate.params import ThermalParams

g = GainParams.from_thermal(ThermalParams(), lam=5e-6, c=3e-5, epsilon=1.0)
H = 3.0

# kernels along the line x = 1 m
y = np.linspace(1.0, H, 5)
print("y      q(1,y)        r(1,y)")
for yy, q, r in zip(y, kernel_q(1.0, y, g), kernel_r(1.0, y, g)):
    print(f"{yy:.2f}  {q:12.5f}  {r:12.5f}")

# gains on the observer grid
x = np.linspace(0.0, H, 7)
ge = gains(H, g, x)
print("\np1 on x =", np.round(x, 2))
print(np.array2string(ge.p1, precision=4))
print(f"p2 = {ge.p2}, p3 = {ge.p3:.2f} C/m, p4 = {ge.p4:.3e} 1/s")

# direct then inverse transform of a smooth profile
xc = chebyshev_nodes(H, 400)
pair = VolterraPair(xc, H, g, quadrature="chebyshev")
u = np.sin(2.0 * xc) + 0.5 * xc
back = pair.from_target(pair.to_target(u, 1e-3), 1e-3)
print(f"\nround-trip error: {np.abs(back - u).max():.2e}")
