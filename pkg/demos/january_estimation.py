"""
Estimating the ice temperature in January
=========================================

Start the observer from a quadratic guess and compare the backstepping
observer with an open-loop copy of the model over ten days.
"""

import numpy as np

from icestate import experiments as ex
from icestate.params import Config

cfg = Config()
open_loop = ex.run_estimation(cfg, "open-loop", days=10)
backstep = ex.run_estimation(cfg, "backstepping", days=10)

print(" day   Phi open-loop   Phi backstepping")
for d in range(11):
    i = int(np.argmin(np.abs(backstep.t_days - d)))
    print(f"{d:4d}   {open_loop.Phi[i]:13.4g}   {backstep.Phi[i]:16.4g}")

s = ex.speedup(open_loop, backstep)
if s.lower_bound:
    print(f"\nopen loop never reached 10% in 10 days; speedup > {s.ratio:.1f}")
else:
    print(f"\nspeedup of the 10% error time: {s.ratio:.1f}")

# profile on January 3rd
x, T_true, T_hat = backstep.snapshots[2.0]
for xi in (0.0, 0.75, 1.5, 2.25, 3.0):
    j = int(np.argmin(np.abs(x - xi)))
    print(f"x = {x[j]:.2f} m  true {T_true[j]:7.3f} C  estimate {T_hat[j]:7.3f} C")
