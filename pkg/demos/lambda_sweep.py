"""
Effect of the design parameter lambda
=====================================

Larger lambda speeds up the estimate but overshoots the true profile more.
"""

from icestate import experiments as ex
from icestate.params import SECONDS_PER_DAY, Config

runs = ex.sweep(Config(), lambda_values=(5e-7, 5e-6, 1e-5), days=5)
print("lambda    overshoot (C)   time to 10% error (days)")
for r in runs:
    t10 = r.time_to_fraction()
    t10 = "not reached" if t10 is None else f"{t10 / SECONDS_PER_DAY:.2f}"
    print(f"{r.lam:7.0e}   {r.overshoot:13.3f}   {t10}")
