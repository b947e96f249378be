"""
Annual cycle of snow and ice
============================

Three years of the column under the monthly forcing table, with hourly
steps. Prints the thickness range per year and writes an SVG plot.
"""

import dataclasses

import numpy as np

from icestate.output import svg_lines
from icestate.params import SECONDS_PER_DAY, SECONDS_PER_YEAR, Config
from icestate.plant import run_annual

cfg = Config()
cfg = dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, dt=3600.0))
run = run_annual(3, cfg)

year = np.floor(run.t / SECONDS_PER_YEAR).astype(int)
for k in range(3):
    sel = year == k
    print(f"year {k + 1}: H {run.H[sel].min():.3f} .. {run.H[sel].max():.3f} m, "
          f"snow max {run.h[sel].max():.3f} m, surface T min {run.T_surface[sel].min():.1f} C")

# by the third year the snow is gone in July and the surface sits at the melting point
month = (run.t % SECONDS_PER_YEAR) / SECONDS_PER_YEAR * 12
july = (month >= 6) & (month < 7) & (year == 2)
print(f"July, year 3: snow depth {run.h[july].min():.3f} m, surface T max {run.T_surface[july].max():.1f} C")

days = run.t / SECONDS_PER_DAY
svg_lines("annual_cycle.svg", [("snow h", days, run.h), ("ice H", days, run.H)],
          title="Snow and ice thickness", xlabel="time (days)", ylabel="m")
print("wrote annual_cycle.svg")
