"""How the near-multiple and interior formulas meet around x = 2M."""
from __future__ import annotations

import numpy as np

from censored_ldp import WalkConfig, approx_interior, approx_near_multiple, make_standardized_pareto, s_n

model = make_standardized_pareto(3.0)
n, k = 10**4, 2

# Just left of 2M both the near-multiple formula and the level-2 interior
# formula apply; just right of it the level-3 interior formula takes over.
# The ratio shows how far apart the two descriptions are in those zones.
for ratio in (30.0, 100.0, 300.0):
    config = WalkConfig(n, ratio * s_n(n, 3.0), model)
    h = config.default_h
    print(f"M/s_n = {ratio:.0f}, h = {h:.4f}")
    for lo, level, side in ((k - 2 * h, k, "left "), (k + h, k + 1, "right")):
        u = lo + h * np.array([0.1, 0.5, 0.9])
        r = [
            approx_near_multiple(config, k, float(v) * config.M, eps=2 * h).value
            / approx_interior(config, level, float(v) * config.M, h=h).value
            for v in u
        ]
        print(f"  {side} zone x/M in ({lo:.3f}, {lo + h:.3f}): near / interior = {np.round(r, 3)}")
