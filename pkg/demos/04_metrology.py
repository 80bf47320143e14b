"""How precisely can the pump rate be read off the transition?

The stationary state belongs to an exponential family in beta, so measuring
J_z saturates the Cramer-Rao bound and dw = gamma / sqrt(Var) = sqrt(12)
gamma / N at criticality.  With a fixed total time T one trades the number
of scans against the hysteresis broadening of each scan; the optimum sits
near r ~ gamma.

Run:  python3 demos/04_metrology.py
"""
import numpy as np

from dickepump import ModelParams, ProtocolBudget, steady_sensitivity, total_sensitivity

for n in (50, 100, 200, 400):
    rep = steady_sensitivity(ModelParams(n, 1.0, 1.0))
    print(f"N={n:4d}: dw = {rep.delta_w_single:.5f}  N dw = {n * rep.delta_w_single:.4f}"
          f"  (sqrt 12 = {12 ** 0.5:.4f}); error propagation / Cramer-Rao = {rep.saturation_ratio:.15f}")

p = ModelParams(100, 1.0, 1.0)
print("\ntotal sensitivity for T = 1e6 / gamma, C = 3, eta = 0.6")
for r in np.geomspace(0.01, 100, 9):
    b = total_sensitivity(p, ProtocolBudget(1e6, 3.0, float(r)))
    print(f"  r = {r:8.3f}: {b.n_scans:12.1f} scans, dw_total = {b.delta_w_total:.3e}")
