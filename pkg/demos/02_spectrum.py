"""Dissipative gap of the Lindbladian, sector by sector.

The Lindbladian only couples |m><m+q| to |m+-1><m+q+-1|, so it splits into
tridiagonal blocks labelled by q.  Each block is similar to a symmetric
matrix, which keeps the spectrum real.  At w = gamma the populations
(q = 0) relax no faster than 2 gamma, while coherences (q = +-1) decay at
gamma.  The second-order cumulant estimate of the relaxation rate is
printed next to the exact gap for comparison.

Run:  python3 demos/02_spectrum.py
"""
import numpy as np

from dickepump import ModelParams, build_sector, relaxation_rate_cumulant, sector_spectrum

N = 100
print(f"N = {N}: slowest decay rates per sector at w = gamma")
base = ModelParams(N, 1.0, 1.0)
for q in (0, 1, -1, 2):
    rates = sector_spectrum(build_sector(base, q)).decay_rates[:4]
    print(f"  q={q:+d}: " + ", ".join(f"{r:.4f}" for r in rates))

print("\ngap of the population sector versus the cumulant estimate")
print(f"{'w/gamma':>8} {'gap':>9} {'cumulant':>9}")
for w in np.linspace(0.9, 1.1, 9):
    p = base.with_pump(float(w))
    print(f"{w:8.3f} {sector_spectrum(build_sector(p, 0)).gap:9.3f} {relaxation_rate_cumulant(p):9.3f}")
