"""Scanning the pump through the transition leaves a hysteresis loop.

Near w = gamma the relaxation rate drops to 2 gamma, so a pump that changes
at dw/dt = 2 gamma r / N leaves the populations behind.  The up and down
sweeps cross <Jz> = 0 on opposite sides of gamma; their separation grows
linearly with r for slow scans and roughly like r^0.6 for fast scans.
Multiplying by N/(2 gamma) removes the N dependence.

Run:  python3 demos/03_hysteresis.py   (about half a minute)
"""
import numpy as np

from dickepump import ModelParams, adiabatic_boundaries, fit_power_law, hysteresis_width
from dickepump.dynamics import scaled_widths
from dickepump.fitting import HIGH_RATE_WINDOW, LOW_RATE_WINDOW, log_grid

N = 100
base = ModelParams(N, 1.0, 1.0)

loop = hysteresis_width(base, 16.0)
print(f"r = 16: up-sweep crosses at w = {loop.w_plus:.4f}, down-sweep at w = {loop.w_minus:.4f}")
print(f"        width {loop.width:.4f} = {loop.scaled_width(N):.2f} x (2 gamma / N)")
b = adiabatic_boundaries(base, 16.0)
print(f"        freezing/thawing estimate: [{b.w_minus:.4f}, {b.w_plus:.4f}]")

print("\nscaled width versus scan rate")
for name, window in (("slow", LOW_RATE_WINDOW), ("fast", HIGH_RATE_WINDOW)):
    rates = log_grid(*window)
    widths = scaled_widths(N, rates)
    fit = fit_power_law(np.column_stack([rates, widths]), window)
    print(f"  {name} window r in {window}: exponent {fit.exponent:.3f}")

print("\nfinite-size collapse at r = 4:")
for n in (50, 100, 200):
    print(f"  N={n:4d}: (N/2 gamma) dw_H = {hysteresis_width(ModelParams(n, 1.0, 1.0), 4.0).scaled_width(n):.4f}")
