"""The steady state is a Boltzmann distribution in J_z.

Detailed balance between collective decay (gamma) and collective pumping (w)
fixes every ratio p_{m+1}/p_m = w/gamma, so the stationary state is thermal
with inverse temperature beta = -ln(w/gamma).  The inversion flips sign at
w = gamma, sharpening as N grows, and the variance there is N(N+2)/12.

Run:  python3 demos/01_steady_state.py
"""
import numpy as np

from dickepump import ModelParams, inversion_variance, mean_inversion, mean_inversion_asymptotic, steady_state

N = 100
print(f"N = {N}: steady-state inversion across the transition")
print(f"{'w/gamma':>8} {'<Jz> exact':>12} {'<Jz> large-N':>13} {'Var[Jz]':>10}")
for w in np.linspace(0.9, 1.1, 11):
    p = ModelParams(N, gamma=1.0, pump=float(w))
    print(f"{w:8.3f} {mean_inversion(p):12.4f} {mean_inversion_asymptotic(p):13.4f} {inversion_variance(p):10.2f}")

# At the critical point all Dicke levels are equally likely.
flat = steady_state(ModelParams(N, 1.0, 1.0)).probs
print(f"\nat w = gamma every level has probability {flat[0]:.6f} = 1/(N+1) = {1 / (N + 1):.6f}")

# The transition narrows like 1/N.
print("\nslope d<Jz>/dw at w = gamma (grows like N^2/12):")
for n in (25, 50, 100, 200):
    h = 1e-6
    slope = (mean_inversion(ModelParams(n, 1.0, 1 + h)) - mean_inversion(ModelParams(n, 1.0, 1 - h))) / (2 * h)
    print(f"  N={n:4d}: {slope:10.2f}   N(N+2)/12 = {n * (n + 2) / 12:10.2f}")
