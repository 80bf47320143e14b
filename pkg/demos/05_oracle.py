"""Where the collective pump comes from: eliminating a far-detuned level.

A laser drives g -> r far off resonance and r decays collectively to e.
Eliminating r leaves a collective jump operator sqrt(w) J+ with
w = gamma_r (Omega / delta)^2.  We compare the exact three-level dynamics of
four atoms with the effective two-level model, and check the eliminated
operators against their closed forms.

Run:  python3 demos/05_oracle.py
"""
import numpy as np

from dickepump import ThreeLevelParams, adiabatic_eliminate, build_blocks
from dickepump.oracle import closed_form_effective, compare_with_effective, pumping_rates_intuitive

p = ThreeLevelParams(n_atoms=4, omega=10.0, delta=200.0, gamma_r=1.0, gamma=0.01)
print(f"effective pump w = {p.pump_rate:.4g}, w/gamma = {p.pump_rate / p.gamma:.3f}")
cmp = compare_with_effective(p, t_final=600.0, n_samples=13)
print(f"{'t':>7} {'<Jz> full':>10} {'<Jz> eff':>10} {'<J_rr>':>9}")
for t, a, b, r in zip(cmp.times, cmp.full, cmp.effective, cmp.r_population):
    print(f"{t:7.1f} {a:10.4f} {b:10.4f} {r:9.2e}")
print(f"largest discrepancy {cmp.max_discrepancy:.4f} = {100 * cmp.max_discrepancy / 2:.2f}% of N/2")

ops = adiabatic_eliminate(build_blocks(p))
ref = closed_form_effective(p)
print(f"\nblock elimination vs closed forms: K {np.abs(ops.k_eff - ref.k_eff).max():.1e}, "
      f"H {np.abs(ops.h_eff - ref.h_eff).max():.1e}")
print("|K_eff|^2 per level vs intuitive rates:")
for a, b in zip(np.abs(np.diag(ops.k_eff, -1)) ** 2, pumping_rates_intuitive(p)):
    print(f"  {a:.6e}  {b:.6e}")
