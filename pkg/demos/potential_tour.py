"""The wall-wall potential V(r) = r coth r - log|sinh r| - log 2.

Logarithmic at short range, exponentially small at long range, with
integral pi^2 / 6 over the half line.
"""

import math

import numpy as np

from pileup.potential import eval_dV, eval_V, integral_V, sum_V_multiples

print(f"{'r':>8s} {'V(r)':>22s} {'log(1/r)+1-log2':>16s} {'(2r+1)e^-2r':>14s}")
for r in (1e-6, 1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0):
    print(f"{r:8.0e} {eval_V(r):22.15e} {math.log(1 / r) + 1 - math.log(2):16.6f} {(2 * r + 1) * math.exp(-2 * r):14.6e}")

print(f"\nV'(1) = {eval_dV(1.0):.15f}, -1/sinh(1)^2 = {-1 / math.sinh(1) ** 2:.15f}")
print(f"int V = {integral_V():.15f}, pi^2/6 = {math.pi**2 / 6:.15f}")

# a lattice of walls at spacing t: the energy per wall is sum_k V(k t),
# and t * sum_k V(k t) is a Riemann sum for int V
print(f"\n{'t':>6s} {'t sum V(kt)':>14s} {'rel. deficit':>13s}")
for t in (1.0, 0.5, 0.1, 0.03125, 0.01):
    s = t * sum_V_multiples(t)
    print(f"{t:6.3f} {s:14.8f} {(math.pi**2 / 6 - s) / (math.pi**2 / 6):13.2e}")
