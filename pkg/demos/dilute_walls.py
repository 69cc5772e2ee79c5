"""Dilute walls: aspect ratio alpha_n = log n.

In the dilute regime only nearest neighbours interact and the limit
energy is finite only for the uniform distribution on [0, 1], where it
equals 2 e^-2.  Because V(r) = (2r + 1) e^{-2r} + ..., the discrete minimum
approaches 2 e^-2 (1 + 1/(2 alpha_n)), so the convergence is as slow as
1/log n.

Packing the walls into [0, 1/M] instead makes the energy exponentially
large; its log-rescaling (1/(2 alpha_n)) log E_n tends to 1 - 1/M.
"""

import math

import numpy as np

from pileup import EmpiricalMeasure, GridDensity, RegimeContext, minimize_discrete, w1_distance
from pileup.discrete_energy import log_rescaled_energy

uniform = GridDensity(1.0, np.ones(64) / 64)
two_em2 = 2 * math.exp(-2)

print(f"{'n':>6s} {'alpha':>7s} {'E_n':>9s} {'2e^-2(1+1/2a)':>14s} {'W1 to U[0,1]':>13s}")
for k in (6, 8, 10):
    n = 2**k
    a = math.log(n)
    ctx = RegimeContext.finite_domain(5, 3, a, 1 / a)
    sol = minimize_discrete(ctx, n)
    w1 = w1_distance(EmpiricalMeasure(sol.minimizer), uniform)
    print(f"{n:6d} {a:7.3f} {sol.objective:9.5f} {two_em2 * (1 + 1 / (2 * a)):14.5f} {w1:13.2e}")
print(f"limit 2 e^-2 = {two_em2:.6f}")

print("\nwalls packed into [0, 1/M]:")
for M in (1.0, 2.0, 4.0):
    row = []
    for k in (6, 8, 10):
        n = 2**k
        ctx = RegimeContext.finite_domain(5, 3, math.log(n), 0.5)
        sol = minimize_discrete(ctx, n, upper=1 / M)
        row.append(log_rescaled_energy(ctx, sol.minimizer))
    print(f"  M={M:3.0f}: " + "  ".join(f"{v:7.4f}" for v in row) + f"   -> {1 - 1 / M:.4f}")
