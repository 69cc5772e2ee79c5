"""Walls in the elastic regime (3, 2) converge to a triangular density.

With alpha_n = n^-1/2 and Lambda_n = pi sqrt(2/3) the limit energy is

    (pi^2 / 6) int rho^2 + (2 pi^2 / 3) int x rho,   supp rho in [0, 1],

minimised by rho(x) = 2 (1 - x) with value 4 pi^2 / 9.  The discrete
minimum energies creep up toward that value while the wall positions
settle onto the triangle.
"""

import math
import time

import numpy as np

from pileup import EmpiricalMeasure, ParamSequences, PowerLawSeq, classify, context_at, minimize_discrete, w1_distance
from pileup.continuum import LimitConstants, minimize_limit
from pileup.measures import QuantileFn, density_from_quantile, grid_density_from_cdf

P = PowerLawSeq
params = ParamSequences(h=P(1.0), K=P(3 / (2 * math.pi**3)), sigma=P(1.0), L=P(1 / math.pi, 0.5))
report = classify(params)
print(f"regime ({report.p},{report.q}), C = {report.C:.6f} (2 pi^2/3 = {2 * math.pi**2 / 3:.6f})")

target = 4 * math.pi**2 / 9
triangle = grid_density_from_cdf(lambda x: 1 - (1 - np.clip(x, 0, 1)) ** 2, 1.0, 20000)

print(f"\n{'n':>6s} {'energy':>10s} {'gap %':>7s} {'W1':>8s} {'iters':>6s} {'time s':>7s}")
prev = None
for k in range(4, 11):
    n = 2**k
    t0 = time.perf_counter()
    sol = minimize_discrete(context_at(params, n, report), n, init=prev)
    prev = sol.minimizer
    w1 = w1_distance(EmpiricalMeasure(sol.minimizer), triangle)
    gap = 100 * (target - sol.objective) / target
    print(f"{n:6d} {sol.objective:10.5f} {gap:7.2f} {w1:8.5f} {sol.iterations:6d} {time.perf_counter() - t0:7.2f}")

# the gap closes slowly: a Riemann sum of V at spacing 1/(n alpha_n)
# underestimates int V and the error only decays like (n alpha_n)^-1
print(f"\nlimit value 4 pi^2 / 9 = {target:.5f}")

cont = minimize_limit(3, 2, LimitConstants.from_report(report), 400)
rho = density_from_quantile(QuantileFn(cont.minimizer), 10)
print(f"continuum minimum on 400 quantile cells: {cont.objective:.5f}")
print("density on 10 cells vs 2(1-x):")
for x, r in zip(rho.centers, rho.density):
    print(f"  x={x:.3f}  rho={r:.4f}  exact={2 * (1 - x):.4f}")
