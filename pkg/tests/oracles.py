"""Independent reference implementations used by the tests."""

import itertools

import mpmath as mp
import numpy as np


def V_mp(r, dps=50):
    """V(r) in extended precision, cancellation-free form."""
    with mp.workdps(dps):
        r = abs(mp.mpf(r))
        return 2 * r / mp.expm1(2 * r) - mp.log(-mp.expm1(-2 * r))


def dV_mp(r, dps=50):
    with mp.workdps(dps):
        r = mp.mpf(r)
        return -r / mp.sinh(r) ** 2


def brute_pair_energy(x, prefactor, c):
    """prefactor * sum_{0<=j<i<=n} V(c (x_i - x_j)) with x_0 = 0, in mpmath."""
    X = [0.0] + list(x)
    with mp.workdps(40):
        return float(prefactor * mp.fsum(V_mp(c * (X[i] - X[j])) for i in range(len(X)) for j in range(i)))


def brute_projection(y, upper):
    """Projection onto {0 <= x_1 <= ... <= x_n <= upper} by enumerating active sets.

    Every solution is blockwise constant: consecutive runs share a value,
    the first run may be pinned at 0 and the last at ``upper``.  Among all
    such candidates that are feasible and satisfy the KKT conditions, the
    closest one is the projection.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    best, best_d = None, np.inf
    for cuts in itertools.product([0, 1], repeat=n - 1):
        blocks, start = [], 0
        for i, c in enumerate(cuts, 1):
            if c:
                blocks.append((start, i))
                start = i
        blocks.append((start, n))
        for pin_lo in (False, True):
            for pin_hi in (False, True) if np.isfinite(upper) else (False,):
                x = np.empty(n)
                for k, (a, b) in enumerate(blocks):
                    v = y[a:b].mean()
                    if pin_lo and k == 0:
                        v = 0.0
                    if pin_hi and k == len(blocks) - 1:
                        v = upper
                    x[a:b] = v
                if np.any(np.diff(x) < -1e-15) or x[0] < -1e-15 or x[-1] > upper + 1e-15:
                    continue
                d = np.sum((x - y) ** 2)
                if d < best_d:
                    best, best_d = x, d
    return best
