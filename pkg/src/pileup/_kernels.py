"""Compiled pair-sum kernels for the discrete energy.

The loops run in a fixed order, so results are bit-reproducible.
"""

import math

import numpy as np
from numba import njit

_CUT = 1e-4
_FAR = 20.0
_HALF_LOG2 = 0.5 * math.log(2.0)


@njit(cache=True)
def _term(r, ls, scale):
    """``V, V', V''`` at ``r`` times ``scale``, or times ``exp(ls)`` if ``scale`` is 0."""
    if r < _CUT:
        r2 = r * r
        v = 1.0 - math.log(2.0 * r) + r2 / 6.0 - r2 * r2 / 60.0
        d = -1.0 / r + r / 3.0 - r2 * r / 15.0
        h = 1.0 / r2 + 1.0 / 3.0 - r2 / 5.0
        f = scale if scale != 0.0 else math.exp(ls)
        return v * f, d * f, h * f
    if r > _FAR:
        u = math.exp(-2.0 * r)
        om = 1.0 - u
        g = 2.0 * r / om
        if u > 0.0:
            g += -math.log1p(-u) / u
        else:
            g += 1.0
        if scale != 0.0:
            f = scale * u
        else:
            f = math.exp(ls - 2.0 * r)
        d = -4.0 * r / (om * om)
        h = -4.0 / (om * om) + 8.0 * r * (1.0 + u) / (om * om * om)
        return g * f, d * f, h * f
    # one exponential per pair; the complement is formed where it is exact
    if r <= _HALF_LOG2:
        em = -math.expm1(-2.0 * r)
        u = 1.0 - em
        lg = math.log(em)
    else:
        u = math.exp(-2.0 * r)
        em = 1.0 - u
        lg = math.log1p(-u)
    v = 2.0 * r * u / em - lg
    d = -4.0 * r * u / (em * em)
    h = -4.0 * u / (em * em) + 8.0 * r * u * (1.0 + u) / (em * em * em)
    f = scale if scale != 0.0 else math.exp(ls)
    return v * f, d * f, h * f


@njit(cache=True)
def pair_sums(X, c, ls, scale, with_grad, tail_rtol):
    """Sum of scaled ``V(c (X_i - X_j))`` over ``j < i``, gradient and curvature.

    ``X`` includes the pinned wall ``X[0] = 0``.  Returns ``(total, grad,
    gap_curv, ok)``: ``grad`` is over ``X[1:]``; ``gap_curv[l]`` is the
    diagonal of the Hessian in the gap ``X[l+1] - X[l]``, the sum of pair
    curvatures over pairs straddling that gap.  ``ok`` is False at
    coincident walls.  Diagonals ``k = i - j`` are dropped once the bound
    ``remaining pairs x largest term of the current diagonal`` falls below
    ``tail_rtol`` times the running total.
    """
    m = X.shape[0]
    n = m - 1
    grad = np.zeros(m)
    diff = np.zeros(m + 1)
    parts = np.zeros(n)
    total = 0.0
    c2 = c * c
    for k in range(1, m):
        s = 0.0
        vmax = 0.0
        dmax = 0.0
        hmax = 0.0
        for j in range(m - k):
            r = c * (X[j + k] - X[j])
            if r <= 0.0:
                return math.inf, grad[1:], diff[1:m], False
            v, d, h = _term(r, ls, scale)
            s += v
            if v > vmax:
                vmax = v
            if with_grad:
                d *= c
                grad[j + k] += d
                grad[j] -= d
                if -d > dmax:
                    dmax = -d
                h *= c2
                diff[j + 1] += h
                diff[j + k + 1] -= h
                if h > hmax:
                    hmax = h
        parts[k - 1] = s
        total += s
        if k < n:
            remaining = (n - k) * (n - k + 1) / 2.0
            if remaining * vmax <= tail_rtol * abs(total):
                if not with_grad:
                    break
                gmax = 0.0
                for i in range(1, m):
                    a = abs(grad[i])
                    if a > gmax:
                        gmax = a
                hmin = np.inf
                acc = 0.0
                for i in range(1, m):
                    acc += diff[i]
                    if acc < hmin:
                        hmin = acc
                if remaining * dmax <= tail_rtol * max(abs(total), gmax) and (
                    remaining * hmax <= tail_rtol * hmin
                ):
                    break
    acc = 0.0
    for i in range(n - 1, -1, -1):
        acc += parts[i]
    curv = np.cumsum(diff[1:m])
    return acc, grad[1:], curv, True
