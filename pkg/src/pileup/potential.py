"""Wall-wall interaction potential.

The potential between two dislocation walls at rescaled distance ``r`` is

    V(r) = r coth r - log|sinh r| - log 2,

which is even, strictly convex and decreasing on (0, inf), has a logarithmic
singularity at 0 and decays like ``2 r exp(-2 r)``.  Evaluation uses the
equivalent form

    V(r) = 2r / (exp(2r) - 1) - log(1 - exp(-2r)),

which never forms ``coth`` or ``sinh`` and so stays accurate for large ``r``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

__all__ = [
    "eval_V",
    "eval_dV",
    "integral_V",
    "sum_V_multiples",
    "sum_dV_multiples",
    "SERIES_CUTOFF",
]

#: Below this argument the small-r series is used.
SERIES_CUTOFF = 1e-4

_LOG2 = math.log(2.0)


def _log1mexp(x):
    """log(1 - exp(-x)) for x > 0, accurate at both ends."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= _LOG2
    out[small] = np.log(-np.expm1(-x[small]))
    out[~small] = np.log1p(-np.exp(-x[~small]))
    return out


def _V_pos(a):
    """V on strictly positive input, no argument checking."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    s = a < SERIES_CUTOFF
    if s.any():
        r = a[s]
        r2 = r * r
        # V = 1 - log(2r) + r^2/6 - r^4/60 + O(r^6)
        out[s] = 1.0 - np.log(2.0 * r) + r2 / 6.0 - r2 * r2 / 60.0
    b = ~s
    if b.any():
        r = a[b]
        two_r = 2.0 * r
        with np.errstate(over="ignore"):
            first = two_r / np.expm1(two_r)
        out[b] = first - _log1mexp(two_r)
    return out


def _dV_pos(a):
    """V' on strictly positive input (negative values)."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    s = a < SERIES_CUTOFF
    if s.any():
        r = a[s]
        out[s] = -1.0 / r + r / 3.0 - r**3 / 15.0
    b = ~s
    if b.any():
        r = a[b]
        em = np.expm1(-2.0 * r)
        out[b] = -4.0 * r * np.exp(-2.0 * r) / (em * em)
    return out


def _d2V_pos(a):
    """V'' on strictly positive input."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    s = a < SERIES_CUTOFF
    if s.any():
        r = a[s]
        out[s] = 1.0 / (r * r) + 1.0 / 3.0 - r * r / 5.0
    b = ~s
    if b.any():
        r = a[b]
        u = np.exp(-2.0 * r)
        em = -np.expm1(-2.0 * r)
        # d/dr [-4 r u / (1-u)^2] with u' = -2u
        out[b] = -4.0 * u / em**2 + 8.0 * r * u * (1.0 + u) / em**3
    return out


def _V_scaled(a, log_scale):
    """V(a) * exp(log_scale) without intermediate overflow or underflow.

    Used for the dilute regime, where a huge prefactor multiplies
    exponentially small pair terms.
    """
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    far = a > 20.0
    if far.any():
        r = a[far]
        u = np.exp(-2.0 * r)
        # V(r) = exp(-2r) * (2r/(1-u) - log1p(-u)/u)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = 2.0 * r / (1.0 - u) + np.where(u > 0.0, -np.log1p(-u) / u, 1.0)
        with np.errstate(over="ignore", under="ignore"):
            out[far] = g * np.exp(log_scale - 2.0 * r)
    near = ~far
    if near.any():
        with np.errstate(over="ignore"):
            out[near] = _V_pos(a[near]) * np.exp(log_scale)
    return out


def _dV_scaled(a, log_scale):
    """V'(a) * exp(log_scale), stable counterpart of :func:`_V_scaled`."""
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    far = a > 20.0
    if far.any():
        r = a[far]
        u = np.exp(-2.0 * r)
        with np.errstate(over="ignore", under="ignore"):
            out[far] = -4.0 * r / (1.0 - u) ** 2 * np.exp(log_scale - 2.0 * r)
    near = ~far
    if near.any():
        with np.errstate(over="ignore"):
            out[near] = _dV_pos(a[near]) * np.exp(log_scale)
    return out


def _check_argument(r):
    arr = np.asarray(r, dtype=float)
    if np.isnan(arr).any():
        raise ValueError("V is undefined for NaN input")
    if (arr == 0.0).any():
        raise ValueError("singular argument: V diverges at r = 0")
    return arr


def _as_output(values, like):
    if np.ndim(like) == 0:
        return float(values)
    return values


def eval_V(r):
    """Interaction potential ``V(r)`` for scalar or array ``r != 0``.

    Even in ``r`` by construction (the magnitude is taken first), so
    ``eval_V(-r) == eval_V(r)`` bit for bit.  Raises ``ValueError`` for
    ``r == 0`` and for NaN.
    """
    arr = _check_argument(r)
    return _as_output(_V_pos(np.abs(arr)), r)


def eval_dV(r):
    """Derivative ``V'(r) = -r / sinh(r)**2``; odd in ``r``."""
    arr = _check_argument(r)
    val = _dV_pos(np.abs(arr)) * np.sign(arr)
    return _as_output(val, r)


def integral_V():
    """Return the integral of V over (0, inf).

    The log singularity at the origin is removed analytically on (0, 1]:
    ``V(r) + log r`` is smooth there and the integral of ``-log r`` over
    (0, 1] is exactly 1.  The remaining pieces go to adaptive quadrature.
    The exact value is pi**2 / 6.
    """
    regular, _ = integrate.quad(
        lambda r: float(_V_pos(np.array([r]))[0]) + math.log(r) if r > 0 else 1.0 - _LOG2,
        0.0,
        1.0,
        epsabs=1e-14,
        epsrel=1e-13,
        limit=200,
    )
    tail, _ = integrate.quad(
        lambda r: float(_V_pos(np.array([r]))[0]),
        1.0,
        np.inf,
        epsabs=1e-14,
        epsrel=1e-13,
        limit=200,
    )
    return regular + 1.0 + tail


_BLOCK = 64
_SUM_RTOL = 1e-17


def _lattice_sum(t, term):
    """Sum ``term(k, k t)`` over k >= 1, vectorised over positive ``t``.

    Terms are added in blocks of k.  A sum is closed once the block ends in
    the exponentially decaying range (k t >= 3) and the geometric bound on
    the remaining tail, with ratio exp(-2t)(1 + 1/k), is below
    ``_SUM_RTOL`` times the running total.
    """
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    total = np.zeros_like(flat)
    active = np.arange(flat.size)
    k0 = 1
    while active.size:
        ks = np.arange(k0, k0 + _BLOCK, dtype=float)
        tt = flat[active]
        vals = term(ks[None, :], ks[None, :] * tt[:, None])
        total[active] += vals.sum(axis=1)
        k_last = ks[-1]
        last = np.abs(vals[:, -1])
        ratio = np.exp(-2.0 * tt) * (1.0 + 1.0 / k_last)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(ratio < 1.0, last * ratio / (1.0 - ratio), np.inf)
        done = (k_last * tt >= 3.0) & (tail <= _SUM_RTOL * np.abs(total[active]))
        active = active[~done]
        k0 += _BLOCK
    return total.reshape(t.shape)


def _check_positive(t):
    arr = np.asarray(t, dtype=float)
    if np.isnan(arr).any() or (arr <= 0).any():
        raise ValueError("lattice sum of V diverges for t <= 0")
    return arr


def sum_V_multiples(t):
    """Return ``sum_{k>=1} V(k t)`` for ``t > 0`` (scalar or array)."""
    arr = _check_positive(t)
    out = _lattice_sum(arr, lambda k, r: _V_pos(r))
    return _as_output(out, t)


def sum_dV_multiples(t):
    """Derivative in ``t`` of :func:`sum_V_multiples`: ``sum_k k V'(k t)``."""
    arr = _check_positive(t)
    out = _lattice_sum(arr, lambda k, r: k * _dV_pos(r))
    return _as_output(out, t)
