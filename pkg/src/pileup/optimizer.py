"""Projected-gradient minimisation over ordered, bounded vectors.

Every energy in the package is convex on the set

    {0 <= x_1 <= x_2 <= ... <= x_n <= upper},

whose Euclidean projection is isotonic regression followed by clipping.
The solver is a spectral projected gradient method: Barzilai-Borwein step
lengths, projected search direction and monotone Armijo backtracking,
carried out in gap coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from .discrete_energy import RegimeContext, barrier_bound, energy_and_gradient
from .exceptions import SingularConfiguration

__all__ = [
    "SolveReport",
    "project_ordered_box",
    "spg",
    "minimize_discrete",
    "minimize_quantile",
    "default_init",
    "KKT_RTOL",
    "MAX_ITER",
    "MIN_GAP",
]

KKT_RTOL = 1e-9
MAX_ITER = 100_000
#: Trial points with a gap below this are treated as having infinite energy.
MIN_GAP = 1e-14
_STEP_MIN, _STEP_MAX = 1e-12, 1e12
_ARMIJO = 1e-4
_APPROX = 1.0 - 2.0 * _ARMIJO
_ROUNDING = 1e-14


@dataclass
class SolveReport:
    """Outcome of a solve.  ``minimizer`` is a positions or quantile array."""

    minimizer: np.ndarray
    objective: float
    iterations: int
    kkt_residual: float
    converged: bool
    message: str = ""
    history: list = field(default_factory=list, repr=False)

    def summary(self):
        return {
            "objective": self.objective,
            "iterations": self.iterations,
            "kkt_residual": self.kkt_residual,
            "converged": self.converged,
            "message": self.message,
        }


@njit(cache=True)
def _pava(y):
    """Least-squares non-decreasing fit (pool adjacent violators)."""
    n = y.shape[0]
    val = np.empty(n)
    wt = np.empty(n)
    cnt = np.empty(n, dtype=np.int64)
    b = 0
    for i in range(n):
        val[b] = y[i]
        wt[b] = 1.0
        cnt[b] = 1
        b += 1
        while b > 1 and val[b - 2] > val[b - 1]:
            w = wt[b - 2] + wt[b - 1]
            val[b - 2] = (wt[b - 2] * val[b - 2] + wt[b - 1] * val[b - 1]) / w
            wt[b - 2] = w
            cnt[b - 2] += cnt[b - 1]
            b -= 1
    out = np.empty(n)
    i = 0
    for j in range(b):
        for _ in range(cnt[j]):
            out[i] = val[j]
            i += 1
    return out


def project_ordered_box(x, upper=math.inf):
    """Euclidean projection onto ``{0 <= x_1 <= ... <= x_n <= upper}``.

    Isotonic regression followed by clipping to ``[0, upper]``; clipping
    preserves order and is exact because the bounds are the same for every
    coordinate.
    """
    if not upper > 0:
        raise ValueError(f"upper bound must be positive, got {upper!r}")
    y = np.asarray(x, dtype=float)
    if y.ndim != 1:
        raise ValueError("expected a 1-d array")
    if y.size == 0:
        return y.copy()
    return np.clip(_pava(np.ascontiguousarray(y)), 0.0, upper)


def _project_gaps(z, upper, w=None):
    """Projection onto ``{y >= 0, sum(y) <= upper}`` in the norm ``sum y_i^2 / w_i``.

    The solution is ``max(z - tau w, 0)`` with ``tau >= 0`` the multiplier
    of the sum constraint, found exactly from the sorted breakpoints.
    """
    y = np.maximum(z, 0.0)
    if not y.sum() > upper:
        return y
    if w is None:
        w = np.ones_like(z)
    b = z / w
    order = np.argsort(-b)
    bs = b[order]
    tau = (np.cumsum(z[order]) - upper) / np.cumsum(w[order])
    k = np.nonzero(bs > tau)[0][-1]
    return np.maximum(z - tau[k] * w, 0.0)


def _multiplier(y, d, gy, upper):
    """Multiplier estimate for an active sum constraint, else 0.

    When ``sum(y) = upper`` holds before and after the step, ``sum(d)`` is
    zero up to rounding and ``gy @ d`` may be dominated by that rounding
    times the (large, nearly constant) gradient.  Subtracting a constant
    from ``gy`` removes it without changing the exact slope.
    """
    if not math.isfinite(upper):
        return 0.0
    tol = 1e-12 * upper
    if abs(y.sum() - upper) > tol or abs((y + d).sum() - upper) > tol:
        return 0.0
    a = np.abs(d)
    tot = a.sum()
    return float(a @ gy / tot) if tot > 0 else 0.0


def _gaps(x):
    return np.diff(x, prepend=0.0)


def _kkt_residual(x, g, upper):
    return float(np.linalg.norm(project_ordered_box(x - g, upper) - x))


def _call(fun, x):
    out = fun(x)
    if len(out) == 3:
        return out
    return out[0], out[1], None


def spg(
    fun: Callable[[np.ndarray], tuple],
    x0,
    upper=math.inf,
    *,
    anchored=True,
    tol=KKT_RTOL,
    max_iter=MAX_ITER,
    record=False,
) -> SolveReport:
    """Minimise a smooth convex function over the ordered box.

    ``fun(x)`` returns ``(value, gradient)`` or ``(value, gradient,
    curvature)``, the last being the Hessian diagonal in gap coordinates.
    The iteration runs on the gaps ``y_i = x_i - x_{i-1}`` (``x_0 = 0``),
    where the feasible set is ``{y >= 0, sum(y) <= upper}`` and pair
    interactions are far better conditioned than in positions.  A supplied
    curvature is used as a diagonal metric for the steps and the
    projection.  With ``anchored`` the first gap is guarded against
    collapse as well, as for walls next to the pinned wall.

    Stops when ``||x - P(x - grad)||_2 <= tol (1 + |E|)`` with ``P`` the
    ordered-box projection in position space.
    """
    x = project_ordered_box(x0, upper)
    y = _gaps(x)
    first = 0 if anchored else 1

    def gap_ok(y):
        return y.size <= first or y[first:].min() >= MIN_GAP

    def metric(curv):
        if curv is None:
            return np.ones_like(y)
        floor = 1e-12 * max(float(np.max(curv)), 1e-300)
        return np.maximum(curv, floor)

    if not gap_ok(y):
        raise SingularConfiguration("singular configuration: initial point has coincident entries")
    e, g, curv = _call(fun, x)
    if not math.isfinite(e):
        raise ValueError("initial point has infinite energy")
    D = metric(curv)
    gy = np.cumsum(g[::-1])[::-1]
    history = [e] if record else []
    res = _kkt_residual(x, g, upper)
    step = 1.0
    it = 0
    while True:
        if res <= tol * (1.0 + abs(e)):
            message = "converged" if it else "zero projected gradient at the initial point"
            return SolveReport(x, e, it, res, True, message, history)
        if it >= max_iter:
            return SolveReport(x, e, it, res, False, "iteration cap reached", history)
        it += 1
        w = 1.0 / D
        d = _project_gaps(y - step * w * gy, upper, w) - y
        kappa = _multiplier(y, d, gy, upper)
        slope = float((gy - kappa) @ d)
        if not slope < 0:
            # rounding has swallowed the descent direction
            ok = res <= 10 * tol * (1.0 + abs(e))
            return SolveReport(x, e, it, res, ok, "no descent direction", history)
        t = 1.0
        while True:
            yt = y + t * d
            if gap_ok(yt):
                xt = np.cumsum(yt)
                if xt[-1] <= upper:
                    et, gt, curv = _call(fun, xt)
                    if et <= e + _ARMIJO * t * slope:
                        break
                    # near the optimum the decrease drowns in rounding; fall
                    # back on the derivative form of the sufficient decrease
                    gyt = np.cumsum(gt[::-1])[::-1]
                    if et <= e + _ROUNDING * abs(e) and float((gyt - kappa) @ d) <= _APPROX * -slope:
                        break
            t *= 0.5
            if t < 1e-20:
                return SolveReport(x, e, it, res, False, "line search failed", history)
        gyt = np.cumsum(gt[::-1])[::-1]
        s = yt - y
        D = metric(curv)
        sy = float(s @ (gyt - gy))
        step = float(s @ (D * s)) / sy if sy > 0 else _STEP_MAX
        step = min(max(step, _STEP_MIN), _STEP_MAX)
        x, y, e, g, gy = xt, yt, et, gt, gyt
        if record:
            history.append(e)
        res = _kkt_residual(x, g, upper)


def default_init(n, bound):
    """Equispaced, strictly ordered start ``x_i = i min(1, bound) / (n + 1)``."""
    return np.arange(1, n + 1) * min(1.0, bound) / (n + 1)


def _fit_init(init, n, bound):
    """Resample a warm start of any length to ``n`` walls inside the barrier."""
    init = np.asarray(init, dtype=float)
    if init.size != n:
        src = np.linspace(0.0, 1.0, init.size + 1)
        init = np.interp(np.arange(1, n + 1) / n, src, np.concatenate([[0.0], init]))
    if math.isfinite(bound) and init[-1] > bound:
        init = init * (bound / init[-1])
    # pull a start off the pinned wall and out of ties
    x = 0.5 * init + 0.5 * default_init(n, bound if math.isfinite(bound) else max(init[-1], 1.0))
    return project_ordered_box(x, bound)


def minimize_discrete(
    ctx: RegimeContext,
    n: int,
    init: Optional[np.ndarray] = None,
    upper: Optional[float] = None,
    **kwargs,
) -> SolveReport:
    """Unique minimiser of the discrete energy with ``n`` walls.

    ``init`` may have a different length (a solution at another ``n``); it
    is then resampled through its quantile function.  ``upper`` tightens
    the barrier, e.g. to pack all walls into ``[0, 1/M]``.
    """
    bound = barrier_bound(ctx)
    if upper is not None:
        bound = min(bound, float(upper))
    if init is None:
        x0 = default_init(n, bound)
    else:
        x0 = _fit_init(init, n, bound)

    def fun(x):
        return energy_and_gradient(ctx, x, curvature=True)

    return spg(fun, x0, bound, anchored=True, **kwargs)


def minimize_quantile(
    objective, m: int, upper=math.inf, init=None, anchored=False, **kwargs
) -> SolveReport:
    """Minimise a convex functional of midpoint quantile values.

    ``objective(xi)`` returns ``(value, gradient)`` or ``(value, gradient,
    curvature)`` for an ordered array of ``m`` values; the feasible set is
    ``0 <= xi_1 <= ... <= xi_m <= upper``.  ``anchored`` guards ``xi_1``
    away from 0 for objectives that blow up there.
    """
    if init is None:
        init = (np.arange(m) + 0.5) / m * (min(1.0, upper) if math.isfinite(upper) else 1.0)
    return spg(objective, init, upper, anchored=anchored, **kwargs)
