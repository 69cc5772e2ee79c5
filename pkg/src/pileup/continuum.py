"""Limit energies of the pile-up model and their minimisation.

The limit functionals are evaluated either on a :class:`QuantileFn` (the
values of a non-decreasing ``xi`` at the cell midpoints of (0, 1)) or on a
:class:`GridDensity`.  On the quantile grid the derivative ``xi'`` lives on
the ``m - 1`` interfaces between midpoints, ``m (xi_{i+1} - xi_i)``, with
weight ``1/m``.  The left half-cell takes its slope from ``xi(0) = 0`` (the
pinned wall) and the right half-cell reuses the last interface slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import potential
from .exceptions import ParticularCaseError
from .measures import EmpiricalMeasure, GridDensity, QuantileFn, max_density_ratio, midpoints
from .optimizer import SolveReport, minimize_quantile
from .scaling import RegimeReport

__all__ = [
    "LimitConstants",
    "QuantileObjective",
    "limit_energy",
    "particular_case_energy",
    "log_limit_energy",
    "minimize_limit",
    "uniform_quantile",
    "DILUTE_SLOPE_TOL",
    "INTEGRAL_V",
]

INTEGRAL_V = math.pi**2 / 6.0
#: Tolerance on the constraint ``xi' >= 1`` of the dilute regime.
DILUTE_SLOPE_TOL = 1e-9
_TWO_EM2 = 2.0 * math.exp(-2.0)
_GL_W, _GL_X = None, None


@dataclass(frozen=True)
class LimitConstants:
    """Constants of a limit energy: ``c_tilde`` (p = 2, 4), ``Lambda``,
    ``beta`` (p = 5) and the force prefactor ``C`` (q = 2)."""

    c_tilde: Optional[float] = None
    Lambda: Optional[float] = None
    beta: Optional[float] = None
    C: Optional[float] = None

    @classmethod
    def from_report(cls, report: RegimeReport):
        return cls(report.c_tilde, report.Lambda, report.beta, report.C)

    def to_dict(self):
        return {k: getattr(self, k) for k in ("c_tilde", "Lambda", "beta", "C")}

    @classmethod
    def from_dict(cls, d):
        def num(v):
            return None if v is None else float(v)

        return cls(num(d.get("c_tilde")), num(d.get("Lambda")), num(d.get("beta")), num(d.get("C")))


def _need(value, name, p):
    if value is None:
        raise ValueError(f"regime p={p} needs the constant {name}")
    return float(value)


def _force_coeff(p, q, const: LimitConstants):
    if q in (0, 1):
        return 1.0
    if q == 3:
        return 0.0
    if p == 5:
        # force part beta * int(xi); at the uniform measure this is beta / 2
        beta = _need(const.beta, "beta", p)
        if math.isinf(beta):
            raise ParticularCaseError("beta is infinite: use particular_case_energy")
        return beta
    return _need(const.C, "C", p)


def _upper(q):
    return math.inf if q in (0, 1) else 1.0


def _gauss_legendre():
    global _GL_W, _GL_X
    if _GL_W is None:
        x, w = np.polynomial.legendre.leggauss(48)
        _GL_X, _GL_W = 0.5 * (x + 1.0), 0.5 * w
    return _GL_X, _GL_W


def _cell_average_V(a):
    """Average of ``V(a |u - w|)`` over the unit square, for ``a > 0``.

    Equals ``3/2 - log a + 2 int_0^1 (1 - w) [V(a w) + log(a w)] dw``; the
    bracket is smooth, so Gauss-Legendre handles it.  Also returns the
    derivative in ``a``.
    """
    a = np.asarray(a, dtype=float)
    x, w = _gauss_legendre()
    r = a[..., None] * x
    reg = potential._V_pos(r) + np.log(r)
    val = 1.5 - np.log(a) + 2.0 * np.sum(w * (1.0 - x) * reg, axis=-1)
    dreg = potential._dV_pos(r) + 1.0 / r
    der = -1.0 / a + 2.0 * np.sum(w * (1.0 - x) * x * dreg, axis=-1)
    return val, der


def _local_gaps(v):
    """Quantile increment over each cell, ``xi'(s_i) / m``."""
    d = np.diff(v)
    out = np.empty_like(v)
    out[1:-1] = 0.5 * (d[1:] + d[:-1])
    out[0] = d[0]
    out[-1] = d[-1]
    return out


def _local_gaps_T(gd, m):
    """Adjoint of :func:`_local_gaps` applied to ``gd``."""
    gi = np.zeros(m - 1)
    gi[1:] += 0.5 * gd[1:-1]
    gi[:-1] += 0.5 * gd[1:-1]
    gi[0] += gd[0]
    gi[-1] += gd[-1]
    out = np.zeros(m)
    out[1:] += gi
    out[:-1] -= gi
    return out


def _straddle(H):
    """Hessian diagonal in gap coordinates from a pairwise matrix.

    ``H[a, b]`` (a > b) is the curvature of a term in ``v_a - v_b``; the
    gap ``v_l - v_{l-1}`` collects all pairs with ``b < l <= a``.
    """
    m = H.shape[0]
    L = np.tril(H, -1)
    # column sums over rows a >= l, then accumulate over columns b < l
    tail = np.cumsum(L[::-1], axis=0)[::-1]
    acc = np.cumsum(tail, axis=1)
    out = np.zeros(m)
    out[1:] = acc[np.arange(1, m), np.arange(m - 1)]
    return out


class QuantileObjective:
    """Discretised limit energy as a function of midpoint quantile values.

    Calling it returns ``(value, gradient, curvature)`` for the smooth part
    (interaction plus force), ``curvature`` being the Hessian diagonal in
    gap coordinates; the monotonicity and barrier constraints are handled
    by the solver.  :meth:`value` evaluates the full energy, indicators
    included.
    """

    def __init__(self, p, q, const: LimitConstants):
        if p not in (1, 2, 3, 4):
            raise ValueError("the smooth quantile objective covers p in 1..4")
        self.p, self.q, self.const = p, q, const
        self.force = _force_coeff(p, q, const)
        self.upper = _upper(q)
        if p in (2, 4):
            self.c = _need(const.c_tilde, "c_tilde", p)

    def value(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(np.diff(v) < 0) or v[0] < 0:
            raise ValueError("quantile values must be non-negative and non-decreasing")
        if v[-1] > self.upper:
            return math.inf
        e = self(v, need_grad=False)[0]
        return e

    def __call__(self, v, need_grad=True):
        v = np.asarray(v, dtype=float)
        m = v.size
        if m < 2:
            raise ValueError("need at least two grid points")
        e_int, g, curv = getattr(self, f"_p{self.p}")(v, need_grad)
        e = e_int + self.force * float(np.mean(v))
        if not need_grad or not math.isfinite(e):
            return e, None, None
        g = g + self.force / m
        return e, g, curv

    def _slopes(self, v):
        """Slopes with weights: the left half-cell from the anchor ``xi(0) = 0``,
        then the interfaces, the last one also covering the right half-cell."""
        m = v.size
        sl = np.empty(m)
        sl[0] = 2.0 * m * v[0]
        sl[1:] = m * np.diff(v)
        wt = np.full(m, 1.0 / m)
        wt[0] = 0.5 / m
        wt[-1] += 0.5 / m
        return sl, wt

    def _from_slopes(self, v, F, dF, d2F, need_grad):
        m = v.size
        sl, wt = self._slopes(v)
        if np.any(sl <= 0):
            return math.inf, None, None
        e = float(np.sum(wt * F(sl)))
        if not need_grad:
            return e, None, None
        dsl = np.full(m, float(m))
        dsl[0] = 2.0 * m
        phi = wt * dF(sl) * dsl
        g = phi.copy()
        g[:-1] -= phi[1:]
        curv = wt * d2F(sl) * dsl * dsl
        return e, g, curv

    def _p3(self, v, need_grad):
        return self._from_slopes(
            v,
            lambda s: INTEGRAL_V / s,
            lambda s: -INTEGRAL_V / s**2,
            lambda s: 2.0 * INTEGRAL_V / s**3,
            need_grad,
        )

    def _p4(self, v, need_grad):
        c = self.c
        return self._from_slopes(
            v,
            lambda s: c * potential.sum_V_multiples(c * s),
            lambda s: c * c * potential.sum_dV_multiples(c * s),
            lambda s: c**3 * _sum_d2V_multiples(c * s),
            need_grad,
        )

    def _pairs(self, v, kernel, diag, need_grad):
        """Off-diagonal midpoint rule plus analytic diagonal cells."""
        m = v.size
        D = v[:, None] - v[None, :]
        iu = np.triu_indices(m, 1)
        dij = -D[iu]
        if np.any(dij <= 0):
            return math.inf, None, None
        gaps = _local_gaps(v)
        f, df, d2f = kernel(dij)
        dval, ddval = diag(gaps)
        e = (float(np.sum(f)) + 0.5 * float(np.sum(dval))) / m**2
        if not need_grad:
            return e, None, None
        M = np.zeros((m, m))
        M[iu] = df
        # term f(v_j - v_i) for i < j
        g = (M.sum(axis=0) - M.sum(axis=1)) / m**2
        g += 0.5 * _local_gaps_T(ddval, m) / m**2
        H = np.zeros((m, m))
        H[iu] = d2f
        curv = _straddle(H.T) / m**2
        return e, g, curv

    def _p1(self, v, need_grad):
        def kernel(r):
            return -np.log(r), -1.0 / r, 1.0 / r**2

        def diag(gap):
            return 1.5 - np.log(gap), -1.0 / gap

        return self._pairs(v, kernel, diag, need_grad)

    def _p2(self, v, need_grad):
        c = self.c

        def kernel(r):
            return (
                c * potential._V_pos(c * r),
                c * c * potential._dV_pos(c * r),
                c**3 * potential._d2V_pos(c * r),
            )

        def diag(gap):
            val, der = _cell_average_V(c * gap)
            return c * val, c * c * der

        return self._pairs(v, kernel, diag, need_grad)


def _sum_d2V_multiples(t):
    return potential._lattice_sum(np.asarray(t, dtype=float), lambda k, r: k * k * potential._d2V_pos(r))


def _dilute_feasible(v, bound):
    """``xi' >= 1`` on the whole grid, end half-cells included, and ``sup xi <= bound``."""
    m = v.size
    tol = DILUTE_SLOPE_TOL
    if v[0] < (0.5 / m) * (1.0 - tol):
        return False
    if m > 1 and np.any(m * np.diff(v) < 1.0 - tol):
        return False
    return v[-1] + 0.5 / m <= bound * (1.0 + tol)


def _density_energy(p, q, const, mu: GridDensity):
    """Limit energy of a piecewise-constant density."""
    w = mu.weights
    h = mu.cell
    x = mu.centers
    keep = w > 0
    top = mu.edges[1:][keep].max()
    if q in (2, 3) and top > 1.0 + 1e-12:
        return math.inf
    force = _force_coeff(p, q, const) * float(np.sum(w * x))
    rho = w / h
    if p == 5:
        if np.max(rho) > 1.0 + DILUTE_SLOPE_TOL:
            return math.inf
        Lam = math.inf if q in (0, 1) else (0.0 if q == 3 else _need(const.Lambda, "Lambda", p))
        return (_TWO_EM2 if Lam <= 1.0 else 0.0) + force
    if p == 3:
        return INTEGRAL_V * float(np.sum(rho[keep] ** 2) * h) + force
    if p == 4:
        c = _need(const.c_tilde, "c_tilde", p)
        s = potential.sum_V_multiples(c / rho[keep])
        return c * float(np.sum(s * w[keep])) + force
    # p = 1, 2: pairwise over cell centres plus exact self-cell averages
    xc, wc = x[keep], w[keep]
    D = np.abs(xc[:, None] - xc[None, :])
    off = ~np.eye(xc.size, dtype=bool)
    if p == 1:
        K = np.zeros_like(D)
        K[off] = -np.log(D[off])
        self_avg = 1.5 - math.log(h)
        e = 0.5 * (wc @ K @ wc + self_avg * np.sum(wc**2))
    else:
        c = _need(const.c_tilde, "c_tilde", p)
        K = np.zeros_like(D)
        K[off] = potential._V_pos(c * D[off])
        self_avg = float(_cell_average_V(np.array([c * h]))[0][0])
        e = 0.5 * c * (wc @ K @ wc + self_avg * np.sum(wc**2))
    return float(e) + force


def limit_energy(p, q, const: LimitConstants, arg) -> float:
    """Discretised limit energy ``E^(p,q)`` of a quantile grid or density.

    Returns ``inf`` when an indicator is violated: ``sup xi > 1`` for ``q``
    in {2, 3}, ``xi' < 1`` somewhere for ``p = 5``, or atoms (an empirical
    measure) for any ``p``.  For ``p = 5`` and ``q = 2`` the force part is
    ``beta int xi``, so the uniform measure scores ``2 e^-2 1{Lambda <= 1}
    + beta / 2``.
    """
    if p not in (1, 2, 3, 4, 5) or q not in (0, 1, 2, 3):
        raise ValueError(f"invalid regime ({p}, {q})")
    if isinstance(arg, EmpiricalMeasure):
        return math.inf
    if isinstance(arg, GridDensity):
        return _density_energy(p, q, const, arg)
    if not isinstance(arg, QuantileFn):
        raise TypeError(f"unsupported argument type {type(arg).__name__}")
    v = arg.values
    if p == 5:
        bound = _upper(q)
        if not _dilute_feasible(v, bound):
            return math.inf
        if q in (0, 1):
            Lam = math.inf
        elif q == 3:
            Lam = 0.0
        else:
            Lam = _need(const.Lambda, "Lambda", p)
        force = _force_coeff(p, q, const) * float(np.mean(v))
        return (_TWO_EM2 if Lam <= 1.0 else 0.0) + force
    obj = QuantileObjective(p, q, const)
    return obj.value(v)


def particular_case_energy(Lambda, arg: QuantileFn) -> float:
    """``int xi`` if ``xi' >= 1`` and ``sup xi <= Lambda``, else ``inf``."""
    v = arg.values
    if not _dilute_feasible(v, Lambda):
        return math.inf
    return float(np.mean(v))


def log_limit_energy(mu) -> float:
    """``1 - 1/M_mu`` for measures supported in [0, 1], else ``inf``."""
    if isinstance(mu, GridDensity):
        top = mu.edges[1:][mu.weights > 0].max()
    elif isinstance(mu, EmpiricalMeasure):
        top = float(mu.atoms[-1])
    elif isinstance(mu, QuantileFn):
        top = float(mu.values[-1])
    else:
        raise TypeError(f"unsupported measure type {type(mu).__name__}")
    if top > 1.0 + 1e-12:
        return math.inf
    M = max_density_ratio(mu)
    return 1.0 - 1.0 / M


def uniform_quantile(m, scale=1.0):
    """``xi(s) = scale * s`` on the midpoint grid."""
    return QuantileFn(scale * midpoints(m))


def minimize_limit(p, q, const: LimitConstants, m: int, init=None, **kwargs) -> SolveReport:
    """Minimiser of the discretised limit energy on an ``m``-point grid.

    For ``p = 5`` the only finite-energy quantile is ``xi(s) = s``, which is
    returned directly.
    """
    if p == 5:
        xi = uniform_quantile(m)
        e = limit_energy(p, q, const, xi)
        return SolveReport(xi.values, e, 0, 0.0, True, "unique feasible point")
    obj = QuantileObjective(p, q, const)
    return minimize_quantile(obj, m, obj.upper, init=init, anchored=p in (3, 4), **kwargs)
