"""Rescaled discrete pile-up energies and their gradients.

A configuration is an ordered array ``0 <= x_1 <= ... <= x_n`` with the
pinned wall ``x_0 = 0`` implicit.  The energy splits into

* an interaction part: a regime-dependent prefactor times the sum of
  ``V(n alpha (x_i - x_j))`` over all pairs ``0 <= j < i <= n``;
* a force part: the mean position, multiplied by ``C_n`` when the domain
  length sets the scale (``q`` in {2, 3});
* a barrier part: 0 or ``inf`` according to ``x_n <= Lambda_n``
  (``q`` in {0, 1}) or ``x_n <= 1`` (``q`` in {2, 3}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import SingularConfiguration
from .scaling import ParamSequences, RegimeReport, classify, force_prefactor, sequence_values

__all__ = [
    "RegimeContext",
    "context_at",
    "interaction_energy",
    "force_energy",
    "barrier_energy",
    "total_energy",
    "total_gradient",
    "energy_and_gradient",
    "energy_parts",
    "log_rescaled_energy",
    "barrier_bound",
    "TAIL_RTOL",
]

#: Pair diagonals are dropped once their remaining contribution is bounded
#: by this fraction of the accumulated interaction sum.
TAIL_RTOL = 1e-18


@dataclass(frozen=True)
class RegimeContext:
    """Everything the discrete energy needs at a fixed ``n``.

    ``alpha_n`` is the aspect ratio of the active rescaling (``ahat_n`` for
    ``q`` in {0, 1}, ``alpha_n`` for ``q`` in {2, 3}).  ``Lambda_n`` is the
    barrier for ``q = 1`` and may be ``inf`` for ``q = 0``.  ``Cn`` is the
    force prefactor, only used for ``q`` in {2, 3}.
    """

    p: int
    q: int
    alpha_n: float
    Lambda_n: float = math.inf
    Cn: float = 1.0

    def __post_init__(self):
        if self.p not in (1, 2, 3, 4, 5):
            raise ValueError(f"p must lie in 1..5, got {self.p}")
        if self.q not in (0, 1, 2, 3):
            raise ValueError(f"q must lie in 0..3, got {self.q}")
        if not self.alpha_n > 0:
            raise ValueError("alpha_n must be positive")
        if not self.Lambda_n > 0:
            raise ValueError("Lambda_n must be positive")

    @classmethod
    def finite_domain(cls, p, q, alpha_n, Lambda_n):
        """Context for ``q`` in {2, 3} with the matching force prefactor."""
        return cls(p, q, alpha_n, Lambda_n, force_prefactor(p, Lambda_n, alpha_n))


def context_at(params: ParamSequences, n: int, report: RegimeReport | None = None) -> RegimeContext:
    """Build the :class:`RegimeContext` of a model at ``n`` walls.

    In the particular case (``p = 5``, ``q = 2``, ``beta = inf``) the energy
    is taken in the ``ell_n`` scaling with the domain as a barrier at
    ``Lambda_n``, i.e. as a ``(5, 1)`` energy.
    """
    if report is None:
        report = classify(params)
    sv = sequence_values(n, params)
    if report.q == 0:
        return RegimeContext(report.p, 0, sv.ahat, math.inf, 1.0)
    if report.q == 1 or report.particular_case:
        return RegimeContext(report.p, 1, sv.ahat, sv.Lambda, 1.0)
    return RegimeContext.finite_domain(report.p, report.q, sv.alpha, sv.Lambda)


def barrier_bound(ctx: RegimeContext) -> float:
    """Largest admissible ``x_n``."""
    if ctx.q == 0:
        return math.inf
    return ctx.Lambda_n if ctx.q == 1 else 1.0


def _positions(cfg):
    x = np.asarray(cfg, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("configuration must be a non-empty 1-d array")
    return x


def _log_prefactor(ctx: RegimeContext, n: int) -> float:
    a = ctx.alpha_n
    if ctx.p == 1:
        return -2.0 * math.log(n)
    if ctx.p in (2, 3, 4):
        return math.log(a / n)
    return 2.0 * (a - 1.0) - math.log(n * a)


def _p1_constant(ctx: RegimeContext, n: int) -> float:
    return -0.5 * (1.0 - math.log(2.0 * n * ctx.alpha_n)) if ctx.p == 1 else 0.0


def _pair_sums(ctx: RegimeContext, x, with_grad):
    """Scaled pair sum and (optionally) its gradient in ``x_1..x_n``.

    Pairs are visited diagonal by diagonal (``k = i - j``).  On an ordered
    configuration the gaps of diagonal ``k + 1`` dominate those of diagonal
    ``k`` entrywise, so all later terms are bounded by the largest term of
    the current diagonal; that gives the early exit.
    """
    n = x.size
    if np.any(np.diff(x) < 0):
        raise ValueError("configuration must be ordered")
    X = np.concatenate([[0.0], x])
    ls = _log_prefactor(ctx, n)
    # p = 5 prefactors can overflow on their own; combine them per term
    scale = 0.0 if ctx.p == 5 else math.exp(ls)
    total, grad, curv, ok = _kernels.pair_sums(X, n * ctx.alpha_n, ls, scale, with_grad, TAIL_RTOL)
    if not ok:
        return math.inf, None, None
    if not with_grad:
        return total, None, None
    return total, grad, curv


def interaction_energy(ctx: RegimeContext, cfg) -> float:
    """Interaction part; ``inf`` if two walls (or a wall and 0) coincide."""
    x = _positions(cfg)
    s, _, _ = _pair_sums(ctx, x, False)
    if math.isinf(s):
        return math.inf
    return s + _p1_constant(ctx, x.size)


def _force_factor(ctx: RegimeContext) -> float:
    return 1.0 if ctx.q in (0, 1) else ctx.Cn


def force_energy(ctx: RegimeContext, cfg) -> float:
    """Mean wall position, times ``C_n`` in the domain-length scaling."""
    x = _positions(cfg)
    return _force_factor(ctx) * float(np.mean(x))


def barrier_energy(ctx: RegimeContext, cfg) -> float:
    """0 if the last wall respects the barrier, ``inf`` otherwise."""
    x = _positions(cfg)
    return 0.0 if x[-1] <= barrier_bound(ctx) else math.inf


def energy_parts(ctx: RegimeContext, cfg) -> dict:
    """Interaction, force and barrier parts and their sum."""
    parts = {
        "interaction": interaction_energy(ctx, cfg),
        "force": force_energy(ctx, cfg),
        "barrier": barrier_energy(ctx, cfg),
    }
    parts["total"] = parts["interaction"] + parts["force"] + parts["barrier"]
    return parts


def total_energy(ctx: RegimeContext, cfg) -> float:
    """Full energy; ``inf`` outside the barrier or at coincident walls."""
    x = _positions(cfg)
    if barrier_energy(ctx, x) > 0 or x[0] < 0:
        return math.inf
    s = interaction_energy(ctx, x)
    if math.isinf(s):
        return math.inf
    return s + force_energy(ctx, x)


def energy_and_gradient(ctx: RegimeContext, cfg, curvature=False):
    """Energy and gradient in one pass over the pairs.

    Raises :class:`SingularConfiguration` on coincident walls.  The
    gradient is that of the smooth part; the barrier is left to the caller.
    With ``curvature`` a third item holds the Hessian diagonal with respect
    to the gaps ``x_i - x_{i-1}``.
    """
    x = _positions(cfg)
    s, g, curv = _pair_sums(ctx, x, True)
    if math.isinf(s):
        raise SingularConfiguration("singular configuration: coincident walls")
    n = x.size
    f = _force_factor(ctx)
    e = s + _p1_constant(ctx, n) + f * float(np.mean(x))
    if barrier_energy(ctx, x) > 0:
        e = math.inf
    if curvature:
        return e, g + f / n, curv
    return e, g + f / n


def total_gradient(ctx: RegimeContext, cfg):
    """Gradient of the energy with respect to ``x_1..x_n``."""
    return energy_and_gradient(ctx, cfg)[1]


def log_rescaled_energy(ctx: RegimeContext, cfg) -> float:
    """``log(E_n) / (2 alpha_n)`` for dilute, finite-domain contexts."""
    if ctx.p != 5 or ctx.q not in (2, 3):
        raise ValueError("the log-rescaled energy is defined for p = 5 and q in {2, 3}")
    e = total_energy(ctx, cfg)
    if math.isinf(e):
        return math.inf
    return math.log(e) / (2.0 * ctx.alpha_n)
