"""Parameter sequences, aspect ratios and regime classification.

Model parameters are sequences in ``n`` of the form ``a * n**b * (log n)**c``
(:class:`PowerLawSeq`).  The family is closed under products, quotients and
real powers, and two members can be compared asymptotically by looking at
``(b, c, a)`` in that order, which makes regime classification decidable.

Index conventions follow the pile-up literature: ``p`` in 1..5 labels the
five interaction scalings of the aspect ratio (against ``1/n`` and ``1``),
``q`` in 0..3 the domain scalings of ``Lambda_n = L_n / ell_n`` (``q = 0``
means no second barrier).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .exceptions import IndeterminateLimit, ParticularCaseError, Unclassifiable

__all__ = [
    "PowerLawSeq",
    "ParamSequences",
    "RegimeReport",
    "SequenceValues",
    "f_n",
    "ahat",
    "sequence_values",
    "classify",
    "beta_limit",
    "probe_beta",
    "limit_constant_C",
    "force_prefactor",
    "BETA_PROBE_EXPONENTS",
    "BETA_INFINITY_THRESHOLD",
    "BETA_CONVERGENCE_RTOL",
    "BETA_EXTRAPOLATION_RTOL",
]

# Frozen thresholds of the numeric beta probe.
BETA_PROBE_EXPONENTS = tuple(range(10, 31))
BETA_INFINITY_THRESHOLD = 1e12
BETA_CONVERGENCE_RTOL = 1e-9
# Extrapolants lose a few digits to rounding, hence the looser tolerance.
BETA_EXTRAPOLATION_RTOL = 1e-7


@dataclass(frozen=True)
class PowerLawSeq:
    """The sequence ``coeff * n**exp_n * (log n)**exp_log``."""

    coeff: float
    exp_n: float = 0.0
    exp_log: float = 0.0

    def __post_init__(self):
        if not (self.coeff > 0 and math.isfinite(self.coeff)):
            raise ValueError(f"coefficient must be positive and finite, got {self.coeff}")
        if not (math.isfinite(self.exp_n) and math.isfinite(self.exp_log)):
            raise ValueError("exponents must be finite")

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        val = self.coeff * n**self.exp_n * np.log(n) ** self.exp_log
        return float(val) if val.ndim == 0 else val

    def __mul__(self, other):
        if isinstance(other, PowerLawSeq):
            return PowerLawSeq(
                self.coeff * other.coeff,
                self.exp_n + other.exp_n,
                self.exp_log + other.exp_log,
            )
        return PowerLawSeq(self.coeff * float(other), self.exp_n, self.exp_log)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PowerLawSeq):
            return self * other**-1
        return PowerLawSeq(self.coeff / float(other), self.exp_n, self.exp_log)

    def __rtruediv__(self, other):
        return float(other) * self**-1

    def __pow__(self, k):
        k = float(k)
        return PowerLawSeq(self.coeff**k, self.exp_n * k, self.exp_log * k)

    @property
    def is_constant(self):
        return self.exp_n == 0.0 and self.exp_log == 0.0

    def trend(self):
        """+1 if the sequence diverges, -1 if it vanishes, 0 if constant."""
        key = (self.exp_n, self.exp_log)
        if key > (0.0, 0.0):
            return 1
        if key < (0.0, 0.0):
            return -1
        return 0

    def compare(self, other: "PowerLawSeq"):
        """Asymptotic comparison: ``(trend, limit)`` of ``self / other``.

        ``trend`` is +1 for ``self >> other``, -1 for ``self << other`` and 0
        when the ratio converges, in which case ``limit`` is that constant.
        """
        ratio = self / other
        t = ratio.trend()
        return t, (ratio.coeff if t == 0 else None)

    def to_dict(self):
        return {"coeff": self.coeff, "exp_n": self.exp_n, "exp_log": self.exp_log}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["coeff"]), float(d.get("exp_n", 0.0)), float(d.get("exp_log", 0.0)))


ONE = PowerLawSeq(1.0)
INV_N = PowerLawSeq(1.0, -1.0)


@dataclass(frozen=True)
class ParamSequences:
    """Spacing ``h``, material constant ``K``, load ``sigma`` and domain length ``L``.

    ``L=None`` is the half-infinite domain (no second barrier, ``q = 0``).
    """

    h: PowerLawSeq
    K: PowerLawSeq
    sigma: PowerLawSeq
    L: Optional[PowerLawSeq] = None

    def to_dict(self):
        return {
            "h": self.h.to_dict(),
            "K": self.K.to_dict(),
            "sigma": self.sigma.to_dict(),
            "L": None if self.L is None else self.L.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        L = d.get("L")
        return cls(
            h=PowerLawSeq.from_dict(d["h"]),
            K=PowerLawSeq.from_dict(d["K"]),
            sigma=PowerLawSeq.from_dict(d["sigma"]),
            L=None if L is None else PowerLawSeq.from_dict(L),
        )


def f_n(n, a):
    """Piecewise map turning the load/interaction ratio into the aspect ratio.

    ``n a**2`` below ``1/n``, ``a`` on ``[1/n, 1]`` and ``log a + 1`` above 1.
    Continuous at both breakpoints.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not a > 0:
        raise ValueError(f"f_n needs a > 0, got {a}")
    if a < 1.0 / n:
        return n * a * a
    if a <= 1.0:
        return float(a)
    return math.log(a) + 1.0


def _a_seq(params: ParamSequences) -> PowerLawSeq:
    return (math.pi * params.K / (INV_N**-1 * params.sigma * params.h)) ** 0.5


def ahat(n, params: ParamSequences):
    """Aspect ratio in the load-balanced scaling at a given ``n``."""
    a = math.sqrt(math.pi * params.K(n) / (n * params.sigma(n) * params.h(n)))
    return f_n(n, a)


@dataclass(frozen=True)
class SequenceValues:
    """Numerical values of the derived sequences at one ``n``."""

    n: int
    a: float
    ahat: float
    ell: float
    Lambda: float
    alpha: float


def sequence_values(n, params: ParamSequences) -> SequenceValues:
    """Evaluate ``ahat_n``, ``ell_n``, ``Lambda_n`` and ``alpha_n`` at ``n``.

    Without a second barrier ``Lambda_n`` and ``alpha_n`` are ``inf``.
    """
    h = params.h(n)
    a = math.sqrt(math.pi * params.K(n) / (n * params.sigma(n) * h))
    ah = f_n(n, a)
    ell = n * h * ah / math.pi
    if params.L is None:
        return SequenceValues(n, a, ah, ell, math.inf, math.inf)
    L = params.L(n)
    return SequenceValues(n, a, ah, ell, L / ell, math.pi * L / (n * h))


def _ahat_form(a: PowerLawSeq):
    """Leading-order form of ``f_n(a_n)``; second item tells if it is exact."""
    t, c = a.compare(INV_N)
    if t < 0 or (t == 0 and c < 1.0):
        return INV_N**-1 * a * a, True
    if t == 0:
        return a, True
    t, c = a.compare(ONE)
    if t < 0 or (t == 0 and c <= 1.0):
        return a, True
    if t == 0:
        return PowerLawSeq(math.log(c) + 1.0), True
    # a -> inf: log a + 1 = exp_n log n + exp_log log log n + log coeff + 1
    if a.exp_n > 0:
        return PowerLawSeq(a.exp_n, 0.0, 1.0), False
    raise Unclassifiable(
        "aspect ratio grows like log log n, outside the power-law-with-log family"
    )


def _p_class(alpha: PowerLawSeq):
    """Interaction regime ``p`` and constant ``c_tilde`` for an aspect ratio."""
    t, c = alpha.compare(INV_N)
    if t < 0:
        return 1, None
    if t == 0:
        return 2, c
    t, c = alpha.compare(ONE)
    if t < 0:
        return 3, None
    if t == 0:
        return 4, c
    return 5, None


@dataclass(frozen=True)
class RegimeReport:
    """Classification of a model into regime ``(p, q)`` with limit constants.

    ``c_tilde`` is the limit of ``n alpha_n`` for ``p = 2`` and of ``alpha_n``
    for ``p = 4``.  ``beta`` may be ``inf``; for ``(p, q) = (5, 2)`` that flags
    the particular case, where ``C`` stays ``None``.
    """

    p: int
    q: int
    c_tilde: Optional[float]
    Lambda: Optional[float]
    beta: Optional[float]
    C: Optional[float]
    ahat_form: PowerLawSeq
    ell_form: PowerLawSeq
    alpha_form: Optional[PowerLawSeq]
    Lambda_form: Optional[PowerLawSeq]
    notes: tuple = field(default=())

    @property
    def particular_case(self):
        return self.p == 5 and self.q == 2 and self.beta == math.inf

    def to_dict(self):
        def num(x):
            if x is None:
                return None
            if math.isinf(x):
                return "inf"
            return x

        return {
            "p": self.p,
            "q": self.q,
            "c_tilde": num(self.c_tilde),
            "Lambda": num(self.Lambda),
            "beta": num(self.beta),
            "C": num(self.C),
            "particular_case": self.particular_case,
            "ahat_form": self.ahat_form.to_dict(),
            "ell_form": self.ell_form.to_dict(),
            "alpha_form": None if self.alpha_form is None else self.alpha_form.to_dict(),
            "Lambda_form": None if self.Lambda_form is None else self.Lambda_form.to_dict(),
            "beta_probe": {
                "exponents": [BETA_PROBE_EXPONENTS[0], BETA_PROBE_EXPONENTS[-1]],
                "infinity_threshold": BETA_INFINITY_THRESHOLD,
                "convergence_rtol": BETA_CONVERGENCE_RTOL,
                "extrapolation_rtol": BETA_EXTRAPOLATION_RTOL,
            },
            "notes": list(self.notes),
        }


def classify(params: ParamSequences) -> RegimeReport:
    """Determine the regime ``(p, q)`` and its limit constants.

    ``q`` comes from ``Lambda_n`` against 1.  ``p`` is read off ``ahat_n``
    for ``q`` in {0, 1} and off ``alpha_n`` for ``q`` in {2, 3}.  Raises
    :class:`Unclassifiable` for sequences outside the decidable family and
    :class:`IndeterminateLimit` when ``beta`` cannot be determined.
    """
    a = _a_seq(params)
    ah_form, exact = _ahat_form(a)
    ell_form = INV_N**-1 * params.h * ah_form / math.pi
    notes = []
    if not exact:
        notes.append("ahat_form is leading order only (log branch of f_n)")

    if params.L is None:
        p, c_tilde = _p_class(ah_form)
        return RegimeReport(p, 0, c_tilde, None, None, None, ah_form, ell_form, None, None, tuple(notes))

    alpha_form = math.pi * params.L / (INV_N**-1 * params.h)
    Lambda_form = params.L / ell_form
    t, lam = Lambda_form.compare(ONE)
    if t > 0:
        q, Lambda = 1, None
        p, c_tilde = _p_class(ah_form)
    else:
        q = 2 if t == 0 else 3
        Lambda = lam if q == 2 else 0.0
        p, c_tilde = _p_class(alpha_form)

    beta = None
    C = None
    if q == 2:
        if p == 5:
            beta = beta_limit(params, Lambda=Lambda)
            if math.isinf(beta):
                notes.append("beta = inf: use the particular-case energy in the ell_n scaling")
            else:
                C = limit_constant_C(p, Lambda, beta)
        else:
            C = limit_constant_C(p, Lambda, None)
    return RegimeReport(
        p, q, c_tilde, Lambda, beta, C, ah_form, ell_form, alpha_form, Lambda_form, tuple(notes)
    )


def probe_beta(alpha_fn: Callable[[float], float], Lambda_fn: Callable[[float], float]):
    """Numerically detect ``lim exp(2 alpha_n (1 - 1/Lambda_n))``.

    The exponent is sampled at ``n = 2**k`` for ``k`` in
    :data:`BETA_PROBE_EXPONENTS`.  Infinity (zero) is declared when the
    values grow monotonically past :data:`BETA_INFINITY_THRESHOLD` (fall
    below its reciprocal), and a finite limit when the last two samples
    agree to :data:`BETA_CONVERGENCE_RTOL`.  Failing both, the exponent is
    extrapolated to ``1/log n -> 0`` with Neville's scheme over the trailing
    samples, and the limit is accepted when two consecutive extrapolants
    agree to :data:`BETA_EXTRAPOLATION_RTOL`.
    """
    ns = [2.0**k for k in BETA_PROBE_EXPONENTS]
    expo = np.array([2.0 * alpha_fn(n) * (1.0 - 1.0 / Lambda_fn(n)) for n in ns])
    log_thr = math.log(BETA_INFINITY_THRESHOLD)
    d = np.diff(expo)
    if expo[-1] > log_thr and np.all(d[-5:] > 0):
        return math.inf
    if expo[-1] < -log_thr and np.all(d[-5:] < 0):
        return 0.0
    vals = np.exp(expo)
    if abs(vals[-1] - vals[-2]) <= BETA_CONVERGENCE_RTOL * abs(vals[-1]):
        return float(vals[-1])

    x = 1.0 / np.log(np.array(ns))
    est = [_neville_at_zero(x[-m:], expo[-m:]) for m in range(2, 13)]
    gaps = [abs(math.exp(b) - math.exp(a)) / math.exp(b) for a, b in zip(est, est[1:])]
    best = int(np.argmin(gaps))
    if gaps[best] <= BETA_EXTRAPOLATION_RTOL:
        return math.exp(est[best + 1])
    raise IndeterminateLimit("beta: the probe neither converged nor diverged over n = 2^10..2^30")


def _neville_at_zero(x, y):
    p = np.array(y, dtype=float)
    x = np.asarray(x, dtype=float)
    m = len(x)
    for k in range(1, m):
        p[: m - k] = (x[k:] * p[: m - k] - x[: m - k] * p[1 : m - k + 1]) / (x[k:] - x[: m - k])
    return float(p[0])


def beta_limit(params: ParamSequences, Lambda: Optional[float] = None):
    """``beta = lim exp(2 alpha_n (1 - 1/Lambda_n))`` for a ``(5, 2)`` model.

    Symbolic when the limit ``Lambda`` differs from 1 (0 below, ``inf``
    above, since ``alpha_n -> inf``); otherwise delegated to
    :func:`probe_beta` on the exact sequences.
    """
    if params.L is None:
        raise ValueError("beta needs a finite domain length L")
    if Lambda is None:
        ah_form, _ = _ahat_form(_a_seq(params))
        Lambda_form = params.L / (INV_N**-1 * params.h * ah_form / math.pi)
        t, Lambda = Lambda_form.compare(ONE)
        if t != 0:
            raise ValueError("beta is only defined when Lambda_n converges")
    if Lambda < 1.0:
        return 0.0
    if Lambda > 1.0:
        return math.inf
    return probe_beta(
        lambda n: sequence_values(n, params).alpha,
        lambda n: sequence_values(n, params).Lambda,
    )


def limit_constant_C(p, Lambda, beta=None):
    """Force prefactor of the limit energy in the critical domain regime.

    ``Lambda`` for ``p = 1``, ``Lambda**2`` for ``p`` in 2..4 and ``beta / 2``
    for ``p = 5``.  An infinite ``beta`` raises :class:`ParticularCaseError`.
    """
    if p == 1:
        return float(Lambda)
    if p in (2, 3, 4):
        return float(Lambda) ** 2
    if p == 5:
        if beta is None:
            raise ValueError("p = 5 needs beta")
        if math.isinf(beta):
            raise ParticularCaseError("beta is infinite: use particular-case energy")
        return beta / 2.0
    raise ValueError(f"p must lie in 1..5, got {p}")


def force_prefactor(p, Lambda_n, alpha_n):
    """Finite-``n`` force prefactor in the ``L_n`` scaling.

    ``Lambda_n``, ``Lambda_n**2`` or ``exp(2 alpha_n (1 - 1/Lambda_n))`` for
    ``p = 1``, 2..4 and 5.
    """
    if p == 1:
        return float(Lambda_n)
    if p in (2, 3, 4):
        return float(Lambda_n) ** 2
    if p == 5:
        return math.exp(2.0 * alpha_n * (1.0 - 1.0 / Lambda_n))
    raise ValueError(f"p must lie in 1..5, got {p}")


def with_scaled_load(params: ParamSequences, factor: float) -> ParamSequences:
    """Multiply ``K`` and ``sigma`` by the same constant."""
    return replace(params, K=params.K * factor, sigma=params.sigma * factor)
