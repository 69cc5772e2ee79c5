"""Probability measures on [0, inf) and their quantile functions.

Three concrete representations are used throughout:

* :class:`EmpiricalMeasure` - atoms of mass ``1/n`` at wall positions;
* :class:`QuantileFn` - a non-decreasing function sampled at the cell
  midpoints ``s_i = (i - 1/2)/m`` of (0, 1), read as constant on each cell;
* :class:`GridDensity` - piecewise-constant density on ``m`` equal cells of
  ``[0, width]``, stored as cell masses.

Narrow convergence is monitored with the 1-Wasserstein distance, computed
exactly from the quantile functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "EmpiricalMeasure",
    "QuantileFn",
    "GridDensity",
    "midpoints",
    "to_quantile",
    "quantile_on_grid",
    "pseudo_inverse",
    "w1_distance",
    "max_density_ratio",
    "density_from_quantile",
    "grid_density_from_cdf",
    "write_measure_csv",
    "read_measure_csv",
]


def midpoints(m):
    """Cell midpoints ``(i - 1/2)/m`` of (0, 1)."""
    return (np.arange(m) + 0.5) / m


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniform atomic measure ``(1/n) sum_i delta_{x_i}`` on sorted atoms."""

    atoms: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        if atoms.ndim != 1 or atoms.size == 0:
            raise ValueError("need a non-empty 1-d array of atoms")
        if np.any(np.diff(atoms) < 0):
            raise ValueError("atoms must be sorted")
        object.__setattr__(self, "atoms", atoms)

    @property
    def n(self):
        return self.atoms.size


@dataclass(frozen=True)
class QuantileFn:
    """Non-decreasing quantile function sampled at cell midpoints."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("need a non-empty 1-d array of quantile values")
        if not np.all(np.isfinite(v)):
            raise ValueError("quantile values must be finite")
        if np.any(np.diff(v) < 0):
            raise ValueError("quantile values must be non-decreasing")
        object.__setattr__(self, "values", v)

    @property
    def m(self):
        return self.values.size

    @property
    def s(self):
        return midpoints(self.m)


@dataclass(frozen=True)
class GridDensity:
    """Piecewise-constant density on ``m`` equal cells of ``[0, width]``."""

    width: float
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("need a non-empty 1-d array of cell masses")
        if np.any(w < 0):
            raise ValueError("cell masses must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"total mass must be 1, got {w.sum()!r}")
        if not self.width > 0:
            raise ValueError("width must be positive")
        object.__setattr__(self, "weights", w)

    @property
    def m(self):
        return self.weights.size

    @property
    def cell(self):
        return self.width / self.m

    @property
    def edges(self):
        return np.linspace(0.0, self.width, self.m + 1)

    @property
    def centers(self):
        return (np.arange(self.m) + 0.5) * self.cell

    @property
    def density(self):
        return self.weights / self.cell

    @classmethod
    def from_density(cls, rho, width, m):
        """Cell masses from a density callable, midpoint rule, renormalised."""
        x = (np.arange(m) + 0.5) * (width / m)
        w = np.asarray(rho(x), dtype=float) * (width / m)
        return cls(width, w / w.sum())


def to_quantile(positions):
    """Piecewise-affine quantile function of a wall configuration.

    On ``((i-1)/n, i/n)`` it interpolates linearly between ``x_{i-1}`` and
    ``x_i`` with the pinned wall ``x_0 = 0``, so that ``xi(i/n) = x_i``.
    Returns a vectorised callable on [0, 1].
    """
    x = np.concatenate([[0.0], np.asarray(positions, dtype=float)])
    nodes = np.linspace(0.0, 1.0, x.size)

    def xi(s):
        return np.interp(s, nodes, x)

    return xi


def quantile_on_grid(positions, m):
    """Sample :func:`to_quantile` at ``m`` cell midpoints."""
    return QuantileFn(to_quantile(positions)(midpoints(m)))


def pseudo_inverse(x_nodes, f_nodes, y):
    """Evaluate ``f^{-1}(y) = sup{x : f(x) < y}`` for a monotone graph.

    ``f`` is given by nodes ``(x_j, f_j)``, both non-decreasing and joined
    by straight segments; repeated ``x`` nodes encode jumps and repeated
    ``f`` nodes flat parts.  Outside the range the supremum is clamped to
    the first or last ``x`` node.
    """
    xs = np.asarray(x_nodes, dtype=float)
    fs = np.asarray(f_nodes, dtype=float)
    y = np.asarray(y, dtype=float)
    j = np.searchsorted(fs, y, side="left") - 1
    out = np.empty_like(y)
    low = j < 0
    high = j >= fs.size - 1
    mid = ~(low | high)
    out[low] = xs[0]
    out[high] = xs[-1]
    jm = j[mid]
    f0, f1 = fs[jm], fs[jm + 1]
    x0, x1 = xs[jm], xs[jm + 1]
    out[mid] = x0 + (y[mid] - f0) / (f1 - f0) * (x1 - x0)
    return out


def _segments(mu):
    """Quantile function of ``mu`` as affine pieces on (0, 1).

    Returns breakpoints ``b`` (length K+1) and start/end values of each of
    the K pieces.
    """
    if isinstance(mu, EmpiricalMeasure):
        b = np.linspace(0.0, 1.0, mu.n + 1)
        return b, mu.atoms, mu.atoms
    if isinstance(mu, QuantileFn):
        b = np.linspace(0.0, 1.0, mu.m + 1)
        return b, mu.values, mu.values
    if isinstance(mu, GridDensity):
        keep = mu.weights > 0
        c = np.concatenate([[0.0], np.cumsum(mu.weights)])
        c[-1] = 1.0
        edges = mu.edges
        lo = c[:-1][keep]
        b = np.concatenate([lo, [1.0]])
        return b, edges[:-1][keep], edges[1:][keep]
    raise TypeError(f"unsupported measure type {type(mu).__name__}")


def _eval_pieces(b, start, end, u, v):
    """Values of a piecewise-affine function at ``u+`` and ``v-``."""
    mids = 0.5 * (u + v)
    k = np.clip(np.searchsorted(b, mids, side="right") - 1, 0, start.size - 1)
    span = b[k + 1] - b[k]
    slope = np.where(span > 0, (end[k] - start[k]) / np.where(span > 0, span, 1.0), 0.0)
    return start[k] + slope * (u - b[k]), start[k] + slope * (v - b[k])


def w1_distance(mu, nu):
    """1-Wasserstein distance ``int_0^1 |xi_mu - xi_nu| ds``.

    Exact for the supported representations: on the common refinement of
    both quantile breakpoints the difference is affine, so ``|d|`` is
    integrated in closed form (including sign changes).
    """
    b1, s1, e1 = _segments(mu)
    b2, s2, e2 = _segments(nu)
    b = np.union1d(b1, b2)
    u, v = b[:-1], b[1:]
    keep = v > u
    u, v = u[keep], v[keep]
    a0, a1 = _eval_pieces(b1, s1, e1, u, v)
    c0, c1 = _eval_pieces(b2, s2, e2, u, v)
    d0, d1 = a0 - c0, a1 - c1
    same = d0 * d1 >= 0
    num = np.where(same, np.abs(d0) + np.abs(d1), d0 * d0 + d1 * d1)
    den = np.where(same, 2.0, 2.0 * (np.abs(d0) + np.abs(d1)))
    with np.errstate(invalid="ignore", divide="ignore"):
        piece = np.where(den > 0, num / den, 0.0) * (v - u)
    return float(np.sum(piece))


def max_density_ratio(mu):
    """``sup_{a<b} mu((a, b)) / (b - a)``.

    For a grid density this is the largest cell density.  For an empirical
    measure the supremum runs over atom windows ``i < j`` with mass
    ``(j - i)/n`` over width ``x_j - x_i`` (one end of the window counted),
    and is infinite if two atoms coincide.
    """
    if isinstance(mu, GridDensity):
        return float(np.max(mu.density))
    if isinstance(mu, QuantileFn):
        mu = EmpiricalMeasure(mu.values)
    if not isinstance(mu, EmpiricalMeasure):
        raise TypeError(f"unsupported measure type {type(mu).__name__}")
    x = mu.atoms
    n = x.size
    if n == 1:
        return math.inf
    if np.any(np.diff(x) <= 0):
        return math.inf
    best = 0.0
    for k in range(1, n):
        gaps = x[k:] - x[:-k]
        best = max(best, (k / n) / float(gaps.min()))
    return best


def grid_density_from_cdf(cdf, width, m):
    """Grid density with exact cell masses ``cdf(edge_{j+1}) - cdf(edge_j)``."""
    edges = np.linspace(0.0, width, m + 1)
    F = np.asarray(cdf(edges), dtype=float)
    w = np.diff(F)
    w = np.clip(w, 0.0, None)
    return GridDensity(width, w / w.sum())


def _quantile_graph(xi: QuantileFn):
    """Monotone graph through the midpoint samples, extended to s = 0 and 1.

    The end half-cells continue the neighbouring slope; the left end is
    clipped at 0.
    """
    v = xi.values
    s = xi.s
    m = xi.m
    if m == 1:
        return np.array([0.0, 1.0]), np.array([max(v[0] - 0.5, 0.0), v[0] + 0.5])
    left = max(v[0] - 0.5 * (v[1] - v[0]), 0.0)
    right = v[-1] + 0.5 * (v[-1] - v[-2])
    return np.concatenate([[0.0], s, [1.0]]), np.concatenate([[left], v, [right]])


def density_from_quantile(xi: QuantileFn, m_out, tol=1e-12):
    """Density ``(xi^{-1})'`` on ``m_out`` cells of ``[0, sup xi]``.

    Raises ``ValueError`` ("atomic part present") when ``xi`` has a flat
    stretch, since the measure then has an atom.
    """
    s_nodes, v_nodes = _quantile_graph(xi)
    if np.any(np.diff(v_nodes) <= tol):
        raise ValueError("atomic part present: quantile function is not strictly increasing")
    width = float(v_nodes[-1])
    edges = np.linspace(0.0, width, m_out + 1)
    # the CDF is the pseudo-inverse of the quantile graph
    F = pseudo_inverse(s_nodes, v_nodes, edges)
    w = np.diff(F)
    drift = abs(w.sum() - 1.0)
    if drift > 1e-10:
        raise ValueError(f"mass drift {drift:.3g} while inverting the quantile function")
    return GridDensity(width, w / w.sum())


def write_measure_csv(path, mu, digits=17):
    """Write a measure as ``position,weight`` rows with a ``#`` header line."""
    path = Path(path)
    fmt = f"%.{digits}g"
    if isinstance(mu, EmpiricalMeasure):
        header = f"# empirical n={mu.n}"
        pos, wt = mu.atoms, np.full(mu.n, 1.0 / mu.n)
    elif isinstance(mu, GridDensity):
        header = f"# grid m={mu.m} width={fmt % mu.width}"
        pos, wt = mu.centers, mu.weights
    else:
        raise TypeError(f"unsupported measure type {type(mu).__name__}")
    lines = [header, "position,weight"]
    lines += [f"{fmt % a},{fmt % b}" for a, b in zip(pos, wt)]
    path.write_text("\n".join(lines) + "\n")


def read_measure_csv(path):
    """Inverse of :func:`write_measure_csv`."""
    header = None
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            header = header or line
            continue
        if line.startswith("position"):
            continue
        a, b = line.split(",")
        rows.append((float(a), float(b)))
    if header is None:
        raise ValueError("missing '# empirical' or '# grid' header")
    data = np.array(rows, dtype=float).reshape(-1, 2)
    fields = dict(tok.split("=") for tok in header.lstrip("#").split()[1:])
    kind = header.lstrip("#").split()[0]
    if kind == "empirical":
        n = int(fields["n"])
        if data.shape[0] != n:
            raise ValueError(f"header says n={n} but found {data.shape[0]} rows")
        return EmpiricalMeasure(data[:, 0])
    if kind == "grid":
        m = int(fields["m"])
        if data.shape[0] != m:
            raise ValueError(f"header says m={m} but found {data.shape[0]} rows")
        w = data[:, 1]
        return GridDensity(float(fields["width"]), w / w.sum())
    raise ValueError(f"unknown measure kind {kind!r}")
